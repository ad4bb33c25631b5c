"""Demonstration trajectories and their line-delimited file format.

A trajectory records one full episode as (belief, action) pairs, ending with
the terminate action. Files hold one JSON object per line: a header per
trajectory followed by its action events, so logs can be appended to and
replayed without a closing record.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Iterable, Mapping

from .envs import (
    FORMAT_VERSION,
    BeliefState,
    EnvError,
    EnvSpec,
    GroundTruth,
    MetaAction,
    builtin_names,
    builtin_spec,
    initial_belief,
    spec_from_doc,
    spec_to_doc,
    step,
)


@dataclass(frozen=True)
class Trajectory:
    spec: EnvSpec
    ground_truth: GroundTruth
    pairs: tuple[tuple[BeliefState, MetaAction], ...]
    timestamps: tuple[float, ...] = ()
    seed: int | None = None
    trial_id: str | None = None
    choice: tuple[str, ...] | None = None  # final path pick, where the task has one

    def __post_init__(self) -> None:
        if not self.pairs:
            raise EnvError("trajectory has no actions")
        if not self.timestamps:
            object.__setattr__(self, "timestamps", tuple(float(i) for i in range(len(self.pairs))))
        if len(self.timestamps) != len(self.pairs):
            raise EnvError("one timestamp per action required")

    @property
    def actions(self) -> tuple[MetaAction, ...]:
        return tuple(a for _, a in self.pairs)

    @property
    def n_clicks(self) -> int:
        return sum(1 for a in self.actions if a.is_click)

    @property
    def final_belief(self) -> BeliefState:
        belief, action = self.pairs[-1]
        return step(belief, action, self.ground_truth)


def trajectory_from_actions(
    spec: EnvSpec,
    gt: GroundTruth,
    actions: Iterable[MetaAction],
    timestamps: Iterable[float] | None = None,
    seed: int | None = None,
    trial_id: str | None = None,
) -> Trajectory:
    """Replay actions from the initial belief into a trajectory."""

    pairs: list[tuple[BeliefState, MetaAction]] = []
    belief = initial_belief(spec)
    for action in actions:
        pairs.append((belief, action))
        belief = step(belief, action, gt)
    return Trajectory(
        spec,
        dict(gt),
        tuple(pairs),
        tuple(timestamps) if timestamps is not None else (),
        seed,
        trial_id,
    )


def validate_trajectory(traj: Trajectory) -> None:
    """Check causal ordering: replaying the actions reproduces each belief."""

    belief = initial_belief(traj.spec)
    for recorded, action in traj.pairs:
        if recorded.revealed != belief.revealed or recorded.terminated != belief.terminated:
            raise EnvError("recorded belief does not match replay")
        belief = step(belief, action, traj.ground_truth)


# --- file format ----------------------------------------------------------------


def write_trajectories(path: str | Path, trajectories: Iterable[Trajectory]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for traj in trajectories:
            for line in trajectory_lines(traj):
                fh.write(json.dumps(line) + "\n")


def trajectory_lines(traj: Trajectory) -> list[dict[str, Any]]:
    header: dict[str, Any] = {
        "format_version": FORMAT_VERSION,
        "record": "trajectory",
        "env": traj.spec.name,
        "seed": traj.seed,
        "trial_id": traj.trial_id,
        "ground_truth": traj.ground_truth,
    }
    if traj.choice is not None:
        header["choice"] = list(traj.choice)
    if not _is_builtin(traj.spec):
        header["env_spec"] = spec_to_doc(traj.spec)
    lines = [header]
    for (belief, action), ts in zip(traj.pairs, traj.timestamps):
        event: dict[str, Any] = {"record": "event", "t": ts, "action": action.kind}
        if action.is_click:
            event["node"] = action.node
            event["value"] = traj.ground_truth[action.node]  # type: ignore[index]
        lines.append(event)
    return lines


def _is_builtin(spec: EnvSpec) -> bool:
    if spec.name not in builtin_names():
        return False
    return spec_to_doc(spec) == spec_to_doc(builtin_spec(spec.name))


def read_trajectories(path: str | Path) -> list[Trajectory]:
    with open(path, "r", encoding="utf-8") as fh:
        records = [json.loads(line) for line in fh if line.strip()]
    return trajectories_from_records(records)


def trajectories_from_records(records: Iterable[Mapping[str, Any]]) -> list[Trajectory]:
    trajectories: list[Trajectory] = []
    header: Mapping[str, Any] | None = None
    events: list[Mapping[str, Any]] = []

    def flush() -> None:
        if header is None:
            return
        trajectories.append(_build(header, events))

    for record in records:
        kind = record.get("record")
        if kind == "trajectory":
            flush()
            version = record.get("format_version")
            if version != FORMAT_VERSION:
                raise EnvError(f"unsupported format_version: {version!r}")
            header = record
            events = []
        elif kind == "event":
            if header is None:
                raise EnvError("event record before any trajectory header")
            events.append(record)
        else:
            raise EnvError(f"unknown record type: {kind!r}")
    flush()
    return trajectories


def _build(header: Mapping[str, Any], events: list[Mapping[str, Any]]) -> Trajectory:
    if "env_spec" in header:
        spec = spec_from_doc(header["env_spec"])
    else:
        spec = builtin_spec(header["env"])
    gt = {n: float(v) for n, v in header.get("ground_truth", {}).items()}
    actions: list[MetaAction] = []
    timestamps: list[float] = []
    for event in events:
        if event["action"] == "click":
            actions.append(MetaAction.click(event["node"]))
            if "value" in event:
                gt.setdefault(event["node"], float(event["value"]))
        else:
            actions.append(MetaAction.terminate())
        timestamps.append(float(event.get("t", len(timestamps))))
    traj = trajectory_from_actions(
        spec, gt, actions, timestamps, header.get("seed"), header.get("trial_id")
    )
    if header.get("choice") is not None:
        traj = replace(traj, choice=tuple(header["choice"]))
    return traj
