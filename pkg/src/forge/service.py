"""HTTP service hosting live planning sessions for the task studio.

Sessions run one trial each: the client clicks to reveal values, submits a
final choice, and reads back agreement/far-sightedness/score against the
shipped decision aid. Studies group sessions into blocks with a randomized
block order. Every session appends to its own line-delimited event file
under the data directory (``FORGE_DATA_DIR``), so any trial can be replayed
and checked after the fact.
"""

from __future__ import annotations

import json
import os
import secrets
import threading
import time
from dataclasses import dataclass, field, replace
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .envs import (
    BeliefState,
    EnvError,
    EnvSpec,
    GroundTruth,
    MetaAction,
    TERMINATE,
    builtin_names,
    builtin_spec,
    display_value,
    initial_belief,
    root_paths,
    sample_ground_truth,
    spec_to_doc,
    step,
)
from .formulas import ProceduralFormula, parse_ltl, print_ltl
from .metrics import click_agreement, fsq, task_performance
from .predicates import ARITIES
from .trajectories import Trajectory, trajectory_from_actions
from .translate import builtin_dictionary, split_steps, translate

FORMAT_VERSION = 1
CONDITIONS = ("aided", "control")
REPORT_SIMS = 200


@lru_cache(maxsize=None)
def shipped_aid(env_name: str) -> tuple[ProceduralFormula, str, tuple[str, ...]]:
    """The packaged far-sighted formula rendered for one environment."""

    text = resources.files("forge").joinpath("data/formulas/farsighted.ltl").read_text(
        encoding="utf-8"
    )
    formula = parse_ltl(text.strip(), ARITIES)
    d = builtin_dictionary(env_name)
    return formula, translate(formula, d), tuple(split_steps(formula, d))


@dataclass
class Session:
    id: str
    env_name: str
    spec: EnvSpec
    condition: str
    seed: int
    ground_truth: GroundTruth
    study_id: str | None = None
    belief: BeliefState = None  # type: ignore[assignment]
    actions: list[MetaAction] = field(default_factory=list)
    timestamps: list[float] = field(default_factory=list)
    choice: tuple[str, ...] | None = None
    finished: bool = False
    lock: threading.Lock = field(default_factory=threading.Lock)

    def __post_init__(self) -> None:
        if self.belief is None:
            self.belief = initial_belief(self.spec)

    @property
    def aided(self) -> bool:
        return self.condition == "aided"

    def trajectory(self) -> Trajectory:
        traj = trajectory_from_actions(
            self.spec,
            self.ground_truth,
            self.actions,
            timestamps=self.timestamps,
            seed=self.seed,
            trial_id=self.id,
        )
        return replace(traj, choice=self.choice)


@dataclass
class Study:
    id: str
    condition: str
    blocks: tuple[str, ...]
    trials_per_block: int
    seed: int
    trial_seeds: tuple[int, ...]
    cursor: int = 0
    session_ids: list[str] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def total(self) -> int:
        return len(self.blocks) * self.trials_per_block


class SessionStore:
    """In-memory registry backed by append-only event files."""

    def __init__(self, data_dir: Path):
        self.data_dir = data_dir
        (data_dir / "sessions").mkdir(parents=True, exist_ok=True)
        (data_dir / "studies").mkdir(parents=True, exist_ok=True)
        self._sessions: dict[str, Session] = {}
        self._studies: dict[str, Study] = {}
        self._registry_lock = threading.Lock()

    def session_path(self, session_id: str) -> Path:
        return self.data_dir / "sessions" / f"{session_id}.jsonl"

    def study_path(self, study_id: str) -> Path:
        return self.data_dir / "studies" / f"{study_id}.jsonl"

    def append(self, path: Path, record: dict[str, Any]) -> None:
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record) + "\n")

    def index(self, record: dict[str, Any]) -> None:
        self.append(self.data_dir / "index.jsonl", record)

    def create_session(
        self,
        env_name: str,
        condition: str,
        seed: int | None,
        study_id: str | None = None,
    ) -> Session:
        if env_name not in builtin_names():
            raise HTTPException(400, f"unknown environment: {env_name!r}")
        if condition not in CONDITIONS:
            raise HTTPException(400, f"condition must be one of {CONDITIONS}")
        if seed is None:
            seed = int.from_bytes(secrets.token_bytes(4), "big")
        spec = builtin_spec(env_name)
        session = Session(
            id=secrets.token_hex(8),
            env_name=env_name,
            spec=spec,
            condition=condition,
            seed=seed,
            ground_truth=sample_ground_truth(spec, seed),
            study_id=study_id,
        )
        with self._registry_lock:
            self._sessions[session.id] = session
        now = time.time()
        header = {
            "format_version": FORMAT_VERSION,
            "record": "session",
            "id": session.id,
            "env": env_name,
            "condition": condition,
            "seed": seed,
            "ground_truth": session.ground_truth,
            "study": study_id,
            "created": now,
        }
        self.append(self.session_path(session.id), header)
        self.index(
            {
                "format_version": FORMAT_VERSION,
                "record": "session",
                "id": session.id,
                "env": env_name,
                "condition": condition,
                "seed": seed,
                "study": study_id,
                "created": now,
            }
        )
        return session

    def get_session(self, session_id: str) -> Session:
        with self._registry_lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise HTTPException(404, f"unknown session: {session_id!r}")
        return session

    def create_study(
        self,
        condition: str,
        tasks: tuple[str, ...],
        trials_per_block: int,
        seed: int | None,
    ) -> Study:
        if condition not in CONDITIONS:
            raise HTTPException(400, f"condition must be one of {CONDITIONS}")
        for task in tasks:
            if task not in builtin_names():
                raise HTTPException(400, f"unknown environment: {task!r}")
        if trials_per_block < 1:
            raise HTTPException(400, "trials_per_block must be positive")
        if seed is None:
            seed = int.from_bytes(secrets.token_bytes(4), "big")
        rng = np.random.default_rng(seed)
        blocks = tuple(tasks[i] for i in rng.permutation(len(tasks)))
        n_total = len(blocks) * trials_per_block
        trial_seeds = tuple(int(s) for s in rng.integers(0, 2**31 - 1, size=n_total))
        study = Study(
            id=secrets.token_hex(8),
            condition=condition,
            blocks=blocks,
            trials_per_block=trials_per_block,
            seed=seed,
            trial_seeds=trial_seeds,
        )
        with self._registry_lock:
            self._studies[study.id] = study
        now = time.time()
        header = {
            "format_version": FORMAT_VERSION,
            "record": "study",
            "id": study.id,
            "condition": condition,
            "blocks": list(blocks),
            "trials_per_block": trials_per_block,
            "seed": seed,
            "trial_seeds": list(trial_seeds),
            "created": now,
        }
        self.append(self.study_path(study.id), header)
        self.index(
            {
                "format_version": FORMAT_VERSION,
                "record": "study",
                "id": study.id,
                "condition": condition,
                "created": now,
            }
        )
        return study

    def get_study(self, study_id: str) -> Study:
        with self._registry_lock:
            study = self._studies.get(study_id)
        if study is None:
            raise HTTPException(404, f"unknown study: {study_id!r}")
        return study


def session_snapshot(session: Session) -> dict[str, Any]:
    """Client-facing view; hidden values stay hidden."""

    spec = session.spec
    belief = session.belief
    revealed = {
        node: {"value": value, "display": display_value(spec, value)}
        for node, value in belief.revealed.items()
    }
    hidden = [n for n in spec.clickable if n not in belief.revealed]
    if session.finished:
        status = "finished"
    elif belief.terminated:
        status = "stopped"
    else:
        status = "active"
    snap: dict[str, Any] = {
        "format_version": FORMAT_VERSION,
        "id": session.id,
        "env": session.env_name,
        "kind": spec.kind,
        "condition": session.condition,
        "status": status,
        "n_clicks": belief.n_clicks,
        "clicks_left": (
            None
            if spec.click_budget is None
            else max(0, spec.click_budget - belief.n_clicks)
        ),
        "revealed": revealed,
        "hidden": hidden,
        "choice": list(session.choice) if session.choice is not None else None,
        "study": session.study_id,
    }
    if session.aided:
        _, text, steps = shipped_aid(session.env_name)
        snap["aid_text"] = text
        snap["aid_steps"] = list(steps)
    return snap


def study_snapshot(study: Study) -> dict[str, Any]:
    done = study.cursor >= study.total
    snap: dict[str, Any] = {
        "format_version": FORMAT_VERSION,
        "id": study.id,
        "condition": study.condition,
        "blocks": list(study.blocks),
        "trials_per_block": study.trials_per_block,
        "seed": study.seed,
        "sessions": list(study.session_ids),
        "completed": study.cursor,
        "total": study.total,
        "done": done,
    }
    if not done:
        snap["next"] = {
            "block": study.cursor // study.trials_per_block,
            "trial": study.cursor % study.trials_per_block,
            "env": study.blocks[study.cursor // study.trials_per_block],
        }
    return snap


class CreateSessionBody(BaseModel):
    env: str
    condition: str
    seed: int | None = None


class ActionBody(BaseModel):
    kind: str
    node: str | None = None


class ChoiceBody(BaseModel):
    path: list[str] = []


class CreateStudyBody(BaseModel):
    condition: str
    tasks: list[str] = ["mortgage", "roadtrip"]
    trials_per_block: int = 8
    seed: int | None = None


def create_app(data_dir: str | Path | None = None) -> FastAPI:
    if data_dir is None:
        data_dir = os.environ.get("FORGE_DATA_DIR", "forge-data")
    store = SessionStore(Path(data_dir))
    app = FastAPI(title="forge session service")
    app.state.store = store

    def apply_action(session: Session, action: MetaAction) -> None:
        """Step the belief and append the event; caller holds the lock."""

        t = len(session.actions)
        try:
            session.belief = step(session.belief, action, session.ground_truth)
        except EnvError as err:
            raise HTTPException(400, str(err)) from None
        now = time.time()
        session.actions.append(action)
        session.timestamps.append(now)
        event: dict[str, Any] = {"record": "event", "t": t, "action": action.kind, "ts": now}
        if action.is_click:
            event["node"] = action.node
            event["value"] = session.ground_truth[action.node]
        store.append(store.session_path(session.id), event)

    @app.get("/api/v1/envs")
    def list_envs() -> dict[str, Any]:
        return {"format_version": FORMAT_VERSION, "envs": list(builtin_names())}

    @app.get("/api/v1/envs/{name}")
    def get_env(name: str) -> dict[str, Any]:
        if name not in builtin_names():
            raise HTTPException(404, f"unknown environment: {name!r}")
        return spec_to_doc(builtin_spec(name))

    @app.post("/api/v1/sessions", status_code=201)
    def create_session(body: CreateSessionBody) -> dict[str, Any]:
        session = store.create_session(body.env, body.condition, body.seed)
        return session_snapshot(session)

    @app.get("/api/v1/sessions/{session_id}")
    def get_session(session_id: str) -> dict[str, Any]:
        session = store.get_session(session_id)
        with session.lock:
            return session_snapshot(session)

    @app.post("/api/v1/sessions/{session_id}/actions")
    def post_action(session_id: str, body: ActionBody) -> dict[str, Any]:
        session = store.get_session(session_id)
        try:
            action = MetaAction(body.kind, body.node)
        except EnvError as err:
            raise HTTPException(400, str(err)) from None
        with session.lock:
            if session.finished:
                raise HTTPException(409, "session already finished")
            apply_action(session, action)
            return session_snapshot(session)

    @app.post("/api/v1/sessions/{session_id}/choice")
    def post_choice(session_id: str, body: ChoiceBody) -> dict[str, Any]:
        session = store.get_session(session_id)
        with session.lock:
            if session.finished:
                raise HTTPException(409, "session already finished")
            path = tuple(body.path)
            if path:
                if path not in root_paths(session.spec):
                    raise HTTPException(400, f"not a path through the task: {list(path)}")
            elif session.spec.kind != "mouselab":
                raise HTTPException(400, "this task needs a chosen path")
            if not session.belief.terminated:
                apply_action(session, TERMINATE)
            session.choice = path if path else None
            session.finished = True
            store.append(
                store.session_path(session.id),
                {"record": "choice", "path": list(path), "ts": time.time()},
            )
            return session_snapshot(session)

    @app.get("/api/v1/sessions/{session_id}/aid")
    def get_aid(session_id: str) -> dict[str, Any]:
        session = store.get_session(session_id)
        if not session.aided:
            raise HTTPException(404, "no aid for this session")
        formula, text, steps = shipped_aid(session.env_name)
        return {
            "format_version": FORMAT_VERSION,
            "formula": print_ltl(formula),
            "text": text,
            "steps": list(steps),
        }

    @app.get("/api/v1/sessions/{session_id}/report")
    def get_report(session_id: str) -> dict[str, Any]:
        session = store.get_session(session_id)
        with session.lock:
            if not session.finished:
                raise HTTPException(409, "session still running; submit a choice first")
            traj = session.trajectory()
            formula, _, _ = shipped_aid(session.env_name)
            agreement = click_agreement(
                traj, formula, n_sims=REPORT_SIMS, seed=session.seed
            )
            quotient = fsq(traj)
            try:
                score = task_performance(traj)
            except (EnvError, ValueError) as err:
                raise HTTPException(400, str(err)) from None
            return {
                "format_version": FORMAT_VERSION,
                "id": session.id,
                "env": session.env_name,
                "condition": session.condition,
                "agreement": {
                    "consistent": agreement.consistent,
                    "inconsistent": agreement.inconsistent,
                    "missed": agreement.missed,
                    "agreement": agreement.agreement,
                },
                "fsq": {"k": quotient.k, "value": quotient.value},
                "performance": score,
            }

    @app.get("/api/v1/sessions/{session_id}/replay")
    def get_replay(session_id: str) -> dict[str, Any]:
        session = store.get_session(session_id)
        with session.lock:
            path = store.session_path(session.id)
            belief = initial_belief(session.spec)
            n_events = 0
            with open(path, "r", encoding="utf-8") as fh:
                for line in fh:
                    record = json.loads(line)
                    if record.get("record") != "event":
                        continue
                    if record["action"] == "click":
                        action = MetaAction.click(record["node"])
                    else:
                        action = TERMINATE
                    belief = step(belief, action, session.ground_truth)
                    n_events += 1
            ok = (
                belief.revealed == session.belief.revealed
                and belief.terminated == session.belief.terminated
                and n_events == len(session.actions)
            )
            return {
                "format_version": FORMAT_VERSION,
                "id": session.id,
                "ok": ok,
                "events": n_events,
            }

    @app.post("/api/v1/studies", status_code=201)
    def create_study(body: CreateStudyBody) -> dict[str, Any]:
        study = store.create_study(
            body.condition, tuple(body.tasks), body.trials_per_block, body.seed
        )
        return study_snapshot(study)

    @app.get("/api/v1/studies/{study_id}")
    def get_study(study_id: str) -> dict[str, Any]:
        study = store.get_study(study_id)
        with study.lock:
            return study_snapshot(study)

    @app.post("/api/v1/studies/{study_id}/next")
    def study_next(study_id: str) -> dict[str, Any]:
        study = store.get_study(study_id)
        with study.lock:
            if study.cursor >= study.total:
                return {"format_version": FORMAT_VERSION, "done": True, "session": None}
            index = study.cursor
            env_name = study.blocks[index // study.trials_per_block]
            session = store.create_session(
                env_name,
                study.condition,
                study.trial_seeds[index],
                study_id=study.id,
            )
            study.cursor += 1
            study.session_ids.append(session.id)
            store.append(
                store.study_path(study.id),
                {
                    "record": "advance",
                    "index": index,
                    "session": session.id,
                    "ts": time.time(),
                },
            )
            return {
                "format_version": FORMAT_VERSION,
                "done": False,
                "index": index,
                "session": session_snapshot(session),
            }

    return app
