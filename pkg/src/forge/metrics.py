"""Behavioral metrics: agreement with a strategy, far-sightedness, scores.

Click agreement compares each demonstrated click against what a formula
controller synchronized to the same history could have done. Clicks the
participant skipped count against them only when they also stopped at a
point where the controller would have kept going; in that case the shortfall
is measured against the controller's mean click count over fresh simulations
on the very same ground truth.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass

import numpy as np

from .envs import expected_score, optimal_paths, root_paths
from .formulas import ProceduralFormula
from .policies import FormulaController, rollout
from .trajectories import Trajectory


@dataclass(frozen=True)
class AgreementReport:
    consistent: int
    inconsistent: int
    missed: float
    agreement: float


def click_agreement(
    traj: Trajectory,
    formula: ProceduralFormula,
    n_sims: int = 1000,
    seed: int = 0,
) -> AgreementReport:
    """Share of clicks the formula's controller could have produced.

    agreement = consistent / (consistent + inconsistent + missed), where
    missed is the controller's mean click count (over ``n_sims`` fresh runs
    on the trajectory's own ground truth) minus the participant's, clipped
    at zero, and applies only when the participant stopped somewhere the
    controller would not.
    """

    controller = FormulaController(formula)
    consistent = 0
    inconsistent = 0
    terminated_consistently = False
    for belief, action in traj.pairs:
        allowed = action in controller.eligible_actions(belief)
        if action.is_click:
            if allowed:
                consistent += 1
            else:
                inconsistent += 1
        else:
            terminated_consistently = allowed
    missed = 0.0
    if not terminated_consistently:
        mean_clicks = _mean_controller_clicks(traj, controller, n_sims, seed)
        missed = max(0.0, mean_clicks - traj.n_clicks)
    denominator = consistent + inconsistent + missed
    agreement = consistent / denominator if denominator > 0 else 1.0
    return AgreementReport(consistent, inconsistent, missed, agreement)


def _mean_controller_clicks(
    traj: Trajectory, controller: FormulaController, n_sims: int, seed: int
) -> float:
    policy = controller.policy()
    total = 0
    children = np.random.SeedSequence(seed).spawn(n_sims)
    for child in children:
        rng = np.random.default_rng(child)
        run = rollout(traj.spec, policy, traj.ground_truth, rng)
        total += run.n_clicks
    return total / n_sims


@dataclass(frozen=True)
class FsqReport:
    k: int
    farsighted_clicks: int
    value: float | None


def fsq(traj: Trajectory, empty: str = "zero") -> FsqReport:
    """Far-sightedness: share of the first k clicks aimed at far-sighted nodes.

    k is the size of the far-sighted set, shrunk to the click count when the
    participant clicked less. With no clicks at all the quotient is 0.0, or
    None under ``empty="exclude"`` so aggregations can drop the trial.
    """

    if empty not in ("zero", "exclude"):
        raise ValueError(f"unknown empty-trial policy: {empty!r}")
    farsighted = traj.spec.farsighted_nodes()
    clicks = [a.node for a in traj.actions if a.is_click]
    if not clicks:
        return FsqReport(0, 0, 0.0 if empty == "zero" else None)
    k = min(len(farsighted), len(clicks))
    hits = sum(1 for node in clicks[:k] if node in farsighted)
    return FsqReport(k, hits, hits / k)


def task_performance(traj: Trajectory, choice: tuple[str, ...] | None = None) -> float:
    """Environment-specific outcome of a finished trial.

    mouselab: the expected score of the final belief. roadtrip: the starting
    budget of 500 minus route costs and lookup fees, for the chosen route.
    mortgage: 1.0 when the chosen plan minimizes the weighted total cost
    (ties count), else 0.0.
    """

    spec = traj.spec
    picked = choice if choice is not None else traj.choice
    if spec.kind == "mouselab":
        return expected_score(traj.final_belief, spec)
    if picked is None:
        raise ValueError(f"{spec.kind} performance needs a chosen path")
    path = tuple(picked)
    if path not in set(root_paths(spec)):
        raise ValueError(f"choice {path!r} is not a start-to-end path")
    if spec.kind == "roadtrip":
        route_cost = sum(-traj.ground_truth[n] for n in path)
        fees = spec.click_cost * traj.n_clicks
        return 500.0 - route_cost - fees
    if spec.kind == "mortgage":
        return 1.0 if path in optimal_paths(spec, traj.ground_truth) else 0.0
    raise ValueError(f"no performance rule for environment kind {spec.kind!r}")


DEVIATION_CATEGORIES = (
    "no_clicks",
    "immediate_first_click",
    "intermediate_first_click",
    "farsighted_then_deviation",
)


@dataclass(frozen=True)
class DeviationProfile:
    n_trials: int
    n_deviating: int
    counts: dict[str, int]
    fractions: dict[str, float]


def deviation_profile(
    trajectories: list[Trajectory], formula: ProceduralFormula
) -> DeviationProfile:
    """Classify trials that depart from the formula by how they started.

    A trial complies when every click is controller-consistent and the final
    stop happens where the controller permits stopping. The rest fall into
    four buckets: no clicks at all, a first click on an immediate (depth-1)
    node, a first click on an intermediate node, or a far-sighted first
    click with a deviation later on. Fractions are over deviating trials.
    """

    counts = {c: 0 for c in DEVIATION_CATEGORIES}
    deviating = 0
    controller = FormulaController(formula)
    for traj in trajectories:
        if _complies(traj, controller):
            continue
        deviating += 1
        counts[_categorize(traj)] += 1
    fractions = {
        c: (counts[c] / deviating if deviating else 0.0) for c in DEVIATION_CATEGORIES
    }
    return DeviationProfile(len(trajectories), deviating, counts, fractions)


def _complies(traj: Trajectory, controller: FormulaController) -> bool:
    for belief, action in traj.pairs:
        if action not in controller.eligible_actions(belief):
            return False
    return True


def _categorize(traj: Trajectory) -> str:
    first = next((a for a in traj.actions if a.is_click), None)
    if first is None:
        return "no_clicks"
    spec = traj.spec
    assert first.node is not None
    if first.node in spec.farsighted_nodes():
        return "farsighted_then_deviation"
    if spec.depth(first.node) == 1:
        return "immediate_first_click"
    return "intermediate_first_click"


def median_fsq(values: list[float | None]) -> float | None:
    """Median over trials, ignoring excluded (None) entries."""

    kept = [v for v in values if v is not None]
    if not kept:
        return None
    return float(statistics.median(kept))
