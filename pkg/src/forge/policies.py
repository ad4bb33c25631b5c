"""Policies over belief states: formula-driven control and scripted oracles.

``FormulaController`` turns a procedural formula into a policy. Its cursor
lives on one step at a time and moves on belief evidence alone, so replaying
any action history always lands in the same cursor state:

* UNLESS true at the active step: stop immediately.
* UNTIL true: the step is complete; move to the next one (or through the
  trailing LOOP, whose own UNLESS may stop instead).
* HOLD with an unsatisfiable body: move on.
* past the last step with no loop: stop.

The eligible actions at a belief are the legal actions satisfying the active
body; when nothing satisfies it, terminating is the only move left.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .envs import (
    TERMINATE,
    BeliefState,
    EnvSpec,
    GroundTruth,
    MetaAction,
    initial_belief,
    sample_ground_truth,
    step,
)
from .formulas import ProceduralFormula
from .predicates import eval_condition, eval_conjunction
from .trajectories import Trajectory

DONE = -1

Policy = Callable[[BeliefState, np.random.Generator], MetaAction]


class FormulaController:
    def __init__(self, formula: ProceduralFormula):
        self.formula = formula

    # --- cursor mechanics ---------------------------------------------------

    def advance(self, cursor: int, belief: BeliefState) -> int:
        """Cascade the cursor over everything that fires at this belief."""

        if cursor == DONE:
            return DONE
        steps = self.formula.steps
        visited: set[int] = set()
        while True:
            if cursor >= len(steps):
                loop = self.formula.loop
                if loop is None:
                    return DONE
                if loop.unless is not None and eval_condition(loop.unless, belief):
                    return DONE
                cursor = loop.target
                if cursor in visited:
                    # the loop cycles without consuming an action
                    return DONE
            visited.add(cursor)
            active = steps[cursor]
            if active.unless is not None and eval_condition(active.unless, belief):
                return DONE
            if active.until is not None:
                if eval_condition(active.until, belief):
                    cursor += 1
                    continue
                return cursor
            if not self._satisfiable(active, belief):
                cursor += 1
                continue
            return cursor

    def _satisfiable(self, active, belief: BeliefState) -> bool:
        return any(
            eval_conjunction(active.body, belief, a) for a in belief.legal_actions()
        )

    def sync_cursor(self, belief: BeliefState) -> int:
        """Replay the belief's history from scratch and return the cursor."""

        replayed = initial_belief(belief.spec)
        cursor = 0
        for action in belief.history:
            cursor = self.advance(cursor, replayed)
            replayed = step(replayed, action, belief.revealed)
        return self.advance(cursor, belief)

    # --- action selection -----------------------------------------------------

    def eligible_at(self, cursor: int, belief: BeliefState) -> list[MetaAction]:
        if belief.terminated:
            return []
        if cursor == DONE:
            return [TERMINATE]
        body = self.formula.steps[cursor].body
        chosen = [a for a in belief.legal_actions() if eval_conjunction(body, belief, a)]
        return chosen if chosen else [TERMINATE]

    def eligible_actions(self, belief: BeliefState) -> list[MetaAction]:
        return self.eligible_at(self.sync_cursor(belief), belief)

    def policy(self) -> Policy:
        def act(belief: BeliefState, rng: np.random.Generator) -> MetaAction:
            return formula_policy_step(self, belief, rng)

        return act


def formula_policy_step(
    controller: FormulaController, belief: BeliefState, rng: np.random.Generator
) -> MetaAction:
    """Pick uniformly among the controller's eligible actions."""

    options = controller.eligible_actions(belief)
    return options[int(rng.integers(len(options)))]


def consistency(action: MetaAction, belief: BeliefState, formula: ProceduralFormula) -> bool:
    """Could a controller synchronized to this belief's history emit the action?"""

    return action in FormulaController(formula).eligible_actions(belief)


# --- scripted policies --------------------------------------------------------


def far_sighted_policy(belief: BeliefState, rng: np.random.Generator) -> MetaAction:
    """Reveal far-sighted nodes until one shows its best possible value."""

    spec = belief.spec
    last = belief.last_revealed()
    if last is not None and last[1] == spec.support_max(last[0]):
        return TERMINATE
    remaining = [
        a
        for a in belief.legal_actions()
        if a.is_click and a.node in spec.farsighted_nodes()
    ]
    if not remaining:
        return TERMINATE
    return remaining[int(rng.integers(len(remaining)))]


def random_policy(belief: BeliefState, rng: np.random.Generator) -> MetaAction:
    """Uniform over legal actions; terminates eventually by chance or budget."""

    options = belief.legal_actions()
    return options[int(rng.integers(len(options)))]


def named_policy(name: str) -> Policy:
    if name == "far_sighted":
        return far_sighted_policy
    if name == "random":
        return random_policy
    raise ValueError(f"unknown policy: {name!r}")


# --- rollouts -------------------------------------------------------------------


def rollout(
    spec: EnvSpec,
    policy: Policy,
    gt: GroundTruth,
    rng: np.random.Generator,
    trial_id: str | None = None,
) -> Trajectory:
    """Run one episode to termination, recording every (belief, action) pair."""

    pairs: list[tuple[BeliefState, MetaAction]] = []
    belief = initial_belief(spec)
    guard = len(spec.nodes) + 2
    while not belief.terminated:
        action = policy(belief, rng)
        pairs.append((belief, action))
        belief = step(belief, action, gt)
        if len(pairs) > guard:
            raise RuntimeError("policy failed to terminate")
    return Trajectory(spec, dict(gt), tuple(pairs), trial_id=trial_id)


def rollouts(
    spec: EnvSpec,
    policy: Policy,
    n: int,
    seed: int,
    gt: GroundTruth | None = None,
) -> list[Trajectory]:
    """n seeded episodes; each draws its own ground truth unless one is given."""

    out: list[Trajectory] = []
    children = np.random.SeedSequence(seed).spawn(n)
    for i, child in enumerate(children):
        rng = np.random.default_rng(child)
        truth = dict(gt) if gt is not None else sample_ground_truth(spec, rng)
        out.append(rollout(spec, policy, truth, rng, trial_id=f"rollout-{i}"))
    return out


# --- exact metalevel values (small environments only) ---------------------------


def exact_state_value(belief: BeliefState) -> float:
    """Expected value of acting optimally from here, by full enumeration.

    Exponential in the number of unrevealed nodes; meant for environments
    with a handful of nodes and small discrete supports.
    """

    best = -np.inf
    for action in belief.legal_actions():
        best = max(best, exact_action_value(belief, action))
    return float(best)


def exact_action_value(belief: BeliefState, action: MetaAction) -> float:
    spec = belief.spec
    if not action.is_click:
        return _committed_best_path(belief) - spec.click_cost * belief.n_clicks
    assert action.node is not None
    total = 0.0
    values = _discrete_support(spec, action.node)
    for v in values:
        revealed = dict(belief.revealed)
        revealed[action.node] = v
        nxt = BeliefState(spec, revealed, belief.history + (action,), False)
        total += exact_state_value(nxt)
    return total / len(values)


def _discrete_support(spec: EnvSpec, node: str) -> tuple[float, ...]:
    dist = spec.dists[node]
    values = getattr(dist, "values", None)
    if values is None:
        raise ValueError("exact values need discrete supports")
    if spec.forced is not None and node in spec.forced.nodes:
        raise ValueError("exact values cannot handle forced-value nodes")
    return values


def _committed_best_path(belief: BeliefState) -> float:
    """Value of stopping now: the best path sum under the current belief.

    Hidden nodes contribute their prior mean; the chooser commits before
    seeing them, so no clairvoyant max over posteriors.
    """

    spec = belief.spec
    values = {
        n: belief.revealed.get(n, float(np.mean(_discrete_support(spec, n))))
        for n in spec.clickable
    }
    return _best_path_sum(spec, values)


def _best_path_sum(spec: EnvSpec, values: dict[str, float]) -> float:
    memo: dict[str, float] = {}

    def best_from(node: str) -> float:
        if node in memo:
            return memo[node]
        own = 0.0 if node == spec.start else values[node]
        kids = spec.children(node)
        memo[node] = own + (max(best_from(k) for k in kids) if kids else 0.0)
        return memo[node]

    return best_from(spec.start)
