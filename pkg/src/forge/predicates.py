"""Predicate catalog and truth matrices over demonstration rows.

Predicates come in two flavors. Node-targeted ones (``is_observed``,
``is_leaf``, ``has_largest_depth``) judge the node a click is aimed at and
are false for terminate actions. State predicates (``are_leaves_observed``,
``is_previous_observed_max``) read the belief alone, which makes them usable
as stopping conditions. ``among(a, b)`` filters click targets by two node
predicates at once, with ``not(...)`` available inside its argument list.

``truth_matrix`` evaluates a fixed predicate set over every (belief, action)
row of a trajectory corpus; the compilation pipeline works entirely off that
matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .envs import BeliefState, MetaAction
from .formulas import (
    FALSE_NAME,
    TRUE_NAME,
    Condition,
    Conjunction,
    Literal,
    PredicateRef,
)
from .trajectories import Trajectory


class PredicateError(ValueError):
    """Raised for unknown predicates or ill-typed usage."""


ARITIES: dict[str, int] = {
    "is_observed": 0,
    "has_largest_depth": 0,
    "is_leaf": 0,
    "are_leaves_observed": 0,
    "is_previous_observed_max": 0,
    "among": 2,
    "not": 1,
    TRUE_NAME: 0,
    FALSE_NAME: 0,
}

NODE_PREDICATES = frozenset({"is_observed", "has_largest_depth", "is_leaf", "among"})
STATE_PREDICATES = frozenset({"are_leaves_observed", "is_previous_observed_max"})
CONDITION_PREDICATES = STATE_PREDICATES | {TRUE_NAME, FALSE_NAME}


def is_state_predicate(ref: PredicateRef) -> bool:
    if ref.name == "not":
        return is_state_predicate(ref.args[0])
    return ref.name in CONDITION_PREDICATES


def _check_known(ref: PredicateRef) -> None:
    if ref.name not in ARITIES:
        raise PredicateError(f"unknown predicate: {ref.name!r}")
    if len(ref.args) != ARITIES[ref.name]:
        raise PredicateError(
            f"predicate {ref.name!r} takes {ARITIES[ref.name]} argument(s), got {len(ref.args)}"
        )


def eval_node_predicate(ref: PredicateRef, belief: BeliefState, node: str) -> bool:
    """Evaluate a predicate against a specific target node."""

    _check_known(ref)
    spec = belief.spec
    if ref.name == "not":
        return not eval_node_predicate(ref.args[0], belief, node)
    if ref.name == "is_observed":
        return node in belief.revealed
    if ref.name == "has_largest_depth":
        return spec.depth(node) == spec.max_depth
    if ref.name == "is_leaf":
        return not spec.children(node)
    if ref.name == "among":
        return all(eval_node_predicate(arg, belief, node) for arg in ref.args)
    return eval_state_predicate(ref, belief)


def eval_state_predicate(ref: PredicateRef, belief: BeliefState) -> bool:
    """Evaluate an action-independent predicate on the belief alone."""

    _check_known(ref)
    if ref.name == TRUE_NAME:
        return True
    if ref.name == FALSE_NAME:
        return False
    if ref.name == "not":
        return not eval_state_predicate(ref.args[0], belief)
    if ref.name == "are_leaves_observed":
        spec = belief.spec
        deepest = spec.max_depth
        return all(
            n in belief.revealed for n in spec.clickable if spec.depth(n) == deepest
        )
    if ref.name == "is_previous_observed_max":
        last = belief.last_revealed()
        if last is None:
            return False
        node, value = last
        return value == belief.spec.support_max(node)
    raise PredicateError(f"predicate {ref.name!r} needs an action to evaluate")


def eval_predicate(ref: PredicateRef, belief: BeliefState, action: MetaAction) -> bool:
    """Evaluate a predicate for one (belief, action) row.

    Node-targeted predicates are false for terminate actions; state
    predicates ignore the action entirely.
    """

    _check_known(ref)
    if ref.name == "not":
        return not eval_predicate(ref.args[0], belief, action)
    if ref.name in NODE_PREDICATES:
        if not action.is_click:
            return False
        assert action.node is not None
        return eval_node_predicate(ref, belief, action.node)
    return eval_state_predicate(ref, belief)


def eval_literal(lit: Literal, belief: BeliefState, action: MetaAction) -> bool:
    value = eval_predicate(lit.predicate, belief, action)
    return not value if lit.negated else value


def eval_conjunction(conj: Conjunction, belief: BeliefState, action: MetaAction) -> bool:
    return all(eval_literal(lit, belief, action) for lit in conj.literals)


def eval_condition(cond: Condition, belief: BeliefState) -> bool:
    """Stopping conditions are evaluated on the belief, never the action."""

    for ref in cond.disjuncts:
        if not is_state_predicate(ref):
            raise PredicateError(
                f"condition predicate {ref.name!r} is node-targeted; conditions must be"
                " action-independent"
            )
        if eval_state_predicate(ref, belief):
            return True
    return False


# --- truth matrix ------------------------------------------------------------


@dataclass(frozen=True)
class TruthMatrix:
    """Boolean predicate values over every (belief, action) row of a corpus.

    Rows follow input order: all rows of trajectory 0, then trajectory 1,
    and so on; ``traj_slices[k]`` addresses trajectory k's rows.
    """

    columns: tuple[PredicateRef, ...]
    rows: tuple[tuple[int, int], ...]
    values: np.ndarray
    traj_slices: tuple[slice, ...]

    def column(self, ref: PredicateRef) -> np.ndarray:
        for i, col in enumerate(self.columns):
            if col == ref:
                return self.values[:, i]
        raise PredicateError(f"predicate {ref} is not a matrix column")

    def literal_values(self, lit: Literal) -> np.ndarray:
        col = self.column(lit.predicate)
        return ~col if lit.negated else col

    def conjunction_values(self, conj: Conjunction) -> np.ndarray:
        if conj.is_true:
            return np.ones(len(self.rows), dtype=bool)
        out = np.ones(len(self.rows), dtype=bool)
        for lit in conj.literals:
            out &= self.literal_values(lit)
        return out

    def condition_values(self, cond: Condition) -> np.ndarray:
        if cond.is_true:
            return np.ones(len(self.rows), dtype=bool)
        if cond.is_false:
            return np.zeros(len(self.rows), dtype=bool)
        out = np.zeros(len(self.rows), dtype=bool)
        for ref in cond.disjuncts:
            out |= self.column(ref)
        return out


def truth_matrix(trajectories: list[Trajectory], columns: list[PredicateRef]) -> TruthMatrix:
    """Evaluate ``columns`` on every row of every trajectory, in input order."""

    unique: list[PredicateRef] = []
    for ref in columns:
        if ref not in unique:
            unique.append(ref)
    rows: list[tuple[int, int]] = []
    slices: list[slice] = []
    data: list[list[bool]] = []
    for t, traj in enumerate(trajectories):
        start = len(rows)
        for s, (belief, action) in enumerate(traj.pairs):
            rows.append((t, s))
            data.append([eval_predicate(ref, belief, action) for ref in unique])
        slices.append(slice(start, len(rows)))
    values = np.array(data, dtype=bool) if data else np.zeros((0, len(unique)), dtype=bool)
    return TruthMatrix(tuple(unique), tuple(rows), values, tuple(slices))
