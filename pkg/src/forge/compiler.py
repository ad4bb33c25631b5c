"""Compile DNF strategy descriptions into procedural formulas.

The transform runs in two phases. Phase one turns the DNF's conjunctions
plus a demonstration corpus into per-class step sequences: it tracks which
conjunction licenses each demonstrated action, builds a graph of conjunction
hand-offs, enumerates the maximal sequences that graph supports (with loops),
groups demonstrations into equivalence classes by subsequence membership, and
searches the allowed predicate set for stopping conditions that are false
while a step runs and true the moment it ends. Phase two greedily prunes
body literals whenever dropping one raises the demonstration likelihood, and
returns the best-scoring disjunct.

Demonstrated trajectories end with a terminate row. That row is not required
to satisfy the DNF; it is the boundary at which a step's stopping condition
must show itself true.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .formulas import (
    FALSE_CONDITION,
    Condition,
    Conjunction,
    DnfFormula,
    LoopBack,
    PredicateRef,
    ProceduralFormula,
    ProceduralStep,
    grammar_check,
)
from .policies import FormulaController
from .predicates import TruthMatrix, truth_matrix
from .trajectories import Trajectory

MAX_CONJUNCTIONS = 12
MAX_SIGNATURES = 10_000

# float-noise guard for "strictly improves" comparisons
_LL_TOLERANCE = 1e-9


class CompileError(ValueError):
    """Raised when demonstrations or inputs cannot be compiled."""


@dataclass(frozen=True)
class LikelihoodModel:
    """Action model: uniform over eligible actions, epsilon off-formula."""

    epsilon: float = 1e-6

    def __post_init__(self) -> None:
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie strictly between 0 and 1")


DEFAULT_MODEL = LikelihoodModel()


@dataclass(frozen=True)
class TransitionGraph:
    """Conjunction hand-off graph; edge weights count supporting trajectories."""

    n: int
    edges: dict[tuple[int, int], int]

    def successors(self, i: int) -> list[int]:
        return sorted(j for (a, j) in self.edges if a == i)

    def predecessors(self, j: int) -> list[int]:
        return sorted(i for (i, b) in self.edges if b == j)


@dataclass(frozen=True)
class Signature:
    """A maximal conjunction sequence, optionally closing into a loop."""

    sequence: tuple[int, ...]
    loop_target: int | None = None

    def cycle_length(self) -> int:
        assert self.loop_target is not None
        return len(self.sequence) - self.loop_target

    def canonical_position(self, unrolled: int) -> int:
        """Map a position in the unrolled sequence back onto the signature."""

        k = len(self.sequence)
        if unrolled < k or self.loop_target is None:
            return unrolled
        return self.loop_target + (unrolled - k) % self.cycle_length()

    def unrolled(self, length: int) -> tuple[int, ...]:
        if self.loop_target is None:
            return self.sequence
        cycle = self.sequence[self.loop_target :]
        out = list(self.sequence)
        while len(out) < length:
            out.extend(cycle)
        return tuple(out)


@dataclass(frozen=True)
class EquivalenceClass:
    signature: Signature
    members: tuple[int, ...]


@dataclass(frozen=True)
class _Segment:
    """A run of rows licensed by one conjunction within one trajectory."""

    conjunction: int
    start: int  # global matrix row, inclusive
    end: int  # global matrix row, exclusive


@dataclass(frozen=True)
class _MemberTrace:
    trajectory: int
    segments: tuple[_Segment, ...]
    stop_row: int | None  # trailing row not licensed by any conjunction


# --- phase one building blocks -------------------------------------------------


def remove_redundant(
    conjunctions: list[Conjunction], redundant: set[str]
) -> list[Conjunction]:
    """Drop every literal whose predicate is named in ``redundant``.

    A conjunction losing all its literals collapses to TRUE.
    """

    out: list[Conjunction] = []
    for conj in conjunctions:
        kept = tuple(l for l in conj.literals if l.predicate.name not in redundant)
        out.append(Conjunction(kept))
    return out


def trajectory_traces(
    matrix: TruthMatrix, conj_values: list[np.ndarray]
) -> list[_MemberTrace]:
    """Split each trajectory into conjunction-licensed segments.

    The active conjunction prefers to continue; otherwise the first
    (document-order) licensed conjunction takes over. Only the final row of
    a trajectory may go unlicensed -- it is the stopping boundary. Any other
    unlicensed row means the demonstrations do not fit the DNF.
    """

    traces: list[_MemberTrace] = []
    for t, sl in enumerate(matrix.traj_slices):
        segments: list[_Segment] = []
        stop_row: int | None = None
        current: int | None = None
        for row in range(sl.start, sl.stop):
            active = [i for i, vals in enumerate(conj_values) if vals[row]]
            if not active:
                if row == sl.stop - 1:
                    stop_row = row
                    break
                raise CompileError(
                    f"DNF not satisfied by demonstrations (trajectory {t},"
                    f" step {row - sl.start})"
                )
            if current is not None and current in active and segments:
                segments[-1] = replace(segments[-1], end=row + 1)
            else:
                current = active[0] if current not in active else current
                segments.append(_Segment(current, row, row + 1))
        traces.append(_MemberTrace(t, tuple(segments), stop_row))
    return traces


def build_transition_graph(
    matrix: TruthMatrix, conj_values: list[np.ndarray]
) -> TransitionGraph:
    """Edges where one conjunction flips off exactly as another flips on."""

    n = len(conj_values)
    if n > MAX_CONJUNCTIONS:
        raise CompileError(f"too many conjunctions ({n} > {MAX_CONJUNCTIONS})")
    counts: dict[tuple[int, int], int] = {}
    for sl in matrix.traj_slices:
        seen: set[tuple[int, int]] = set()
        for row in range(sl.start + 1, sl.stop):
            prev = row - 1
            off = [i for i in range(n) if conj_values[i][prev] and not conj_values[i][row]]
            on = [j for j in range(n) if conj_values[j][row] and not conj_values[j][prev]]
            for i in off:
                for j in on:
                    if i != j:
                        seen.add((i, j))
        for edge in seen:
            counts[edge] = counts.get(edge, 0) + 1
    return TransitionGraph(n, counts)


def max_sequences(graph: TransitionGraph) -> list[Signature]:
    """All maximal simple paths through the graph, with loop markers.

    A path is maximal when it cannot be extended by a fresh node at either
    end. If its last node links back into the path, the signature carries
    the earliest such position as its loop target. Fully cyclic signatures
    that are rotations of one another collapse to the rotation starting at
    the smallest conjunction id.
    """

    results: set[Signature] = set()

    def extend(path: list[int]) -> None:
        if len(results) > MAX_SIGNATURES:
            raise CompileError("transition graph yields too many sequences")
        tail = path[-1]
        extensions = [v for v in graph.successors(tail) if v not in path]
        if extensions:
            for v in extensions:
                extend(path + [v])
            return
        if any(u not in path for u in graph.predecessors(path[0])):
            return  # extendable at the front: a longer path will cover this one
        back = [p for p, node in enumerate(path) if (tail, node) in graph.edges]
        loop_target = min(back) if back else None
        results.add(Signature(tuple(path), loop_target))

    for node in range(graph.n):
        extend([node])

    deduped: set[Signature] = set()
    for sig in results:
        if sig.loop_target == 0:
            # a fully cyclic signature equals its rotations; keep the one
            # starting at the smallest conjunction id when it is also maximal
            rotations = [
                Signature(sig.sequence[i:] + sig.sequence[:i], 0)
                for i in range(len(sig.sequence))
            ]
            canon = min((r for r in rotations if r in results), key=lambda s: s.sequence)
            deduped.add(canon)
        else:
            deduped.add(sig)
    return sorted(
        deduped, key=lambda s: (s.sequence, -1 if s.loop_target is None else s.loop_target)
    )


def _member_sequence(trace: _MemberTrace) -> tuple[int, ...]:
    return tuple(seg.conjunction for seg in trace.segments)


def _subsequence_embedding(
    member: tuple[int, ...], signature: Signature
) -> tuple[int, ...] | None:
    """Leftmost embedding of the member into the (unrolled) signature."""

    target = signature.unrolled(len(signature.sequence) + len(member) * max(1, len(signature.sequence)))
    positions: list[int] = []
    at = 0
    for item in member:
        while at < len(target) and target[at] != item:
            at += 1
        if at >= len(target):
            return None
        positions.append(at)
        at += 1
    return tuple(positions)


def assign_classes(
    signatures: list[Signature], traces: list[_MemberTrace]
) -> list[EquivalenceClass]:
    """Group trajectories under every signature embedding their sequence."""

    classes: list[EquivalenceClass] = []
    covered: set[int] = set()
    for sig in signatures:
        members = []
        for trace in traces:
            if _subsequence_embedding(_member_sequence(trace), sig) is not None:
                members.append(trace.trajectory)
        if members:
            classes.append(EquivalenceClass(sig, tuple(members)))
            covered.update(members)
    missing = [t.trajectory for t in traces if t.trajectory not in covered]
    if missing:
        raise CompileError(f"trajectories not covered by any sequence class: {missing}")
    return classes


def candidate_conditions(allowed: list[PredicateRef]) -> list[Condition]:
    """Single predicates first, then every unordered pair."""

    singles = [Condition((ref,)) for ref in allowed]
    pairs = [
        Condition((allowed[i], allowed[j]))
        for i in range(len(allowed))
        for j in range(i + 1, len(allowed))
    ]
    return singles + pairs


def matching_conditions(
    matrix: TruthMatrix,
    false_rows: list[int],
    true_rows: list[int],
    candidates: list[Condition],
) -> list[Condition]:
    """Conditions false on every ``false_rows`` entry and true on every
    ``true_rows`` entry."""

    kept: list[Condition] = []
    for cond in candidates:
        values = matrix.condition_values(cond)
        if false_rows and values[false_rows].any():
            continue
        if true_rows and not values[true_rows].all():
            continue
        kept.append(cond)
    return kept


# --- likelihood -----------------------------------------------------------------


def loglikelihood(
    trajectories: list[Trajectory],
    formula: ProceduralFormula,
    model: LikelihoodModel = DEFAULT_MODEL,
) -> float:
    """Log-probability of the demonstrations under the formula's controller."""

    controller = FormulaController(formula)
    log_eps = math.log(model.epsilon)
    total = 0.0
    for traj in trajectories:
        cursor = 0
        for belief, action in traj.pairs:
            cursor = controller.advance(cursor, belief)
            options = controller.eligible_at(cursor, belief)
            if action in options:
                total += -math.log(len(options))
            else:
                total += log_eps
    return total


# --- the transform ----------------------------------------------------------------


class _RetryWithoutRemoval(Exception):
    pass


def transform(
    f: DnfFormula,
    trajectories: list[Trajectory],
    allowed: list[PredicateRef],
    redundant: set[str] | None = None,
    seed: int | None = None,
    model: LikelihoodModel = DEFAULT_MODEL,
) -> tuple[ProceduralFormula, ...]:
    """Phase one: compile the DNF into a disjunction of procedural formulas.

    ``allowed`` holds the state predicates the condition search may use;
    ``redundant`` names predicates deleted from the DNF up front. ``seed``
    is accepted for interface stability; the transform is deterministic.

    Raises ``CompileError`` when the demonstrations do not satisfy the DNF,
    no sequence class covers some trajectory, or the condition search fails
    after the removal retry is exhausted.
    """

    del seed
    if not trajectories:
        raise CompileError("no demonstrations to compile from")
    redundant = redundant or set()
    try:
        return _transform_once(f, trajectories, allowed, redundant, model)
    except _RetryWithoutRemoval:
        if not redundant:
            raise CompileError("condition search failed with no removals to retry")
        return _transform_once(f, trajectories, allowed, set(), model)


def _transform_once(
    f: DnfFormula,
    trajectories: list[Trajectory],
    allowed: list[PredicateRef],
    redundant: set[str],
    model: LikelihoodModel,
) -> tuple[ProceduralFormula, ...]:
    stripped = remove_redundant(list(f.conjunctions), redundant)
    removed_any = stripped != list(f.conjunctions)
    conjunctions: list[Conjunction] = []
    for conj in stripped:
        if conj not in conjunctions:
            conjunctions.append(conj)

    if len(conjunctions) > MAX_CONJUNCTIONS:
        raise CompileError(
            f"too many conjunctions ({len(conjunctions)} > {MAX_CONJUNCTIONS})"
        )

    columns: list[PredicateRef] = []
    for conj in conjunctions:
        columns.extend(lit.predicate for lit in conj.literals)
    columns.extend(allowed)
    matrix = truth_matrix(trajectories, columns)
    conj_values = [matrix.conjunction_values(c) for c in conjunctions]

    traces = trajectory_traces(matrix, conj_values)

    if not removed_any and len(conjunctions) == 1:
        return (ProceduralFormula((ProceduralStep(conjunctions[0]),)),)

    graph = build_transition_graph(matrix, conj_values)
    signatures = max_sequences(graph)
    classes = assign_classes(signatures, traces)
    candidates = candidate_conditions(allowed)

    disjunction = []
    for cls in classes:
        disjunction.append(
            _class_formula(
                cls, traces, conjunctions, matrix, candidates, removed_any, model, trajectories
            )
        )
    return tuple(disjunction)


def _class_formula(
    cls: EquivalenceClass,
    traces: list[_MemberTrace],
    conjunctions: list[Conjunction],
    matrix: TruthMatrix,
    candidates: list[Condition],
    removed_any: bool,
    model: LikelihoodModel,
    trajectories: list[Trajectory],
) -> ProceduralFormula:
    sig = cls.signature
    k = len(sig.sequence)
    member_traces = [traces[m] for m in cls.members]
    member_trajs = [trajectories[m] for m in cls.members]

    # Per member: segments tagged with canonical signature positions.
    placements: list[list[tuple[int, _Segment]]] = []
    for trace in member_traces:
        embedding = _subsequence_embedding(_member_sequence(trace), sig)
        assert embedding is not None
        tagged = []
        for seg, unrolled_pos in zip(trace.segments, embedding):
            tagged.append((unrolled_pos, seg))
        placements.append(tagged)

    has_loop = sig.loop_target is not None

    def rows_at(position: int) -> list[int]:
        rows: list[int] = []
        for tagged in placements:
            for unrolled_pos, seg in tagged:
                if sig.canonical_position(unrolled_pos) == position:
                    rows.extend(range(seg.start, seg.end))
        return rows

    def boundary_rows(position: int) -> list[int]:
        """First rows of segments that immediately follow a ``position`` segment."""

        rows: list[int] = []
        for trace, tagged in zip(member_traces, placements):
            for idx in range(len(tagged) - 1):
                pos, _ = tagged[idx]
                nxt_pos, nxt_seg = tagged[idx + 1]
                if sig.canonical_position(pos) == position and nxt_pos == pos + 1:
                    rows.append(nxt_seg.start)
            if tagged and trace.stop_row is not None:
                last_pos, _ = tagged[-1]
                if (
                    not has_loop
                    and position == k - 1
                    and sig.canonical_position(last_pos) == k - 1
                ):
                    rows.append(trace.stop_row)
        return rows

    def stop_rows(position: int) -> list[int]:
        """Terminate rows of members that quit while ``position`` was active."""

        rows: list[int] = []
        for trace, tagged in zip(member_traces, placements):
            if not tagged or trace.stop_row is None:
                continue
            last_pos, _ = tagged[-1]
            canonical = sig.canonical_position(last_pos)
            if canonical != position:
                continue
            if not has_loop and canonical == k - 1:
                continue  # finishing the final step is the normal ending
            rows.append(trace.stop_row)
        return rows

    def pick(matching: list[Condition], prefix_steps: list[ProceduralStep]) -> Condition:
        scored = []
        for idx, cond in enumerate(matching):
            trial = ProceduralFormula(tuple(prefix_steps[:-1]) + (replace(prefix_steps[-1], until=cond),))
            ll = loglikelihood(member_trajs, trial, model)
            scored.append((-ll, len(cond.disjuncts), str(cond), idx))
        scored.sort()
        return matching[scored[0][3]]

    steps: list[ProceduralStep] = []
    for position in range(k):
        body = conjunctions[sig.sequence[position]]
        falses = rows_at(position)
        bounds = boundary_rows(position)
        matching = matching_conditions(matrix, falses, bounds, candidates)
        if matching:
            draft = steps + [ProceduralStep(body, until=matching[0])]
            until = pick(matching, draft)
            step = ProceduralStep(body, until=until)
        elif removed_any:
            raise _RetryWithoutRemoval()
        else:
            step = ProceduralStep(body)

        quits = stop_rows(position)
        if quits and step.until is not None:
            unless = _pick_unless(matrix, falses, quits, candidates, removed_any)
            step = replace(step, unless=unless)
        steps.append(step)

    loop = None
    if has_loop:
        assert sig.loop_target is not None
        loop_quits = _loop_stop_rows(sig, member_traces, placements, k)
        unless = None
        if loop_quits:
            unless = _pick_unless(matrix, rows_at(k - 1), loop_quits, candidates, removed_any)
        loop = LoopBack(sig.loop_target, unless)

    formula = ProceduralFormula(tuple(steps), loop)
    assert grammar_check(formula)
    return formula


def _loop_stop_rows(
    sig: Signature,
    member_traces: list[_MemberTrace],
    placements: list[list[tuple[int, _Segment]]],
    k: int,
) -> list[int]:
    rows: list[int] = []
    for trace, tagged in zip(member_traces, placements):
        if not tagged or trace.stop_row is None:
            continue
        last_pos, _ = tagged[-1]
        if sig.canonical_position(last_pos) == k - 1:
            rows.append(trace.stop_row)
    return rows


def _pick_unless(
    matrix: TruthMatrix,
    active_rows: list[int],
    quit_rows: list[int],
    candidates: list[Condition],
    removed_any: bool,
) -> Condition:
    matching = matching_conditions(matrix, active_rows, quit_rows, candidates)
    if matching:
        ranked = sorted(
            (len(c.disjuncts), str(c), i) for i, c in enumerate(matching)
        )
        return matching[ranked[0][2]]
    if removed_any:
        raise _RetryWithoutRemoval()
    return FALSE_CONDITION


# --- phase two: pruning -------------------------------------------------------------


def prune(
    disjunction: tuple[ProceduralFormula, ...],
    trajectories: list[Trajectory],
    model: LikelihoodModel = DEFAULT_MODEL,
) -> ProceduralFormula:
    """Greedy per-literal pruning, then the best-scoring disjunct wins.

    Literals are visited in document order (steps first to last, literals
    left to right); one is dropped only when the corpus log-likelihood
    strictly improves. An emptied body becomes TRUE.
    """

    best_formula: ProceduralFormula | None = None
    best_ll = -math.inf
    for formula in disjunction:
        current = formula
        current_ll = loglikelihood(trajectories, current, model)
        for step_idx in range(len(current.steps)):
            for literal in formula.steps[step_idx].body.literals:
                body = current.steps[step_idx].body
                if literal not in body.literals:
                    continue
                slimmed = Conjunction(tuple(l for l in body.literals if l != literal))
                steps = list(current.steps)
                steps[step_idx] = replace(steps[step_idx], body=slimmed)
                candidate = ProceduralFormula(tuple(steps), current.loop)
                candidate_ll = loglikelihood(trajectories, candidate, model)
                if candidate_ll > current_ll + _LL_TOLERANCE:
                    current = candidate
                    current_ll = candidate_ll
        if current_ll > best_ll + _LL_TOLERANCE or best_formula is None:
            best_formula = current
            best_ll = current_ll
    assert best_formula is not None
    return best_formula
