"""Belief-state planning environments for metalevel strategies.

An environment is a DAG of nodes with hidden values. The agent's actions are
metalevel: reveal one node's value (for a fee) or terminate and act on what
was revealed. Three builtin families ship here:

* ``mouselab3`` -- a three-level tree whose value spread grows with depth.
* ``roadtrip``  -- a map of stopover cities leading to airports; one airport
  hides a much cheaper price.
* ``mortgage``  -- three plans priced over three periods, later periods
  weighing far more in the total cost.

Values are stored as rewards (costs are negative), so "best possible value"
always means the support maximum regardless of the environment.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np
from scipy.special import ndtr, ndtri

FORMAT_VERSION = 1

GroundTruth = dict[str, float]


class EnvError(ValueError):
    """Raised on illegal actions or malformed environment definitions."""


# --- value distributions -----------------------------------------------------


@dataclass(frozen=True)
class DiscreteUniform:
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.values:
            raise EnvError("distribution needs at least one value")

    def sample(self, rng: np.random.Generator) -> float:
        return float(self.values[int(rng.integers(len(self.values)))])

    def support_max(self) -> float:
        return max(self.values)

    def to_doc(self) -> dict[str, Any]:
        return {"kind": "uniform", "values": list(self.values)}


@dataclass(frozen=True)
class TruncatedNormal:
    """Normal distribution truncated (and renormalized) to [lower, upper]."""

    mean: float
    sd: float
    lower: float | None = None
    upper: float | None = None

    def _cdf_bounds(self) -> tuple[float, float]:
        lo = 0.0 if self.lower is None else float(ndtr((self.lower - self.mean) / self.sd))
        hi = 1.0 if self.upper is None else float(ndtr((self.upper - self.mean) / self.sd))
        return lo, hi

    def sample(self, rng: np.random.Generator) -> float:
        lo, hi = self._cdf_bounds()
        u = rng.uniform(lo, hi)
        return float(self.mean + self.sd * ndtri(u))

    def support_max(self) -> float:
        return math.inf if self.upper is None else self.upper

    def to_doc(self) -> dict[str, Any]:
        return {
            "kind": "truncated_normal",
            "mean": self.mean,
            "sd": self.sd,
            "lower": self.lower,
            "upper": self.upper,
        }


Dist = DiscreteUniform | TruncatedNormal


def dist_from_doc(doc: Mapping[str, Any]) -> Dist:
    kind = doc.get("kind")
    if kind == "uniform":
        return DiscreteUniform(tuple(float(v) for v in doc["values"]))
    if kind == "truncated_normal":
        return TruncatedNormal(
            float(doc["mean"]),
            float(doc["sd"]),
            None if doc.get("lower") is None else float(doc["lower"]),
            None if doc.get("upper") is None else float(doc["upper"]),
        )
    raise EnvError(f"unknown distribution kind: {kind!r}")


@dataclass(frozen=True)
class ForcedValue:
    """After sampling, one node drawn from ``nodes`` is set to ``value``."""

    nodes: tuple[str, ...]
    value: float


# --- environment specification ----------------------------------------------


@dataclass(frozen=True)
class EnvSpec:
    name: str
    kind: str  # display flavor: "mouselab", "roadtrip", or "mortgage"
    start: str
    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]
    dists: dict[str, Dist]
    click_cost: float = 0.0
    click_budget: int | None = None
    labels: dict[str, str] = field(default_factory=dict)
    farsighted: frozenset[str] = frozenset()
    forced: ForcedValue | None = None
    coords: dict[str, tuple[float, float]] = field(default_factory=dict)
    period_weights: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.start not in self.nodes:
            raise EnvError("start node missing from node list")
        known = set(self.nodes)
        for a, b in self.edges:
            if a not in known or b not in known:
                raise EnvError(f"edge ({a}, {b}) references an unknown node")
        for node in self.nodes:
            if node != self.start and node not in self.dists:
                raise EnvError(f"node {node!r} has no value distribution")
        object.__setattr__(self, "_children", _adjacency(self.nodes, self.edges))
        object.__setattr__(self, "_depths", _longest_depths(self))

    def children(self, node: str) -> tuple[str, ...]:
        return self._children[node]  # type: ignore[attr-defined]

    def depth(self, node: str) -> int:
        return self._depths[node]  # type: ignore[attr-defined]

    @property
    def max_depth(self) -> int:
        return max(self._depths.values())  # type: ignore[attr-defined]

    @property
    def clickable(self) -> tuple[str, ...]:
        return tuple(n for n in self.nodes if n != self.start)

    def farsighted_nodes(self) -> frozenset[str]:
        if self.farsighted:
            return self.farsighted
        deepest = self.max_depth
        return frozenset(n for n in self.clickable if self.depth(n) == deepest)

    def support_max(self, node: str) -> float:
        """Largest value the node can reveal, forced specials included."""
        best = self.dists[node].support_max()
        if self.forced is not None and node in self.forced.nodes:
            best = max(best, self.forced.value)
        return best

    def label(self, node: str) -> str:
        return self.labels.get(node, node)


def _adjacency(nodes: Sequence[str], edges: Iterable[tuple[str, str]]) -> dict[str, tuple[str, ...]]:
    children: dict[str, list[str]] = {n: [] for n in nodes}
    for a, b in edges:
        children[a].append(b)
    return {n: tuple(kids) for n, kids in children.items()}


def _longest_depths(spec: EnvSpec) -> dict[str, int]:
    """Longest distance from start; raises on cycles or unreachable nodes."""

    depths: dict[str, int] = {spec.start: 0}
    order = _topological(spec)
    for node in order:
        for child in spec.children(node):
            cand = depths[node] + 1
            if depths.get(child, -1) < cand:
                depths[child] = cand
    missing = [n for n in spec.nodes if n not in depths]
    if missing:
        raise EnvError(f"nodes unreachable from start: {missing}")
    return depths


def _topological(spec: EnvSpec) -> list[str]:
    indeg = {n: 0 for n in spec.nodes}
    for _, b in spec.edges:
        indeg[b] += 1
    queue = [n for n in spec.nodes if indeg[n] == 0]
    order: list[str] = []
    while queue:
        node = queue.pop(0)
        order.append(node)
        for child in spec.children(node):
            indeg[child] -= 1
            if indeg[child] == 0:
                queue.append(child)
    if len(order) != len(spec.nodes):
        raise EnvError("environment graph has a cycle")
    return order


def root_paths(spec: EnvSpec) -> list[tuple[str, ...]]:
    """All start-to-sink paths, start excluded, in node order."""

    paths: list[tuple[str, ...]] = []

    def walk(node: str, acc: tuple[str, ...]) -> None:
        kids = spec.children(node)
        if not kids:
            paths.append(acc)
            return
        for child in kids:
            walk(child, acc + (child,))

    walk(spec.start, ())
    if not paths or paths == [()]:
        raise EnvError("environment has no paths to score")
    return paths


def path_return(spec: EnvSpec, values: Mapping[str, float], path: Sequence[str]) -> float:
    """Weighted sum of values along a path (period weights if configured)."""

    weights = spec.period_weights
    total = 0.0
    for i, node in enumerate(path):
        w = 1.0 if weights is None else weights[i]
        total += w * values.get(node, 0.0)
    return total


def optimal_paths(spec: EnvSpec, gt: Mapping[str, float]) -> list[tuple[str, ...]]:
    """Paths attaining the best weighted return; ties keep every optimum."""

    paths = root_paths(spec)
    returns = [path_return(spec, gt, p) for p in paths]
    best = max(returns)
    return [p for p, r in zip(paths, returns) if math.isclose(r, best, abs_tol=1e-9)]


def mortgage_total_cost(rates: Sequence[float], weights: Sequence[float] = (1.0, 5.0, 25.0)) -> float:
    """Total repayment weight of a plan's per-period rates."""

    if len(rates) != len(weights):
        raise EnvError(f"expected {len(weights)} rates, got {len(rates)}")
    return float(sum(w * r for w, r in zip(weights, rates)))


# --- actions and beliefs ------------------------------------------------------


@dataclass(frozen=True)
class MetaAction:
    kind: str  # "click" | "terminate"
    node: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("click", "terminate"):
            raise EnvError(f"unknown action kind: {self.kind!r}")
        if self.kind == "click" and self.node is None:
            raise EnvError("click needs a target node")

    @staticmethod
    def click(node: str) -> "MetaAction":
        return MetaAction("click", node)

    @staticmethod
    def terminate() -> "MetaAction":
        return MetaAction("terminate")

    @property
    def is_click(self) -> bool:
        return self.kind == "click"

    def __str__(self) -> str:
        return f"click({self.node})" if self.is_click else "terminate"


TERMINATE = MetaAction.terminate()


@dataclass(frozen=True)
class BeliefState:
    spec: EnvSpec
    revealed: dict[str, float] = field(default_factory=dict)
    history: tuple[MetaAction, ...] = ()
    terminated: bool = False

    @property
    def n_clicks(self) -> int:
        return len(self.revealed)

    def last_revealed(self) -> tuple[str, float] | None:
        for action in reversed(self.history):
            if action.is_click:
                assert action.node is not None
                return action.node, self.revealed[action.node]
        return None

    def legal_actions(self) -> list[MetaAction]:
        if self.terminated:
            return []
        actions: list[MetaAction] = []
        budget = self.spec.click_budget
        if budget is None or self.n_clicks < budget:
            for node in self.spec.clickable:
                if node not in self.revealed:
                    actions.append(MetaAction.click(node))
        actions.append(TERMINATE)
        return actions


def initial_belief(spec: EnvSpec) -> BeliefState:
    return BeliefState(spec)


def step(belief: BeliefState, action: MetaAction, gt: Mapping[str, float]) -> BeliefState:
    """Apply one metalevel action, returning the successor belief."""

    if belief.terminated:
        raise EnvError("session already terminated")
    if action.kind == "terminate":
        return BeliefState(belief.spec, dict(belief.revealed), belief.history + (action,), True)
    node = action.node
    assert node is not None
    if node == belief.spec.start or node not in belief.spec.nodes:
        raise EnvError(f"cannot click node {node!r}")
    if node in belief.revealed:
        raise EnvError(f"node {node!r} is already revealed")
    budget = belief.spec.click_budget
    if budget is not None and belief.n_clicks >= budget:
        raise EnvError("click budget exhausted")
    if node not in gt:
        raise EnvError(f"ground truth has no value for {node!r}")
    revealed = dict(belief.revealed)
    revealed[node] = gt[node]
    return BeliefState(belief.spec, revealed, belief.history + (action,), False)


def expected_score(belief: BeliefState, spec: EnvSpec | None = None) -> float:
    """Best revealed-path sum minus click fees (unrevealed values count 0)."""

    spec = spec or belief.spec
    memo: dict[str, float] = {}

    def best_from(node: str) -> float:
        if node in memo:
            return memo[node]
        value = 0.0 if node == spec.start else belief.revealed.get(node, 0.0)
        kids = spec.children(node)
        memo[node] = value + (max(best_from(k) for k in kids) if kids else 0.0)
        return memo[node]

    if not spec.children(spec.start):
        raise EnvError("environment has no paths to score")
    return best_from(spec.start) - spec.click_cost * belief.n_clicks


# --- sampling -----------------------------------------------------------------


def sample_ground_truth(spec: EnvSpec, seed: int | np.random.Generator) -> GroundTruth:
    """Draw one hidden-value assignment; deterministic in the seed."""

    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    gt: GroundTruth = {}
    for node in spec.nodes:
        if node == spec.start:
            continue
        gt[node] = spec.dists[node].sample(rng)
    if spec.forced is not None:
        chosen = spec.forced.nodes[int(rng.integers(len(spec.forced.nodes)))]
        gt[chosen] = spec.forced.value
    return gt


def display_value(spec: EnvSpec, value: float) -> str:
    """Participant-facing rendering of a revealed value."""

    if spec.kind == "mortgage":
        return f"{-value:.2f}%"
    if spec.kind == "roadtrip":
        return f"-${-value:g}"
    return f"{value:g}"


# --- builtin environments ------------------------------------------------------


def builtin_names() -> tuple[str, ...]:
    return ("mouselab3", "roadtrip", "mortgage")


def builtin_spec(name: str, **overrides: Any) -> EnvSpec:
    """Construct a builtin environment, optionally overriding cost knobs."""

    if name == "mouselab3":
        spec = _mouselab3()
    elif name == "roadtrip":
        spec = _roadtrip()
    elif name == "mortgage":
        spec = _mortgage()
    else:
        raise EnvError(f"unknown builtin environment: {name!r}")
    if overrides:
        allowed = {"click_cost", "click_budget", "period_weights"}
        unknown = set(overrides) - allowed
        if unknown:
            raise EnvError(f"unsupported overrides: {sorted(unknown)}")
        doc = spec_to_doc(spec)
        for key, value in overrides.items():
            doc[key] = list(value) if key == "period_weights" and value is not None else value
        spec = spec_from_doc(doc)
    return spec


def _mouselab3() -> EnvSpec:
    nodes = ["n0"] + [f"n{i}" for i in range(1, 13)]
    edges = [
        ("n0", "n1"), ("n0", "n2"), ("n0", "n3"),
        ("n1", "n4"), ("n2", "n5"), ("n3", "n6"),
        ("n4", "n7"), ("n4", "n8"),
        ("n5", "n9"), ("n5", "n10"),
        ("n6", "n11"), ("n6", "n12"),
    ]
    supports = {
        1: (-9.0, -3.0, 3.0, 9.0),
        2: (-18.0, -6.0, 6.0, 18.0),
        3: (-36.0, -12.0, 12.0, 36.0),
    }
    depth_of = {"n1": 1, "n2": 1, "n3": 1, "n4": 2, "n5": 2, "n6": 2}
    dists = {
        n: DiscreteUniform(supports[depth_of.get(n, 3)])
        for n in nodes
        if n != "n0"
    }
    coords = {
        "n0": (0.5, 0.0),
        "n1": (0.2, 0.25), "n2": (0.5, 0.25), "n3": (0.8, 0.25),
        "n4": (0.2, 0.55), "n5": (0.5, 0.55), "n6": (0.8, 0.55),
        "n7": (0.12, 0.9), "n8": (0.28, 0.9),
        "n9": (0.42, 0.9), "n10": (0.58, 0.9),
        "n11": (0.72, 0.9), "n12": (0.88, 0.9),
    }
    return EnvSpec(
        name="mouselab3",
        kind="mouselab",
        start="n0",
        nodes=tuple(nodes),
        edges=tuple(edges),
        dists=dists,
        click_cost=1.0,
        labels={n: n for n in nodes},
        farsighted=frozenset(f"n{i}" for i in range(7, 13)),
        coords=coords,
    )


_ROADTRIP_AIRPORTS = ("harbor_city", "stoneport", "lakeview", "fairwind")


def _roadtrip() -> EnvSpec:
    layer1 = ("maple_hollow", "birch_creek", "pine_bluff")
    layer2 = ("elm_ridge", "willow_bend", "aspen_vale", "juniper_flats")
    airports = _ROADTRIP_AIRPORTS
    nodes = ("start",) + layer1 + layer2 + airports
    edges = [("start", c) for c in layer1]
    edges += [
        ("maple_hollow", "elm_ridge"), ("maple_hollow", "willow_bend"),
        ("birch_creek", "willow_bend"), ("birch_creek", "aspen_vale"),
        ("pine_bluff", "aspen_vale"), ("pine_bluff", "juniper_flats"),
        ("elm_ridge", "harbor_city"), ("elm_ridge", "stoneport"),
        ("willow_bend", "stoneport"), ("willow_bend", "lakeview"),
        ("aspen_vale", "lakeview"), ("aspen_vale", "fairwind"),
        ("juniper_flats", "fairwind"), ("juniper_flats", "harbor_city"),
    ]
    hotel = DiscreteUniform((-45.0, -40.0, -35.0, -30.0))
    flight = DiscreteUniform((-380.0, -350.0, -320.0, -290.0, -260.0))
    dists: dict[str, Dist] = {n: hotel for n in layer1 + layer2}
    dists.update({n: flight for n in airports})
    labels = {
        "start": "Cedar Grove",
        "maple_hollow": "Maple Hollow",
        "birch_creek": "Birch Creek",
        "pine_bluff": "Pine Bluff",
        "elm_ridge": "Elm Ridge",
        "willow_bend": "Willow Bend",
        "aspen_vale": "Aspen Vale",
        "juniper_flats": "Juniper Flats",
        "harbor_city": "Harbor City",
        "stoneport": "Stoneport",
        "lakeview": "Lakeview",
        "fairwind": "Fairwind",
    }
    coords = {
        "start": (0.08, 0.5),
        "maple_hollow": (0.32, 0.18),
        "birch_creek": (0.3, 0.52),
        "pine_bluff": (0.34, 0.84),
        "elm_ridge": (0.58, 0.12),
        "willow_bend": (0.56, 0.4),
        "aspen_vale": (0.6, 0.66),
        "juniper_flats": (0.58, 0.9),
        "harbor_city": (0.88, 0.1),
        "stoneport": (0.86, 0.38),
        "lakeview": (0.9, 0.62),
        "fairwind": (0.87, 0.88),
    }
    return EnvSpec(
        name="roadtrip",
        kind="roadtrip",
        start="start",
        nodes=nodes,
        edges=tuple(edges),
        dists=dists,
        click_cost=10.0,
        labels=labels,
        farsighted=frozenset(airports),
        forced=ForcedValue(airports, -20.0),
        coords=coords,
    )


def _mortgage() -> EnvSpec:
    nodes = ["start"] + [f"{p}{i}" for p in "abc" for i in (1, 2, 3)]
    edges = [("start", f"{p}1") for p in "abc"]
    edges += [(f"{p}1", f"{p}2") for p in "abc"]
    edges += [(f"{p}2", f"{p}3") for p in "abc"]
    means = {"a": (0.5, 1.5, 2.5), "b": (1.5, 1.5, 1.5), "c": (2.5, 1.5, 0.5)}
    dists: dict[str, Dist] = {}
    for p in "abc":
        for i in (1, 2, 3):
            dists[f"{p}{i}"] = TruncatedNormal(mean=-means[p][i - 1], sd=0.44, upper=0.0)
    labels = {"start": "start"}
    for p in "abc":
        for i in (1, 2, 3):
            labels[f"{p}{i}"] = f"Plan {p.upper()}, period {i}"
    coords = {f"{p}{i}": (float(i), float("abc".index(p))) for p in "abc" for i in (1, 2, 3)}
    coords["start"] = (0.0, 1.0)
    return EnvSpec(
        name="mortgage",
        kind="mortgage",
        start="start",
        nodes=tuple(nodes),
        edges=tuple(edges),
        dists=dists,
        click_cost=0.0,
        click_budget=3,
        labels=labels,
        farsighted=frozenset({"a3", "b3", "c3"}),
        coords=coords,
        period_weights=(1.0, 5.0, 25.0),
    )


# --- spec documents -------------------------------------------------------------


def spec_to_doc(spec: EnvSpec) -> dict[str, Any]:
    return {
        "format_version": FORMAT_VERSION,
        "name": spec.name,
        "kind": spec.kind,
        "start": spec.start,
        "nodes": list(spec.nodes),
        "edges": [list(e) for e in spec.edges],
        "dists": {n: d.to_doc() for n, d in spec.dists.items()},
        "click_cost": spec.click_cost,
        "click_budget": spec.click_budget,
        "labels": dict(spec.labels),
        "farsighted": sorted(spec.farsighted),
        "forced": None
        if spec.forced is None
        else {"nodes": list(spec.forced.nodes), "value": spec.forced.value},
        "coords": {n: list(c) for n, c in spec.coords.items()},
        "period_weights": None if spec.period_weights is None else list(spec.period_weights),
    }


def spec_from_doc(doc: Mapping[str, Any]) -> EnvSpec:
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise EnvError(f"unsupported format_version: {version!r}")
    forced = None
    if doc.get("forced") is not None:
        forced = ForcedValue(tuple(doc["forced"]["nodes"]), float(doc["forced"]["value"]))
    return EnvSpec(
        name=doc["name"],
        kind=doc.get("kind", "mouselab"),
        start=doc["start"],
        nodes=tuple(doc["nodes"]),
        edges=tuple((a, b) for a, b in doc["edges"]),
        dists={n: dist_from_doc(d) for n, d in doc["dists"].items()},
        click_cost=float(doc.get("click_cost", 0.0)),
        click_budget=doc.get("click_budget"),
        labels=dict(doc.get("labels", {})),
        farsighted=frozenset(doc.get("farsighted", ())),
        forced=forced,
        coords={n: (float(c[0]), float(c[1])) for n, c in doc.get("coords", {}).items()},
        period_weights=None
        if doc.get("period_weights") is None
        else tuple(float(w) for w in doc["period_weights"]),
    )


def load_spec(path: str | Path) -> EnvSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return spec_from_doc(json.load(fh))


def save_spec(path: str | Path, spec: EnvSpec) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spec_to_doc(spec), fh, indent=2)
        fh.write("\n")
