"""Brute-force conditioning, random instances and benchmark families.

Everything here enumerates paths explicitly and never calls into the
propagation module, so it can serve as an independent check on it.
"""

from __future__ import annotations

import itertools
import json
import math
import random
import time
from dataclasses import asdict, dataclass, field

from .ceg import TransporterCeg, count_paths
from .errors import InstanceTooLargeError
from .observation import CompatibleObservation
from .positions import build_transporter_ceg
from .tree import ProbabilityTree, TreeEdge

DEFAULT_PATH_CAP = 10**6


@dataclass(frozen=True)
class OracleResult:
    event_probability: float
    atom_conditionals: dict[tuple[str, ...], float]
    edge_conditionals: dict[str, float]
    position_conditionals: dict[str, float]
    reached: dict[str, bool]
    downstream_conditionals: dict[str, float]
    downstream_mass: dict[str, float]

    @property
    def zero_probability(self) -> bool:
        return self.event_probability == 0


def _all_paths(ceg: TransporterCeg, cap: int):
    out_edges: dict[str, list] = {}
    for e in ceg.edges:
        out_edges.setdefault(e.source, []).append(e)
    paths = []

    def walk(w, edges, prob):
        if w == ceg.sink:
            paths.append((tuple(edges), prob))
            if len(paths) > cap:
                raise InstanceTooLargeError(f"more than {cap} paths")
            return
        for e in out_edges.get(w, ()):
            walk(e.target, edges + [e], prob * e.prob)

    walk(ceg.root, [], 1.0)
    return paths


def brute_force_condition(
    ceg: TransporterCeg, obs: CompatibleObservation, cap: int = DEFAULT_PATH_CAP
) -> OracleResult:
    """Condition on ``obs`` by enumerating every root-to-sink path.

    Edge conditionals are P(path uses e | event, path passes source(e));
    position conditionals are P(path passes w | event). Both are 0 where the
    conditioning event is null, and ``reached`` says where it is not.

    Downstream quantities enumerate the subpaths from each position to the
    sink: ``downstream_mass[w]`` is the probability of staying inside the
    event from w onward and ``downstream_conditionals[e]`` the share of it
    that leaves through e. These stay defined at positions the event never
    passes through.
    """
    allowed = obs.union
    paths = _all_paths(ceg, cap)
    inside = [(edges, p) for edges, p in paths if all(e.id in allowed for e in edges)]
    total = math.fsum(p for _, p in inside)

    via_edge: dict[str, list[float]] = {e.id: [] for e in ceg.edges}
    via_pos: dict[str, list[float]] = {w: [] for w in ceg.positions}
    for edges, p in inside:
        via_pos[ceg.root].append(p)
        for e in edges:
            via_edge[e.id].append(p)
            via_pos[e.target].append(p)
    pos_mass = {w: math.fsum(ps) for w, ps in via_pos.items()}

    edge_cond = {}
    for e in ceg.edges:
        denom = pos_mass[e.source]
        edge_cond[e.id] = math.fsum(via_edge[e.id]) / denom if denom > 0 else 0.0
    atoms = {
        tuple(e.id for e in edges): (p / total if total > 0 and _in(edges, allowed) else 0.0)
        for edges, p in paths
    }
    pos_cond = {w: (m / total if total > 0 else 0.0) for w, m in pos_mass.items()}
    reached = {w: m > 0 for w, m in pos_mass.items()}
    down_mass, down_cond = _downstream(ceg, allowed, cap)
    return OracleResult(total, atoms, edge_cond, pos_cond, reached, down_cond, down_mass)


def _downstream(ceg: TransporterCeg, allowed, cap: int):
    out_edges: dict[str, list] = {}
    for e in ceg.edges:
        out_edges.setdefault(e.source, []).append(e)
    via_edge: dict[str, list[float]] = {e.id: [] for e in ceg.edges}
    mass: dict[str, float] = {ceg.sink: 1.0}
    count = 0
    for w in ceg.positions:
        if w == ceg.sink:
            continue
        found: list[float] = []

        def walk(node, first, prob):
            nonlocal count
            if node == ceg.sink:
                found.append(prob)
                via_edge[first].append(prob)
                count += 1
                if count > cap:
                    raise InstanceTooLargeError(f"more than {cap} subpaths")
                return
            for e in out_edges.get(node, ()):
                if e.id in allowed:
                    walk(e.target, first or e.id, prob * e.prob)

        walk(w, None, 1.0)
        mass[w] = math.fsum(found)
    cond = {}
    for e in ceg.edges:
        denom = mass[e.source]
        cond[e.id] = math.fsum(via_edge[e.id]) / denom if denom > 0 else 0.0
    return mass, cond


def _in(edges, allowed) -> bool:
    return all(e.id in allowed for e in edges)


def tree_condition(
    tree: ProbabilityTree, ceg: TransporterCeg, obs: CompatibleObservation
) -> dict[str, float | None]:
    """Condition on the tree itself and report, per tree edge, P(edge | event, reach source).

    The observation is pulled back to the tree through ``ceg.tree_edges``.
    Edges whose source vertex has no mass inside the event map to ``None``.
    """
    if ceg.tree_edges is None:
        raise ValueError("CEG carries no tree edge correspondence")
    allowed = {t for t, c in ceg.tree_edges.items() if c in obs.union}
    mass_edge: dict[str, list[float]] = {e.id: [] for e in tree.edges}
    mass_vertex: dict[str, list[float]] = {v: [] for v in tree.vertices}

    def walk(v, used, prob):
        out = tree.children[v]
        if not out:
            if all(e.id in allowed for e in used):
                mass_vertex[tree.root].append(prob)
                for e in used:
                    mass_edge[e.id].append(prob)
                    mass_vertex[e.target].append(prob)
            return
        for e in out:
            walk(e.target, used + [e], prob * e.prob)

    walk(tree.root, [], 1.0)
    result: dict[str, float | None] = {}
    for e in tree.edges:
        denom = math.fsum(mass_vertex[e.source])
        result[e.id] = math.fsum(mass_edge[e.id]) / denom if denom > 0 else None
    return result


# ---------------------------------------------------------------- generators

DYADIC_BITS = 20


def _dyadic_simplex(rng: random.Random, k: int) -> list[float]:
    """k positive probabilities on a 2**-20 grid summing exactly to 1."""
    scale = 1 << DYADIC_BITS
    cuts = sorted(rng.sample(range(1, scale), k - 1))
    bounds = [0] + cuts + [scale]
    return [(b - a) / scale for a, b in zip(bounds, bounds[1:])]


@dataclass(frozen=True)
class TreeParams:
    max_depth: int = 4
    max_branch: int = 3
    merge_bias: float = 0.0
    leaf_prob: float = 0.3

    def check(self) -> None:
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.max_branch < 2:
            raise ValueError("max_branch must be >= 2")
        if not 0.0 <= self.merge_bias <= 1.0:
            raise ValueError("merge_bias must be in [0, 1]")
        if not 0.0 <= self.leaf_prob < 1.0:
            raise ValueError("leaf_prob must be in [0, 1)")


def random_tree(seed: int, params: TreeParams | None = None, **kwargs) -> ProbabilityTree:
    """A random probability tree, deterministic in ``seed``.

    Subtrees are drawn as nested ``(prob, child)`` specs. With probability
    ``merge_bias`` a new situation reuses an already drawn subtree that fits
    the remaining depth, which plants identical subtrees and so forces
    position merges. Probabilities are dyadic so every situation's
    outgoing probabilities sum to exactly 1.0 in floating point.
    """
    params = params or TreeParams(**kwargs)
    params.check()
    rng = random.Random(seed)
    pool: list[tuple[int, tuple]] = []

    def draw(depth_left: int, force_situation: bool = False):
        if depth_left == 0 or (not force_situation and rng.random() < params.leaf_prob):
            return None
        fitting = [spec for h, spec in pool if h <= depth_left]
        if fitting and rng.random() < params.merge_bias:
            return rng.choice(fitting)
        k = rng.randint(2, params.max_branch)
        probs = _dyadic_simplex(rng, k)
        spec = tuple((p, draw(depth_left - 1)) for p in probs)
        pool.append((_height(spec), spec))
        return spec

    root = draw(params.max_depth, force_situation=True)
    return _materialise(root, name=f"random-{seed}")


def _height(spec) -> int:
    if spec is None:
        return 0
    return 1 + max(_height(child) for _, child in spec)


def _materialise(spec, name: str | None = None) -> ProbabilityTree:
    vertices: list[str] = []
    edges: list[tuple[str, str, float]] = []
    counter = itertools.count()

    def add(spec) -> str:
        v = f"v{next(counter)}"
        vertices.append(v)
        for p, child in spec or ():
            edges.append((v, add(child), p))
        return v

    add(spec)
    order = {v: i for i, v in enumerate(vertices)}
    edges.sort(key=lambda e: (order[e[0]], order[e[1]]))
    return ProbabilityTree(
        tuple(vertices),
        tuple(TreeEdge(f"t{i}", s, t, p) for i, (s, t, p) in enumerate(edges)),
        name=name,
    )


def random_observation(
    ceg: TransporterCeg, seed: int, keep_prob: float = 0.7, max_tries: int = 1000
) -> CompatibleObservation:
    """Random per-position edge subsets with positive event probability.

    Subsets are drawn independently per position, which makes the result
    compatible by construction; draws whose event is null are rejected.
    """
    rng = random.Random(seed)
    for _ in range(max_tries):
        sets = {
            w: frozenset(e.id for e in ceg.out_edges[w] if rng.random() < keep_prob)
            for w in ceg.situations
        }
        obs = CompatibleObservation(sets)
        if _event_mass(ceg, obs.union) > 0:
            return obs
    raise RuntimeError("could not draw an observation of positive probability")


def _event_mass(ceg: TransporterCeg, allowed) -> float:
    return math.fsum(
        p for edges, p in _all_paths(ceg, DEFAULT_PATH_CAP) if _in(edges, allowed)
    )


# ---------------------------------------------------------------- model selection

def selection_state_count(n: int) -> int:
    """Number of states of the selector variable, (n - 1)(n - 2) / 2."""
    return (n - 1) * (n - 2) // 2


def model_selection_tree(n: int, seed: int = 0) -> ProbabilityTree:
    """Tree for the pair-selection model over X1..Xn.

    X1 picks one of the pairs (i, j), i < j, from the binaries X2..Xn. Under
    state (i, j) the tree unfolds X_i, then X_j given X_i, then the remaining
    binaries in index order. Every binary other than the chosen X_j has the
    same marginal in every context. Probabilities are dyadic and drawn from
    ``seed``.
    """
    if n < 3:
        raise ValueError("model selection needs n >= 3")
    rng = random.Random(seed)
    binaries = list(range(2, n + 1))
    pairs = list(itertools.combinations(binaries, 2))
    assert len(pairs) == selection_state_count(n)
    marginal = {k: _dyadic_simplex(rng, 2) for k in binaries}
    dependent = {pair: (_dyadic_simplex(rng, 2), _dyadic_simplex(rng, 2)) for pair in pairs}
    root_probs = _dyadic_simplex(rng, len(pairs)) if len(pairs) > 1 else [1.0]

    def chain(order, probs_for):
        """Nested tuple tree unfolding ``order``; probs_for(k, history) gives the row."""
        def build(idx, history):
            if idx == len(order):
                return None
            k = order[idx]
            return tuple(
                (p, build(idx + 1, history + (x,)))
                for x, p in enumerate(probs_for(k, history))
            )
        return build(0, ())

    root_spec = []
    for (i, j), p in zip(pairs, root_probs):
        order = [i, j] + [k for k in binaries if k not in (i, j)]

        def probs_for(k, history, i=i, j=j):
            if k == j:
                return dependent[(i, j)][history[0]]
            return marginal[k]

        root_spec.append((p, chain(order, probs_for)))
    return _materialise(tuple(root_spec), name=f"model-selection-{n}")


def model_selection_ceg(n: int, seed: int = 0) -> TransporterCeg:
    return build_transporter_ceg(model_selection_tree(n, seed))


def model_selection_bounds(n: int) -> tuple[int, int]:
    """(edge bound, position bound) for the pair-selection CEG."""
    m = selection_state_count(n)
    return m * (1 + 2 * n), 2 + m * n


# ---------------------------------------------------------------- bench

@dataclass
class BenchReport:
    name: str
    positions: int
    edges: int
    paths: int
    storage_cells: int
    edge_cells: int
    event_probability: float
    backward_edge_ops: int
    backward_vertex_ops: int
    forward_edge_ops: int
    total_ops: int
    wall_time_s: float = field(compare=False)
    reported: dict | None = None
    checks: dict[str, bool] = field(default_factory=dict)

    def to_json(self, include_time: bool = True) -> str:
        data = asdict(self)
        if not include_time:
            data.pop("wall_time_s")
        return json.dumps(data, indent=2)

    def to_text(self) -> str:
        lines = [
            f"model: {self.name}",
            f"positions: {self.positions} (incl. sink), edges: {self.edges}, paths: {self.paths}",
            f"storage cells: {self.storage_cells} (edge cells: {self.edge_cells})",
            f"event probability: {self.event_probability:.12g}",
            f"operations: {self.total_ops} ({self.backward_edge_ops} backward edges, "
            f"{self.backward_vertex_ops} backward vertices, {self.forward_edge_ops} forward edges)",
            f"wall time: {self.wall_time_s * 1e3:.3f} ms",
        ]
        if self.reported:
            lines.append("reported, not recomputed:")
            lines.extend(f"  {k}: {v}" for k, v in self.reported.items())
        for check, ok in self.checks.items():
            lines.append(f"{'PASS' if ok else 'FAIL'} {check}")
        return "\n".join(lines)


def bench_report(
    ceg: TransporterCeg,
    obs: CompatibleObservation,
    name: str | None = None,
    reported: dict | None = None,
    checks: dict[str, bool] | None = None,
) -> BenchReport:
    from .propagation import propagate

    start = time.perf_counter()
    result = propagate(ceg, obs)
    elapsed = time.perf_counter() - start
    c = result.counters
    return BenchReport(
        name=name or ceg.name or "ceg",
        positions=len(ceg.positions),
        edges=len(ceg.edges),
        paths=count_paths(ceg),
        storage_cells=len(ceg.situations) + len(ceg.edges),
        edge_cells=len(ceg.edges),
        event_probability=result.event_probability,
        backward_edge_ops=c.backward_edge_ops,
        backward_vertex_ops=c.backward_vertex_ops,
        forward_edge_ops=c.forward_edge_ops,
        total_ops=c.total,
        wall_time_s=elapsed,
        reported=reported,
        checks=checks or {},
    )


def example1_bench() -> BenchReport:
    from . import reference

    ceg = build_transporter_ceg(reference.example1_tree())
    obs = reference.example2_observation(ceg)
    return bench_report(
        ceg, obs, "example1",
        reported={
            "bn_junction_tree_operations": reference.REPORTED_BN_OPERATIONS,
            "bn_storage_cells": reference.REPORTED_BN_CELLS,
            "ceg_operations": reference.REPORTED_CEG_OPERATIONS,
        },
    )


def model_selection_bench(n: int, seed: int = 0) -> BenchReport:
    from .observation import vacuous

    ceg = model_selection_ceg(n, seed)
    edge_bound, pos_bound = model_selection_bounds(n)
    m = selection_state_count(n)
    checks = {
        f"edges {len(ceg.edges)} <= {edge_bound}": len(ceg.edges) <= edge_bound,
        f"positions {len(ceg.positions)} <= {pos_bound}": len(ceg.positions) <= pos_bound,
        f"paths == {m * 2 ** (n - 1)}": count_paths(ceg) == m * 2 ** (n - 1),
    }
    return bench_report(ceg, vacuous(ceg), f"model-selection-{n}", checks=checks)


def random_bench(seed: int, params: TreeParams | None = None) -> BenchReport:
    tree = random_tree(seed, params)
    ceg = build_transporter_ceg(tree)
    obs = random_observation(ceg, seed)
    return bench_report(ceg, obs, f"random-{seed}")

