"""Slow reference checks that share no code with the package internals."""

from __future__ import annotations

import itertools
import math
import random

from cegprop.ceg import TransporterCeg
from cegprop.tree import ProbabilityTree


def subtrees_identical(tree: ProbabilityTree, u: str, v: str, match_labels=True) -> bool:
    """Recursive subtree comparison trying every matching of children."""
    cu, cv = tree.children[u], tree.children[v]
    if len(cu) != len(cv):
        return False
    if not cu:
        return True
    for perm in itertools.permutations(cv):
        if all(
            a.prob == b.prob
            and (not match_labels or (a.label or "") == (b.label or ""))
            and subtrees_identical(tree, a.target, b.target, match_labels)
            for a, b in zip(cu, perm)
        ):
            return True
    return False


def all_paths(ceg: TransporterCeg) -> list[tuple[str, ...]]:
    found = []

    def walk(w, acc):
        if w == ceg.sink:
            found.append(tuple(acc))
        for e in ceg.edges:
            if e.source == w:
                walk(e.target, acc + [e.id])

    walk(ceg.root, [])
    return found


def path_prob(ceg: TransporterCeg, path) -> float:
    by_id = {e.id: e for e in ceg.edges}
    return math.prod(by_id[eid].prob for eid in path)


def subpath_mass(ceg: TransporterCeg, w: str, probs=None) -> float:
    """Sum of root-to-w subpath products by enumerating prefixes of full paths."""
    by_id = {e.id: e for e in ceg.edges}
    prefixes = set()
    for path in all_paths(ceg):
        node = ceg.root
        if node == w:
            prefixes.add(())
        for i, eid in enumerate(path):
            node = by_id[eid].target
            if node == w:
                prefixes.add(path[: i + 1])
    p = probs or {eid: e.prob for eid, e in by_id.items()}
    return math.fsum(math.prod(p[eid] for eid in pre) for pre in prefixes)


def random_accommodation_order(ceg: TransporterCeg, rng: random.Random) -> list[str]:
    """A random children-first order of the non-sink positions."""
    done = {ceg.sink}
    order = []
    remaining = [w for w in ceg.positions if w != ceg.sink]
    while remaining:
        ready = [w for w in remaining
                 if all(e.target in done for e in ceg.edges if e.source == w)]
        w = rng.choice(ready)
        order.append(w)
        done.add(w)
        remaining.remove(w)
    return order


def suffix_mass(ceg: TransporterCeg, w: str, allowed) -> float:
    """Sum over w-to-sink subpaths inside ``allowed`` of their edge products."""
    if w == ceg.sink:
        return 1.0
    total = []

    def walk(node, prob):
        if node == ceg.sink:
            total.append(prob)
            return
        for e in ceg.edges:
            if e.source == node and e.id in allowed:
                walk(e.target, prob * e.prob)

    walk(w, 1.0)
    return math.fsum(total)
