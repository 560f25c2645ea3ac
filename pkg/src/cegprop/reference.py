"""The medical treatment-regime model used throughout as a worked example.

Eleven situations and sixteen leaves. The three ``v4`` copies, the two ``v5``
copies and the two ``v6`` copies have identical subtrees, so the CEG has
seven positions ``w0..w6`` plus the sink and sixteen edges ``e1..e16``.
"""

from __future__ import annotations

from .ceg import TransporterCeg
from .observation import CompatibleObservation, from_edge_union
from .tree import ProbabilityTree, TreeEdge

DESCRIPTORS = {
    "e1": "Not critical - Treatment prescribed I",
    "e2": "Liver failure - Treatment II",
    "e3": "Liver & Kidney failure - Treatment II",
    "e4": "Responds to I - Full recovery",
    "e5": "No response to I - Surgery prescribed III",
    "e6": "Responds to II - Surgery III",
    "e7": "No response to II - Surgery IV",
    "e8": "Responds to II - Surgery III",
    "e9": "No response to II - Surgery IV",
    "e10": "Recovery - Lifetime monitoring",
    "e11": "Recovery - Lifetime medication",
    "e12": "Death in surgery",
    "e13": "Death in surgery",
    "e14": "Survives surgery IV - Treatment V",
    "e15": "Recovery - Lifetime on treatment V",
    "e16": "No response to V - Dies",
}

# Outgoing probabilities per position, in edge order.
REFERENCE_PI = {
    "w0": (0.5, 0.3, 0.2),
    "w1": (0.6, 0.4),
    "w2": (0.7, 0.3),
    "w3": (0.5, 0.5),
    "w4": (0.5, 0.3, 0.2),
    "w5": (0.25, 0.75),
    "w6": (0.8, 0.2),
}

# Not diagnosed with liver and kidney failure, and still alive.
EXAMPLE2_EDGES = ("e1", "e2", "e4", "e5", "e6", "e7", "e10", "e11", "e14", "e15")

# Junction-tree figures quoted for the equivalent four-variable BN. They are
# documentation only; no BN is built here.
REPORTED_BN_OPERATIONS = 43
REPORTED_BN_CELLS = 27
REPORTED_CEG_OPERATIONS = 32


def example1_tree(pi: dict[str, tuple[float, ...]] = REFERENCE_PI) -> ProbabilityTree:
    edges: list[TreeEdge] = []
    leaf_count = 0

    def leaf() -> str:
        nonlocal leaf_count
        leaf_count += 1
        return f"l{leaf_count}"

    def add(eid: str, src: str, dst: str, p: float) -> None:
        base = eid.split("_")[0]
        edges.append(TreeEdge(eid, src, dst, p, DESCRIPTORS[base]))

    def v4(name: str, tag: str) -> None:
        for eid, p in zip(("e10", "e11", "e12"), pi["w4"]):
            add(eid + tag, name, leaf(), p)

    def v6(name: str, tag: str) -> None:
        for eid, p in zip(("e15", "e16"), pi["w6"]):
            add(eid + tag, name, leaf(), p)

    for eid, child, p in zip(("e1", "e2", "e3"), ("v1", "v2", "v3"), pi["w0"]):
        add(eid, "v0", child, p)
    add("e4", "v1", leaf(), pi["w1"][0])
    add("e5", "v1", "v4_1", pi["w1"][1])
    add("e6", "v2", "v4_2", pi["w2"][0])
    add("e7", "v2", "v5_1", pi["w2"][1])
    add("e8", "v3", "v4_3", pi["w3"][0])
    add("e9", "v3", "v5_2", pi["w3"][1])
    v4("v4_1", "")
    v4("v4_2", "_2")
    v4("v4_3", "_3")
    add("e13", "v5_1", leaf(), pi["w5"][0])
    add("e14", "v5_1", "v6_1", pi["w5"][1])
    add("e13_2", "v5_2", leaf(), pi["w5"][0])
    add("e14_2", "v5_2", "v6_2", pi["w5"][1])
    v6("v6_1", "")
    v6("v6_2", "_2")

    situations = ["v0", "v1", "v2", "v3", "v4_1", "v4_2", "v4_3",
                  "v5_1", "v5_2", "v6_1", "v6_2"]
    targets = [e.target for e in edges]
    leaves = [t for t in targets if t.startswith("l")]
    return ProbabilityTree(tuple(situations + leaves), tuple(edges), name="example1")


def example2_observation(ceg: TransporterCeg) -> CompatibleObservation:
    return from_edge_union(ceg, EXAMPLE2_EDGES)
