"""Exact propagation of compatible observations on transporter chain event graphs."""

from .ceg import (
    CegEdge,
    TransporterCeg,
    enumerate_paths,
    export_dot,
    reach_probability,
    topological_edge_order,
    validate_ceg,
)
from .observation import (
    CompatibleObservation,
    Incompatible,
    check_compatibility,
    from_edge_sets,
    from_edge_union,
    paths_of,
)
from .positions import build_transporter_ceg, compute_positions, minimize_ceg
from .propagation import (
    PropagationResult,
    conditional_atom_probability,
    conditional_reach_probability,
    propagate,
    reduce,
)
from .tree import ProbabilityTree, TreeEdge, atom_probability, enumerate_atoms, validate_tree

__all__ = [
    "CegEdge", "TransporterCeg", "enumerate_paths", "export_dot", "reach_probability",
    "topological_edge_order", "validate_ceg", "CompatibleObservation", "Incompatible",
    "check_compatibility", "from_edge_sets", "from_edge_union", "paths_of",
    "build_transporter_ceg", "compute_positions", "minimize_ceg", "PropagationResult",
    "conditional_atom_probability", "conditional_reach_probability", "propagate", "reduce",
    "ProbabilityTree", "TreeEdge", "atom_probability", "enumerate_atoms", "validate_tree",
]
