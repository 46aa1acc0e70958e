"""Acyclic-coloring laboratory.

Gadget constructions for acyclic-coloring hardness under girth and degree
constraints, the corresponding NP-hardness reduction pipelines, exact
desk-scale oracles serving as ground truth, and the deterministic
three-phase recovery of planted acyclic colorings in random tournaments.
"""

from .graphs import (
    Coloring,
    DegreeStats,
    Digraph,
    Graph,
    InvariantError,
    MalformedCertificateError,
    Tournament,
    degree_stats,
    directed_girth,
    girth,
    is_transitive,
    is_valid_acyclic_coloring,
)
from .instance_io import InstanceFile, ParseError, read_instance, write_instance
from .nae import NaeInstance
from .oracle import (
    DecisionResult,
    OracleBudget,
    decide_acyclic_colorable,
    decide_proper_colorable,
    dichromatic_number,
    make_edge_critical,
    max_transitive_subtournament,
    solve_nae,
    vertex_arboricity,
)

__all__ = [
    "Coloring",
    "DegreeStats",
    "DecisionResult",
    "Digraph",
    "Graph",
    "InstanceFile",
    "InvariantError",
    "MalformedCertificateError",
    "NaeInstance",
    "OracleBudget",
    "ParseError",
    "Tournament",
    "decide_acyclic_colorable",
    "decide_proper_colorable",
    "degree_stats",
    "dichromatic_number",
    "directed_girth",
    "girth",
    "is_transitive",
    "is_valid_acyclic_coloring",
    "make_edge_critical",
    "max_transitive_subtournament",
    "read_instance",
    "solve_nae",
    "vertex_arboricity",
    "write_instance",
]
