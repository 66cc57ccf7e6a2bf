"""Distributed-style dual-graph algorithms for embedded planar graphs.

The package simulates message-passing rounds on a planar network and uses
them to compute on its dual: minimum-weight cycles, exact and approximate
s-t flows and cuts, dual distance labels and directed global minimum cuts.
"""

from .bdd import BddTree, build_bdd
from .congest_sim import RoundLedger
from .dual_labeling import LabelSet, compute_labels, sssp_tree_dual
from .flow_cut import (
    max_st_flow_exact,
    max_st_flow_stplanar_approx,
    min_st_cut_exact,
    min_st_cut_stplanar_approx,
    weighted_girth,
)
from .global_mincut import directed_global_min_cut
from .planar_core import EmbeddedPlanarGraph, build_embedded_graph, trace_faces

__version__ = "0.1.0"

__all__ = [
    "BddTree",
    "EmbeddedPlanarGraph",
    "LabelSet",
    "RoundLedger",
    "build_bdd",
    "build_embedded_graph",
    "compute_labels",
    "directed_global_min_cut",
    "max_st_flow_exact",
    "max_st_flow_stplanar_approx",
    "min_st_cut_exact",
    "min_st_cut_stplanar_approx",
    "sssp_tree_dual",
    "trace_faces",
    "weighted_girth",
]
