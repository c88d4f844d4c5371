"""Robust rotation averaging on view graphs.

Absolute rotations are recovered from noisy, outlier-ridden pairwise
measurements in three stages: a hierarchical spanning-tree initialization
gated by triplet loop consistency, residual-based edge filtering, and
iteratively reweighted least-squares refinement.
"""

from .averaging import (SraConfig, chordal_l2_mean, geodesic_l1_mean,
                        geodesic_l2_mean)
from .errors import (ComponentExhausted, DuplicateEdgeError, GraphError,
                     InvalidConfigError, InvalidEdgeError, InvalidNodeError,
                     MissingEdgeError, NoOverlapError, NumericalError,
                     ParseError, RotavgError)
from .filtering import FilterConfig, FilterResult, apply_filter, filter_edges
from .graph import RelEdge, ViewGraph, build
from .initializer import (InitConfig, InitResult, TraceEvent, add_by_vote,
                          init_full, init_simplified, initialize, make_state)
from .io import (load_graph, load_labels, load_rotations, save_graph,
                 save_labels, save_rotations)
from .metrics import MetricsResult, evaluate
from .pipeline import (PipelineConfig, SolveReport, SweepSpec, solve, sweep,
                       write_csv)
from .refinement import RefineConfig, RefineResult, edge_residual, refine
from .so3 import (Rotation, angular_distance, bch_residual, chordal_distance,
                  exp, log, random_rotation, random_rotations)
from .synthetic import SynthConfig, SynthDataset, generate
from .triplets import (LoopErrorSample, LoopThresholds, SnTable,
                       count_triplet_supports, loop_error, median_loop_error,
                       pick_thresholds, sample_loop_errors, update_sn_table)

__version__ = "0.1.0"

__all__ = [
    "ComponentExhausted", "DuplicateEdgeError", "FilterConfig", "FilterResult",
    "GraphError", "InitConfig", "InitResult", "InvalidConfigError",
    "InvalidEdgeError", "InvalidNodeError", "LoopErrorSample", "LoopThresholds",
    "MetricsResult", "MissingEdgeError", "NoOverlapError", "NumericalError",
    "ParseError", "PipelineConfig", "RefineConfig", "RefineResult", "RelEdge",
    "Rotation", "RotavgError", "SnTable", "SolveReport", "SraConfig",
    "SweepSpec", "SynthConfig", "SynthDataset", "TraceEvent", "ViewGraph",
    "add_by_vote", "angular_distance", "apply_filter", "bch_residual", "build",
    "chordal_distance", "chordal_l2_mean", "count_triplet_supports",
    "edge_residual", "evaluate", "exp", "filter_edges", "generate",
    "geodesic_l1_mean", "geodesic_l2_mean", "init_full", "init_simplified",
    "initialize", "load_graph", "load_labels", "load_rotations", "log",
    "loop_error", "make_state", "median_loop_error", "pick_thresholds",
    "random_rotation", "random_rotations", "refine", "sample_loop_errors",
    "save_graph", "save_labels", "save_rotations", "solve", "sweep",
    "update_sn_table", "write_csv",
]
