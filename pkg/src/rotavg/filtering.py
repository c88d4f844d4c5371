"""Residual-based edge filtering between initialization and refinement.

Non-tree edges whose measured rotation disagrees with the initial estimates
by more than a chordal threshold are dropped.  Spanning-tree edges are always
kept.  When the graph is so contaminated that the median sampled loop error
exceeds a guard value, filtering is skipped entirely: the residuals of an
initialization built on such a graph are not trustworthy enough to delete
edges by.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigError
from .graph import ViewGraph
from .initializer import InitResult
from .so3 import quat_chordal, quat_conj, quat_mul
from .triplets import LoopErrorSample, median_loop_error


@dataclass(frozen=True)
class FilterConfig:
    tau: float = 1.0
    skip_median_threshold: float = 1.0

    def __post_init__(self):
        if not (self.tau > 0.0):
            raise InvalidConfigError("tau must be positive")
        if not (self.skip_median_threshold > 0.0):
            raise InvalidConfigError("skip_median_threshold must be positive")


@dataclass(frozen=True)
class FilterResult:
    """Outcome of one filtering pass over a graph's edge list."""

    kept: np.ndarray        # edge indices into g.edges, sorted
    removed: np.ndarray     # edge indices into g.edges, sorted
    residuals: np.ndarray   # chordal residual per edge, aligned with g.edges
    skipped: bool           # True when the median-loop-error guard fired
    median_error: float

    @property
    def n_removed(self) -> int:
        return int(self.removed.size)


def edge_residuals(g: ViewGraph, rotations: dict) -> np.ndarray:
    """Chordal distance between each measured edge and its predicted relative."""
    if g.n_edges == 0:
        return np.empty(0)
    quats = np.stack([rotations[i].quat for i in range(g.n)])
    pred = quat_mul(quats[g._ei], quat_conj(quats[g._ej]))
    return quat_chordal(g._quats, pred)


def filter_edges(g: ViewGraph, init: InitResult, sample: LoopErrorSample,
                 cfg: FilterConfig | None = None) -> FilterResult:
    cfg = cfg or FilterConfig()
    med = median_loop_error(sample)
    residuals = edge_residuals(g, init.rotations)
    all_idx = np.arange(g.n_edges)
    if med > cfg.skip_median_threshold:
        return FilterResult(all_idx, np.empty(0, dtype=np.int64), residuals,
                            True, med)
    tree = np.zeros(g.n_edges, dtype=bool)
    for a, b in init.tree_edges:
        tree[g.edge_index(a, b)] = True
    drop = (residuals > cfg.tau) & ~tree
    return FilterResult(all_idx[~drop], all_idx[drop], residuals, False, med)


def apply_filter(g: ViewGraph, result: FilterResult) -> ViewGraph:
    """Rebuild the graph keeping only the edges the filter retained."""
    if result.n_removed == 0:
        return g
    return g.with_edges([g.edges[int(k)] for k in result.kept])
