"""Triplet loop-consistency analysis.

A triplet (i, j, k) is consistent when the measured R_ij agrees with the
composed path R_ik @ R_kj; the gap is scored with the chordal distance, so it
lives in [0, 2*sqrt(2)].  Support counts and the sampled-error statistics here
drive both the spanning-tree initializer and the edge filter.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigError
from .graph import ViewGraph
from .so3 import quat_conj, quat_mul

#: Upper bound of the chordal distance between rotations.
MAX_CHORDAL = 2.0 * math.sqrt(2.0)

# Fallback thresholds when too few sampled errors are available, and the
# nudge used to keep picked thresholds strictly ascending.
_MIN_POOL = 30
_ASCEND_DELTA = 1e-6


def _chordal_of_rel(rel: np.ndarray) -> np.ndarray:
    s = np.minimum(np.linalg.norm(rel[..., 1:], axis=-1), 1.0)
    return MAX_CHORDAL * s


def loop_error(g: ViewGraph, i: int, j: int, k: int) -> float:
    """Chordal gap between R_ij and the path R_ik @ R_kj.

    Symmetric under permutations of (i, j, k) up to floating-point noise,
    because the underlying loop rotation is conjugated, not changed.
    """
    q_direct = g.rel_quat(i, j)
    q_path = quat_mul(g.rel_quat(i, k), g.rel_quat(k, j))
    return float(_chordal_of_rel(quat_mul(q_direct, quat_conj(q_path))))


def loop_errors(g: ViewGraph, i: int, j: int, ks: np.ndarray) -> np.ndarray:
    """Loop errors of (i, j, k) for every k in ks, batched."""
    ks = np.asarray(ks, dtype=np.int64)
    if ks.size == 0:
        return np.empty(0)
    ii = np.full(ks.shape, i, dtype=np.int64)
    jj = np.full(ks.shape, j, dtype=np.int64)
    q_direct = g.rel_quats(ii, jj)
    q_path = quat_mul(g.rel_quats(ii, ks), g.rel_quats(ks, jj))
    return _chordal_of_rel(quat_mul(q_direct, quat_conj(q_path)))


def count_triplet_supports(g: ViewGraph, base: int, cand: int, eps: float) -> int:
    """Number of common neighbors k whose triplet (base, cand, k) closes within eps.

    Every common neighbor counts, whatever its family status: only the three
    relative measurements enter the test.
    """
    ks = g.common_neighbors(base, cand)
    if ks.size == 0:
        return 0
    return int(np.count_nonzero(loop_errors(g, base, cand, ks) < eps))


def support_counts(g: ViewGraph, base: int, cands, eps: float) -> np.ndarray:
    """count_triplet_supports for several candidates at once."""
    return np.array([count_triplet_supports(g, base, int(c), eps)
                     for c in cands], dtype=np.int64)


@dataclass(frozen=True)
class LoopErrorSample:
    """Sampled loop errors, per edge and pooled.

    per_edge is aligned with g.edges; pooled keeps only errors below 1 (the
    informative range for threshold picking) and is sorted ascending.
    """

    per_edge: list[np.ndarray]
    pooled: np.ndarray
    n_sampled: int

    def all_errors(self) -> np.ndarray:
        if not self.per_edge:
            return np.empty(0)
        return np.concatenate(self.per_edge)


def sample_loop_errors(g: ViewGraph, max_per_edge: int = 10,
                       rng: np.random.Generator | None = None) -> LoopErrorSample:
    """Sample up to max_per_edge triplets per edge and collect their errors.

    Common neighbors are taken smallest-id-first for determinism; pass a
    seeded rng to sample them randomly instead.
    """
    if max_per_edge < 1:
        raise InvalidConfigError(f"max_per_edge must be >= 1, got {max_per_edge}")
    ii: list[np.ndarray] = []
    jj: list[np.ndarray] = []
    kk: list[np.ndarray] = []
    sizes = np.zeros(g.n_edges, dtype=np.int64)
    for e, ed in enumerate(g.edges):
        ks = g.common_neighbors(ed.i, ed.j)
        if ks.size > max_per_edge:
            if rng is None:
                ks = ks[:max_per_edge]
            else:
                ks = np.sort(rng.choice(ks, size=max_per_edge, replace=False))
        sizes[e] = ks.size
        if ks.size:
            ii.append(np.full(ks.size, ed.i, dtype=np.int64))
            jj.append(np.full(ks.size, ed.j, dtype=np.int64))
            kk.append(ks)
    if sizes.sum() == 0:
        return LoopErrorSample([np.empty(0)] * g.n_edges, np.empty(0), 0)
    ai = np.concatenate(ii)
    aj = np.concatenate(jj)
    ak = np.concatenate(kk)
    q_direct = g.rel_quats(ai, aj)
    q_path = quat_mul(g.rel_quats(ai, ak), g.rel_quats(ak, aj))
    errors = _chordal_of_rel(quat_mul(q_direct, quat_conj(q_path)))
    per_edge: list[np.ndarray] = []
    offset = 0
    for e in range(g.n_edges):
        per_edge.append(errors[offset:offset + sizes[e]])
        offset += int(sizes[e])
    pooled = np.sort(errors[errors < 1.0])
    return LoopErrorSample(per_edge, pooled, int(errors.size))


def median_loop_error(sample: LoopErrorSample) -> float:
    """Median over every sampled error (not only those below 1); inf if none."""
    if sample.n_sampled == 0:
        return math.inf
    return float(np.median(sample.all_errors()))


@dataclass(frozen=True)
class LoopThresholds:
    """Strictly ascending consistency thresholds eps_1 < ... < eps_m."""

    values: tuple[float, ...]

    def __post_init__(self):
        if not self.values:
            raise InvalidConfigError("at least one loop threshold is required")
        for v in self.values:
            if not (0.0 < v < MAX_CHORDAL) or not math.isfinite(v):
                raise InvalidConfigError(
                    f"loop threshold {v} outside (0, {MAX_CHORDAL:.6f})")
        for a, b in zip(self.values, self.values[1:]):
            if b <= a:
                raise InvalidConfigError(
                    f"loop thresholds must ascend strictly, got {self.values}")

    @property
    def m(self) -> int:
        return len(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, k: int) -> float:
        return self.values[k]


def pick_thresholds(sample: LoopErrorSample, m: int = 3) -> LoopThresholds:
    """Choose eps_1..eps_m as the 10m-th nearest-rank percentiles of the pool.

    The pool is the sampled errors below 1.  With fewer than 30 pooled errors
    the fixed ladder 0.05, 0.10, ... is used instead.  Equal picks are nudged
    by 1e-6 to keep the ladder strictly ascending.
    """
    if not (1 <= m <= 10):
        raise InvalidConfigError(f"threshold count m must be in [1, 10], got {m}")
    pool = sample.pooled
    if pool.size < _MIN_POOL:
        # k/20 rather than k*0.05: the scaled form drifts off the documented
        # ladder values by an ulp.
        eps = [(k + 1) / 20.0 for k in range(m)]
    else:
        eps = []
        for k in range(1, m + 1):
            rank = math.ceil(k * 10 / 100.0 * pool.size)
            eps.append(float(pool[max(rank, 1) - 1]))
    for k in range(1, m):
        if eps[k] <= eps[k - 1]:
            eps[k] = eps[k - 1] + _ASCEND_DELTA
    return LoopThresholds(tuple(eps))


class SnTable:
    """Per-node cache of supported-neighbor counts.

    counts[x, y, z-1] holds, as of the last refresh of row x, how many
    non-family neighbors of x had at least z triplet supports under eps_y.
    Rows of nodes other than the current base may be stale; staleness is
    one-sided (only ever an overcount) because nodes can only leave the
    candidate pool by joining the family.
    """

    def __init__(self, n: int, m: int, s_init: int):
        if s_init < 1:
            raise InvalidConfigError(f"s_init must be >= 1, got {s_init}")
        self.counts = np.zeros((n, m, s_init), dtype=np.int64)

    @property
    def s_init(self) -> int:
        return self.counts.shape[2]

    def reset(self) -> None:
        self.counts.fill(0)


def update_sn_table(table: SnTable, g: ViewGraph, base: int,
                    in_family: np.ndarray, eps: LoopThresholds) -> None:
    """Recompute row `base` of the table from the current family membership.

    in_family is a boolean mask over node ids.  The row covers every
    (threshold, support-level) pair at once so later lookups at any (y, z)
    are just reads.
    """
    m = len(eps)
    s_init = table.s_init
    row = np.zeros((m, s_init), dtype=np.int64)
    eps_arr = np.array(list(eps))
    for cand in g.neighbors(base):
        if in_family[cand]:
            continue
        ks = g.common_neighbors(base, int(cand))
        if ks.size == 0:
            continue
        errs = loop_errors(g, base, int(cand), ks)
        # supports under each threshold, then one tally per support level
        sup = np.count_nonzero(errs[None, :] < eps_arr[:, None], axis=1)
        levels = np.arange(1, s_init + 1)
        row += (sup[:, None] >= levels[None, :]).astype(np.int64)
    table.counts[base] = row
