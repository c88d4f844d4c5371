"""Seeded synthetic view-graph generator.

Topology: nodes on a cycle, edges added band by band (offset 1, then 2, ...)
until the target density is hit; the offset-1 band is the ring, including the
wrap-around edge, and is never corrupted so the graph stays connected by
inliers.  A fixed fraction of the remaining edges is replaced by uniformly
random rotations (outliers); every edge then gets angular noise.  Each edge
is labeled, so filtering precision/recall can be scored downstream.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigError
from .graph import ViewGraph, build
from .so3 import Rotation, quat_canonical, quat_conj, quat_mul, rotvec_quat

_AXIS_EPS = 1e-12


@dataclass(frozen=True)
class SynthConfig:
    """Problem-size and corruption knobs; everything is seed-deterministic."""

    n: int
    p: float = 0.3          # edge density relative to the complete graph
    q: float = 0.0          # outlier fraction among non-ring edges
    sigma_deg: float = 0.0  # per-edge noise magnitude stddev, degrees
    seed: int = 0
    isotropic_noise: bool = False

    def __post_init__(self):
        if self.n < 3:
            raise InvalidConfigError(f"n must be >= 3, got {self.n}")
        if not (0.0 < self.p <= 1.0):
            raise InvalidConfigError(f"p must be in (0, 1], got {self.p}")
        if not (0.0 <= self.q < 1.0):
            raise InvalidConfigError(f"q must be in [0, 1), got {self.q}")
        if self.sigma_deg < 0.0:
            raise InvalidConfigError(f"sigma_deg must be >= 0, got {self.sigma_deg}")
        if self.n_edges_target < self.n:
            raise InvalidConfigError(
                f"p={self.p} gives {self.n_edges_target} edges, fewer than the "
                f"{self.n} ring edges; raise p to at least {2.0 / (self.n - 1):.6g}")

    @property
    def n_edges_target(self) -> int:
        return int(self.p * (self.n * (self.n - 1) // 2))


@dataclass(frozen=True)
class SynthDataset:
    graph: ViewGraph
    labels: dict[tuple[int, int], bool]  # True marks an outlier edge
    config: SynthConfig

    def label_array(self) -> np.ndarray:
        """Outlier flags aligned with graph.edges."""
        return np.array([self.labels[(e.i, e.j)] for e in self.graph.edges],
                        dtype=bool)

    @property
    def n_outliers(self) -> int:
        return int(sum(self.labels.values()))


def _band_pairs(n: int, target: int) -> tuple[list[tuple[int, int]], int]:
    """Cycle-offset band construction; returns (pairs, ring band size)."""
    pairs: list[tuple[int, int]] = []
    for k in range(1, n // 2 + 1):
        span = n if 2 * k != n else n // 2
        for i in range(span):
            if len(pairs) == target:
                return pairs, n
            j = (i + k) % n
            pairs.append((min(i, j), max(i, j)))
    return pairs, n


def generate(cfg: SynthConfig) -> SynthDataset:
    """Build one synthetic dataset from the config's seed."""
    rng = np.random.default_rng(cfg.seed)
    n, e_target = cfg.n, cfg.n_edges_target
    pairs, ring_size = _band_pairs(n, e_target)
    gt_q = _random_quats(rng, n)
    e = len(pairs)
    ei = np.array([a for a, _ in pairs], dtype=np.int64)
    ej = np.array([b for _, b in pairs], dtype=np.int64)
    meas = quat_mul(gt_q[ei], quat_conj(gt_q[ej]))

    n_out = int(cfg.q * e)
    non_ring = np.arange(ring_size, e)
    if n_out > non_ring.size:
        raise InvalidConfigError(
            f"q={cfg.q} asks for {n_out} outliers but only {non_ring.size} "
            f"non-ring edges exist")
    out_idx = rng.choice(non_ring, size=n_out, replace=False) if n_out else \
        np.empty(0, dtype=np.int64)
    if n_out:
        meas[out_idx] = _random_quats(rng, n_out)

    if cfg.sigma_deg > 0.0:
        sigma = np.radians(cfg.sigma_deg)
        if cfg.isotropic_noise:
            vecs = rng.normal(0.0, sigma, size=(e, 3))
        else:
            axes = rng.standard_normal((e, 3))
            norms = np.linalg.norm(axes, axis=1, keepdims=True)
            small = norms[:, 0] < _AXIS_EPS
            axes[small] = (0.0, 0.0, 1.0)
            norms[small] = 1.0
            vecs = (axes / norms) * rng.normal(0.0, sigma, size=(e, 1))
        meas = quat_mul(meas, rotvec_quat(vecs))
    meas = quat_canonical(meas / np.linalg.norm(meas, axis=1, keepdims=True))

    order = rng.permutation(e)
    edges = [(int(ei[k]), int(ej[k]), Rotation(meas[k])) for k in order]
    gt = {i: Rotation(gt_q[i]) for i in range(n)}
    labels = {(int(ei[k]), int(ej[k])): False for k in range(e)}
    for k in out_idx:
        labels[(int(ei[k]), int(ej[k]))] = True
    return SynthDataset(graph=build(n, edges, ground_truth=gt),
                        labels=labels, config=cfg)


def _random_quats(rng: np.random.Generator, n: int) -> np.ndarray:
    q = rng.standard_normal((n, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    return quat_canonical(q)
