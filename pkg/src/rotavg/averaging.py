"""Single rotation averaging: robust means of a set of rotations.

Two geodesic means are provided: the Weiszfeld-iterated L1 median (robust, used
when fusing competing rotation candidates) and the Karcher L2 mean.  Both start
from the chordal L2 mean (polar projection of the matrix sum) and iterate in
the tangent space.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigError
from .so3 import (Rotation, quat_canonical, quat_conj, quat_matrix, quat_mul,
                  quat_rotvec, rotvec_quat)

# Weiszfeld weight guard: distances below this are clamped so a mean sitting
# exactly on an input keeps a finite weight.
_DIST_GUARD = 1e-9
# Outlier gate: drop residuals above max(2 * median, this chordal floor).
_GATE_FLOOR_CHORDAL = 0.35
_GATE_FACTOR = 2.0


@dataclass(frozen=True)
class SraConfig:
    """Settings for the geodesic means."""

    norm: str = "l1"
    max_iters: int = 100
    tol: float = 1e-7
    outlier_rejection: bool = False

    def __post_init__(self):
        if self.norm not in ("l1", "l2"):
            raise InvalidConfigError(f"norm must be 'l1' or 'l2', got {self.norm!r}")
        if self.max_iters < 1:
            raise InvalidConfigError("max_iters must be >= 1")
        if not (self.tol > 0.0):
            raise InvalidConfigError("tol must be positive")


def _as_quats(rotations) -> np.ndarray:
    if isinstance(rotations, np.ndarray):
        q = np.asarray(rotations, dtype=float)
        if q.ndim != 2 or q.shape[1] != 4 or q.shape[0] == 0:
            raise InvalidConfigError(f"expected a nonempty (n, 4) array, got {q.shape}")
        return quat_canonical(q / np.linalg.norm(q, axis=1, keepdims=True))
    qs = [r.quat for r in rotations]
    if not qs:
        raise InvalidConfigError("cannot average an empty set of rotations")
    return np.stack(qs)


def chordal_l2_mean(rotations) -> Rotation:
    """Projection of the arithmetic matrix mean back onto SO(3) (det +1)."""
    q = _as_quats(rotations)
    m = quat_matrix(q).sum(axis=0)
    u, sv, vt = np.linalg.svd(m)
    if sv[-1] < 1e-12:
        # Degenerate spread (e.g. two opposite rotations): any tie-break works;
        # fall back to the first input so the result stays deterministic.
        return Rotation(q[0])
    d = np.sign(np.linalg.det(u @ vt))
    r = u @ np.diag([1.0, 1.0, d]) @ vt
    return Rotation.from_matrix(r)


def _tangents(q: np.ndarray, center: np.ndarray) -> np.ndarray:
    """Log of each rotation relative to center: v_i = Log(R_i @ C^T)."""
    return quat_rotvec(quat_mul(q, quat_conj(center[None, :])))


def geodesic_l1_mean(rotations, cfg: SraConfig | None = None,
                     _trace: list | None = None) -> Rotation:
    """Weiszfeld-iterated geodesic L1 median.

    With cfg.outlier_rejection, one gating pass drops inputs whose residual
    exceeds max(2 * median residual, a 0.35-chordal floor) and re-runs the
    iteration on the survivors.
    """
    cfg = cfg or SraConfig(norm="l1")
    q = _as_quats(rotations)
    result = _weiszfeld(q, cfg, _trace)
    if cfg.outlier_rejection and q.shape[0] > 1:
        v = _tangents(q, result)
        d = np.linalg.norm(v, axis=1)
        floor = 2.0 * math.asin(_GATE_FLOOR_CHORDAL / (2.0 * math.sqrt(2.0)))
        gate = max(_GATE_FACTOR * float(np.median(d)), floor)
        keep = d <= gate
        if keep.any() and not keep.all():
            result = _weiszfeld(q[keep], cfg, _trace)
    return Rotation(result)


def _weiszfeld(q: np.ndarray, cfg: SraConfig, trace: list | None) -> np.ndarray:
    cur = chordal_l2_mean(q).quat
    for _ in range(cfg.max_iters):
        v = _tangents(q, cur)
        d = np.maximum(np.linalg.norm(v, axis=1), _DIST_GUARD)
        w = 1.0 / d
        step = (w[:, None] * v).sum(axis=0) / w.sum()
        cur = quat_mul(rotvec_quat(step), cur)
        cur = quat_canonical(cur / np.linalg.norm(cur))
        if trace is not None:
            trace.append(float(np.linalg.norm(v, axis=1).sum()))
        if float(np.linalg.norm(step)) < cfg.tol:
            break
    return cur


def geodesic_l2_mean(rotations, cfg: SraConfig | None = None,
                     _trace: list | None = None) -> Rotation:
    """Karcher (geodesic L2) mean, tangent-space fixed-point iteration.

    The summed-square objective is kept non-increasing: a step that would
    raise it is halved until it does not.
    """
    cfg = cfg or SraConfig(norm="l2")
    q = _as_quats(rotations)
    cur = chordal_l2_mean(q).quat
    obj = float((np.linalg.norm(_tangents(q, cur), axis=1) ** 2).sum())
    if _trace is not None:
        _trace.append(obj)
    for _ in range(cfg.max_iters):
        v = _tangents(q, cur)
        step = v.mean(axis=0)
        if float(np.linalg.norm(step)) < cfg.tol:
            break
        scale = 1.0
        for _halving in range(30):
            nxt = quat_mul(rotvec_quat(scale * step), cur)
            nxt = quat_canonical(nxt / np.linalg.norm(nxt))
            nxt_obj = float((np.linalg.norm(_tangents(q, nxt), axis=1) ** 2).sum())
            if nxt_obj <= obj + 1e-12:
                break
            scale *= 0.5
        if nxt_obj > obj + 1e-12:
            break
        cur, obj = nxt, nxt_obj
        if _trace is not None:
            _trace.append(nxt_obj)
    return Rotation(cur)
