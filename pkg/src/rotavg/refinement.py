"""IRLS refinement of absolute rotations against all kept edges.

Each iteration linearizes every edge residual r_jk = Log(R_j^T R_jk R_k) as
du_j - du_k, solves one weighted least-squares system per axis (the weighted
graph Laplacian, one anchored node per component), and applies the update
R <- R @ Exp(du).  Weights follow the chosen loss; the default is the
rho(e) = sqrt(e) robust loss, warmed up with a few L1 iterations.  A descent
safeguard halves any step that would raise the active objective.
"""

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import splu

from .errors import InvalidConfigError, NumericalError
from .graph import ViewGraph
from .so3 import Rotation, quat_canonical, quat_conj, quat_mul, quat_rotvec, rotvec_quat

_LOSSES = ("half", "l1", "l2")
# Residual norms are floored here inside the weight formulas only.
_WEIGHT_FLOOR = 1e-5
_DESCENT_TOL = 1e-9
_MAX_HALVINGS = 30


@dataclass(frozen=True)
class RefineConfig:
    """IRLS settings; loss 'half' is rho(e) = sqrt(e) with weight e^(-3/2)."""

    loss: str = "half"
    max_iters: int = 100
    step_tol: float = 1e-5
    warmup_iters: int = 5

    def __post_init__(self):
        if self.loss not in _LOSSES:
            raise InvalidConfigError(f"loss must be one of {_LOSSES}, got {self.loss!r}")
        if self.max_iters < 1:
            raise InvalidConfigError("max_iters must be >= 1")
        if not (self.step_tol > 0.0):
            raise InvalidConfigError("step_tol must be positive")
        if self.warmup_iters < 0:
            raise InvalidConfigError("warmup_iters must be >= 0")


@dataclass(frozen=True)
class RefineResult:
    """Refined rotations plus per-iteration diagnostics."""

    rotations: dict[int, Rotation]
    iterations: int
    objective_trace: list[tuple[str, float]]
    mean_step_trace: list[float]
    max_step_trace: list[float]
    halvings: int


def edge_residual(measured: Rotation, est_i: Rotation, est_j: Rotation) -> np.ndarray:
    """Log(est_i^T @ measured @ est_j); vanishes when the estimates explain the edge."""
    return (est_i.inverse() @ measured @ est_j).as_rotvec()


def _residuals(quats: np.ndarray, ei: np.ndarray, ej: np.ndarray,
               q_meas: np.ndarray) -> np.ndarray:
    rel = quat_mul(quat_conj(quats[ei]), quat_mul(q_meas, quats[ej]))
    return quat_rotvec(rel)


def _objective(norms: np.ndarray, loss: str) -> float:
    if loss == "half":
        return float(np.sqrt(norms).sum())
    if loss == "l1":
        return float(norms.sum())
    return float((norms ** 2).sum())


def _weights(norms: np.ndarray, loss: str) -> np.ndarray:
    floored = np.maximum(norms, _WEIGHT_FLOOR)
    if loss == "half":
        return floored ** -1.5
    if loss == "l1":
        return floored ** -1.0
    return np.ones_like(norms)


def default_anchors(g: ViewGraph) -> list[int]:
    """Smallest node id of each component."""
    return [int(g.component_nodes(label).min()) for label in range(g.n_components)]


def refine(g: ViewGraph, rotations: dict[int, Rotation],
           cfg: RefineConfig | None = None,
           anchors: list[int] | None = None) -> RefineResult:
    """Iteratively reweighted refinement of the given initial rotations.

    Args:
        g: the (already filtered) view graph; every node needs an entry in
            rotations.
        anchors: gauge-fixing nodes, one per component (default: the smallest
            node id of each).  Their rotations never move.
    """
    cfg = cfg or RefineConfig()
    try:
        quats = np.stack([rotations[i].quat for i in range(g.n)]) \
            if g.n else np.empty((0, 4))
    except KeyError as exc:
        raise InvalidConfigError(f"no initial rotation for node {exc.args[0]}") from None
    if anchors is None:
        anchors = default_anchors(g)
    if any(a < 0 or a >= g.n for a in anchors):
        raise InvalidConfigError("anchor node id out of range")
    if len(anchors) != len(set(anchors)):
        raise InvalidConfigError("duplicate anchors")
    anchored_components = set(int(g.component_labels[a]) for a in anchors)
    if (anchored_components != set(range(g.n_components))
            or len(anchors) != g.n_components):
        raise InvalidConfigError("need exactly one anchor in every component")

    e = g.n_edges
    if e == 0 or g.n == 0:
        return RefineResult({i: Rotation(quats[i]) for i in range(g.n)},
                            0, [], [], [], 0)
    ei, ej = g._ei, g._ej
    q_meas = g._quats
    free = np.ones(g.n, dtype=bool)
    free[list(anchors)] = False
    idx = np.full(g.n, -1, dtype=np.int64)
    idx[free] = np.arange(int(free.sum()))
    n_free = int(free.sum())

    obj_trace: list[tuple[str, float]] = []
    mean_steps: list[float] = []
    max_steps: list[float] = []
    halvings_total = 0
    iterations = 0

    for it in range(cfg.max_iters):
        loss = "l1" if (cfg.loss == "half" and it < cfg.warmup_iters) else cfg.loss
        r = _residuals(quats, ei, ej, q_meas)
        norms = np.linalg.norm(r, axis=1)
        obj = _objective(norms, loss)
        if not obj_trace or obj_trace[-1][0] != loss:
            obj_trace.append((loss, obj))
        w = _weights(norms, loss)

        if n_free == 0:
            break
        # Weighted Laplacian over the free nodes, shared by the three axes.
        fi, fj = idx[ei], idx[ej]
        rows, cols, vals = [], [], []
        bi = free[ei]
        bj = free[ej]
        rows.append(fi[bi]); cols.append(fi[bi]); vals.append(w[bi])
        rows.append(fj[bj]); cols.append(fj[bj]); vals.append(w[bj])
        both = bi & bj
        rows.append(fi[both]); cols.append(fj[both]); vals.append(-w[both])
        rows.append(fj[both]); cols.append(fi[both]); vals.append(-w[both])
        lap = coo_matrix((np.concatenate(vals),
                          (np.concatenate(rows), np.concatenate(cols))),
                         shape=(n_free, n_free)).tocsc()
        rhs = np.zeros((n_free, 3))
        np.add.at(rhs, fi[bi], (w[:, None] * r)[bi])
        np.add.at(rhs, fj[bj], -(w[:, None] * r)[bj])
        try:
            du_free = splu(lap).solve(rhs)
        except RuntimeError as exc:
            raise NumericalError(f"linear solve failed: {exc}") from None
        if not np.all(np.isfinite(du_free)):
            raise NumericalError("linear solve produced non-finite updates")

        du = np.zeros((g.n, 3))
        du[free] = du_free
        step_norms = np.linalg.norm(du, axis=1)
        mean_step = float(step_norms.mean())
        mean_steps.append(mean_step)
        max_steps.append(float(step_norms.max()))

        scale = 1.0
        accepted = None
        for _h in range(_MAX_HALVINGS + 1):
            cand = quat_mul(quats, rotvec_quat(scale * du))
            cand = quat_canonical(cand / np.linalg.norm(cand, axis=1, keepdims=True))
            cand_norms = np.linalg.norm(_residuals(cand, ei, ej, q_meas), axis=1)
            cand_obj = _objective(cand_norms, loss)
            if cand_obj <= obj + _DESCENT_TOL:
                accepted = (cand, cand_obj)
                break
            halvings_total += 1
            scale *= 0.5
        iterations = it + 1
        if accepted is None:
            break
        quats, obj = accepted
        obj_trace.append((loss, obj))
        if mean_step < cfg.step_tol:
            break

    out = {i: Rotation(quats[i]) for i in range(g.n)}
    return RefineResult(out, iterations, obj_trace, mean_steps, max_steps,
                        halvings_total)
