"""Accuracy metrics for estimated absolute rotations.

Estimates are only determined up to a global rotation, so before measuring
errors the two sets are aligned: a single rotation Q is found so that the
per-node residuals d(gt_i, est_i @ Q) are small, using the geodesic L1 mean
for the mean-error metric and the L2 (Karcher) mean for the RMS metric.
"""

from dataclasses import dataclass

import numpy as np

from .averaging import SraConfig, geodesic_l1_mean, geodesic_l2_mean
from .errors import NoOverlapError
from .so3 import Rotation, quat_angle, quat_conj, quat_mul


@dataclass(frozen=True)
class MetricsResult:
    theta1_deg: float       # mean angular error after L1 alignment
    theta2_deg: float       # RMS angular error after L2 alignment
    n_evaluated: int
    align_l1: Rotation
    align_l2: Rotation


def _angles_deg(est_q: np.ndarray, gt_q: np.ndarray, align: Rotation) -> np.ndarray:
    aligned = quat_mul(est_q, np.broadcast_to(align.quat, est_q.shape))
    return np.degrees(quat_angle(quat_mul(aligned, quat_conj(gt_q))))


def evaluate(estimates: dict[int, Rotation], ground_truth: dict[int, Rotation],
             l1_cfg: SraConfig | None = None,
             l2_cfg: SraConfig | None = None) -> MetricsResult:
    """Align the estimates to the ground truth and report angular errors.

    Only nodes present in both maps count.  Raises NoOverlapError when the
    two maps share no node.
    """
    common = sorted(set(estimates) & set(ground_truth))
    if not common:
        raise NoOverlapError("estimates and ground truth share no node")
    est_q = np.stack([estimates[i].quat for i in common])
    gt_q = np.stack([ground_truth[i].quat for i in common])
    # Residual rotations est_i^T @ gt_i; their mean is the best alignment.
    resid = [Rotation(q) for q in quat_mul(quat_conj(est_q), gt_q)]
    align_l1 = geodesic_l1_mean(resid, l1_cfg or SraConfig(norm="l1"))
    align_l2 = geodesic_l2_mean(resid, l2_cfg)
    d1 = _angles_deg(est_q, gt_q, align_l1)
    d2 = _angles_deg(est_q, gt_q, align_l2)
    return MetricsResult(theta1_deg=float(d1.mean()),
                         theta2_deg=float(np.sqrt((d2 ** 2).mean())),
                         n_evaluated=len(common),
                         align_l1=align_l1, align_l2=align_l2)
