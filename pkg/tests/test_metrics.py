"""Gauge-aligned error metrics."""

import numpy as np
import pytest

from helpers import rotation_list
from rotavg.errors import NoOverlapError
from rotavg.metrics import evaluate
from rotavg.so3 import angular_distance, exp, random_rotation


def _theta(est, gt, align, rms):
    common = sorted(set(est) & set(gt))
    angs = np.array([np.degrees(angular_distance(est[i] @ align, gt[i]))
                     for i in common])
    return float(np.sqrt((angs ** 2).mean())) if rms else float(angs.mean())


def _perturbed(gt, sigma_rad, seed):
    rng = np.random.default_rng(seed)
    return {i: r @ exp(sigma_rad * rng.standard_normal(3))
            for i, r in enumerate(gt)}


def test_identical_sets_score_zero():
    gt = rotation_list(0, 12)
    res = evaluate(dict(enumerate(gt)), dict(enumerate(gt)))
    assert res.theta1_deg < 1e-9
    assert res.theta2_deg < 1e-9
    assert res.n_evaluated == 12


def test_global_rotation_is_absorbed_by_alignment():
    gt = rotation_list(1, 15)
    q0 = random_rotation(np.random.default_rng(99))
    est = {i: r @ q0 for i, r in enumerate(gt)}
    res = evaluate(est, dict(enumerate(gt)))
    assert res.theta1_deg < 1e-6
    assert res.theta2_deg < 1e-6


def test_reported_values_match_the_returned_alignments():
    gt = rotation_list(2, 40)
    est = _perturbed(gt, np.radians(6.0), seed=2)
    ref = dict(enumerate(gt))
    res = evaluate(est, ref)
    assert abs(_theta(est, ref, res.align_l1, rms=False) - res.theta1_deg) < 1e-9
    assert abs(_theta(est, ref, res.align_l2, rms=True) - res.theta2_deg) < 1e-9


def test_each_alignment_is_best_for_its_own_metric():
    for seed in range(5):
        gt = rotation_list(seed, 30)
        est = _perturbed(gt, np.radians(8.0), seed=seed)
        ref = dict(enumerate(gt))
        res = evaluate(est, ref)
        assert res.theta1_deg <= _theta(est, ref, res.align_l2, False) + 1e-6
        assert res.theta2_deg <= _theta(est, ref, res.align_l1, True) + 1e-6


def test_l2_alignment_beats_random_alignments():
    gt = rotation_list(7, 50)
    est = _perturbed(gt, np.radians(5.0), seed=7)
    ref = dict(enumerate(gt))
    res = evaluate(est, ref)
    rng = np.random.default_rng(7)
    for _ in range(200):
        assert res.theta2_deg <= _theta(est, ref, random_rotation(rng),
                                        True) + 1e-9


def test_fixed_magnitude_errors_are_recovered():
    # Unit-degree errors about random axes: RMS after alignment stays near
    # one degree because the sample mean sits close to the identity.
    rng = np.random.default_rng(11)
    gt = rotation_list(11, 10_000)
    est = {}
    for i, r in enumerate(gt):
        axis = rng.standard_normal(3)
        axis /= np.linalg.norm(axis)
        est[i] = r @ exp(np.radians(1.0) * axis)
    res = evaluate(est, dict(enumerate(gt)))
    assert abs(res.theta2_deg - 1.0) < 0.05
    assert abs(res.theta1_deg - 1.0) < 0.05


def test_partial_overlap_only_counts_shared_nodes():
    gt = rotation_list(3, 15)
    ref = {i: gt[i] for i in range(5, 15)}
    est = {i: gt[i] for i in range(0, 10)}
    res = evaluate(est, ref)
    assert res.n_evaluated == 5
    assert res.theta2_deg < 1e-9


def test_disjoint_node_sets_raise():
    gt = rotation_list(4, 10)
    with pytest.raises(NoOverlapError):
        evaluate({0: gt[0]}, {1: gt[1]})
