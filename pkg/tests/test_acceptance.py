"""Acceptance gate.

One test per shipped guarantee; each prints a single verdict line with the
measured values and its runtime so the log shows the whole scorecard even
when everything is green.  The sweep used by the robustness criteria is run
once and shared.
"""

import os
import time

import numpy as np
import pytest

from helpers import (WALKTHROUGH_ORDER, build_support_figure,
                     build_vote_figure, build_walkthrough, rotation_list)
from rotavg import io as gio
from rotavg.initializer import (InitConfig, add_by_vote, init_full,
                                init_simplified, make_state)
from rotavg.metrics import evaluate
from rotavg.pipeline import SweepSpec, solve, sweep
from rotavg.refinement import refine
from rotavg.so3 import (Rotation, exp, log, quat_angle, quat_chordal,
                        quat_conj, quat_mul, quat_rotvec, random_rotations,
                        rotvec_quat)
from rotavg.synthetic import SynthConfig, generate
from rotavg.triplets import count_triplet_supports


def _verdict(capsys, num, ok, detail) -> str:
    line = f"[criterion {num}] {'PASS' if ok else 'FAIL'}: {detail}"
    with capsys.disabled():
        print(line)
    return line


def _median(rows, q, col) -> float:
    return float(np.median([r[col] for r in rows if r["q"] == q]))


def test_criterion_1_kernel_accuracy(capsys):
    # Round trip of the exp/log pair and the chordal-angular identity, on
    # 10^4 rotations, each within 1e-9, in under a second.
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    axes = rng.standard_normal((10_000, 3))
    axes /= np.linalg.norm(axes, axis=1, keepdims=True)
    vecs = axes * rng.uniform(0.0, np.pi - 1e-6, size=(10_000, 1))
    quats = rotvec_quat(vecs)
    rt_err = float(np.abs(quat_rotvec(quats) - vecs).max())
    obj_err = max(np.linalg.norm(log(exp(v)) - v) for v in vecs[:200])

    other = np.roll(quats, 1, axis=0)
    chord = quat_chordal(quats, other)
    ang = quat_angle(quat_mul(quats, quat_conj(other)))
    id_err = float(np.abs(chord - 2.0 * np.sqrt(2.0) * np.sin(ang / 2.0)).max())

    dt = time.perf_counter() - t0
    ok = rt_err <= 1e-9 and obj_err <= 1e-9 and id_err <= 1e-9 and dt < 1.0
    line = _verdict(capsys, 1, ok,
                    f"round-trip {rt_err:.3g} (obj {obj_err:.3g}), identity "
                    f"{id_err:.3g}, all <= 1e-9; {dt:.2f}s < 1s")
    assert ok, line


def test_criterion_2_reference_fixtures(capsys):
    # Hand-checkable fixtures: support counts, the vote winner, and the
    # insertion order on the fifteen-node reference graph with s_init=2.
    t0 = time.perf_counter()
    g_s, _ = build_support_figure()
    sup = {c: count_triplet_supports(g_s, 4, c, 0.01) for c in (5, 6, 7)}
    support_ok = sup == {5: 2, 6: 1, 7: 3}

    g_v, gt_v = build_vote_figure()
    st = make_state(g_v, {1: gt_v[1], 3: gt_v[3], 5: gt_v[5]}, s=0)
    ev = add_by_vote(g_v, st, InitConfig(s_init=2, eps=(0.01,)))
    vote_ok = ev is not None and ev.node == 6 and ev.votes == 3

    g_w, _ = build_walkthrough()
    res = init_full(g_w, InitConfig(s_init=2, eps=(0.01,)))
    order = [e.node for e in res.trace
             if e.kind in ("root", "add-support", "add-vote")]
    order_ok = order == WALKTHROUGH_ORDER

    dt = time.perf_counter() - t0
    ok = support_ok and vote_ok and order_ok and dt < 1.0
    line = _verdict(capsys, 2, ok,
                    f"supports {sup}, vote winner "
                    f"{None if ev is None else ev.node}, order "
                    f"{'matches' if order_ok else order}; {dt:.2f}s < 1s")
    assert ok, line


def test_criterion_3_variants_agree(capsys):
    # With a single threshold the full initializer and the simplified one
    # must produce identical traces and rotations; 200 varied graphs.
    t0 = time.perf_counter()
    cfg = InitConfig(s_init=3, eps=(0.15,))
    mismatches = 0
    for k in range(200):
        n = 8 + (k * 7) % 33
        p = 0.4 + 0.3 * (k % 5) / 4.0
        q = (0.0, 0.05, 0.1)[k % 3]
        sigma = float((k % 4) * 2)
        ds = generate(SynthConfig(n=n, p=p, q=q, sigma_deg=sigma,
                                  seed=1000 + k))
        a = init_full(ds.graph, cfg)
        b = init_simplified(ds.graph, cfg)
        same = ([e.format() for e in a.trace] == [e.format() for e in b.trace]
                and a.roots == b.roots
                and a.tree_edges == b.tree_edges
                and all(np.array_equal(a.rotations[v].quat,
                                       b.rotations[v].quat)
                        for v in a.rotations))
        mismatches += not same
    dt = time.perf_counter() - t0
    ok = mismatches == 0 and dt < 30.0
    line = _verdict(capsys, 3, ok,
                    f"{mismatches}/200 graphs disagree; {dt:.1f}s < 30s")
    assert ok, line


def test_criterion_4_exact_recovery(capsys):
    # Noise-free, outlier-free problems are solved to numerical exactness.
    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(20):
        ds = generate(SynthConfig(n=100, p=0.5, q=0.0, sigma_deg=0.0,
                                  seed=seed))
        rep = solve(ds.graph)
        worst = max(worst, rep.final_metrics.theta2_deg)
    dt = time.perf_counter() - t0
    ok = worst < 1e-6 and dt < 60.0
    line = _verdict(capsys, 4, ok,
                    f"worst final theta2 {worst:.3g} deg < 1e-6 over 20 "
                    f"seeds; {dt:.1f}s < 60s")
    assert ok, line


@pytest.fixture(scope="module")
def sweep_rows():
    spec = SweepSpec(ns=(100,), ps=(0.5,), qs=(0.0, 0.1, 0.2, 0.3, 0.4),
                     sigmas=(5.0,), trials=50, base_seed=0)
    t0 = time.perf_counter()
    rows = sweep(spec)
    return rows, time.perf_counter() - t0


def test_criterion_5_outlier_robustness(capsys, sweep_rows):
    # At thirty percent outliers the accuracy may at most double relative
    # to the outlier-free baseline.
    rows, dt = sweep_rows
    med0 = _median(rows, 0.0, "theta1_final")
    med3 = _median(rows, 0.3, "theta1_final")
    ratio = med3 / med0
    ok = med3 <= 2.0 * med0 and dt < 1200.0
    line = _verdict(capsys, 5, ok,
                    f"median theta1 {med3:.3f} deg at q=0.3 vs {med0:.3f} at "
                    f"q=0 (ratio {ratio:.2f} <= 2); sweep {dt:.0f}s < 1200s")
    assert ok, line


def test_criterion_6_filter_quality(capsys, sweep_rows):
    rows, _ = sweep_rows
    recall = _median(rows, 0.2, "outlier_recall")
    retention = _median(rows, 0.2, "inlier_retention")
    ok = recall >= 0.90 and retention >= 0.95
    line = _verdict(capsys, 6, ok,
                    f"q=0.2 median outlier recall {recall:.3f} >= 0.90, "
                    f"inlier retention {retention:.3f} >= 0.95")
    assert ok, line


def test_criterion_7_descent_and_gauge(capsys):
    # The active objective never increases within a loss phase, updates stay
    # inside the linearization regime, and a global rotation of the init
    # carries through refinement unchanged.
    t0 = time.perf_counter()
    worst_rise = -np.inf
    worst_gauge = 0.0
    worst_step = 0.0
    for seed in range(10):
        ds = generate(SynthConfig(n=30, p=0.5, q=0.0, sigma_deg=5.0,
                                  seed=200 + seed))
        init = init_full(ds.graph, InitConfig(s_init=3, eps=(0.25,)))
        res = refine(ds.graph, init.rotations)
        phases: dict[str, list[float]] = {}
        for loss, val in res.objective_trace:
            phases.setdefault(loss, []).append(val)
        for vals in phases.values():
            if len(vals) > 1:
                worst_rise = max(worst_rise, float(np.diff(vals).max()))
        worst_step = max(worst_step,
                         max(res.max_step_trace[1:], default=0.0))

        rng = np.random.default_rng(900 + seed)
        q0 = Rotation(random_rotations(rng, 1)[0])
        spun = {v: r @ q0 for v, r in init.rotations.items()}
        other = refine(ds.graph, spun)
        worst_gauge = max(worst_gauge,
                          evaluate(other.rotations, res.rotations).theta2_deg)
    dt = time.perf_counter() - t0
    ok = worst_rise <= 1e-9 and worst_gauge <= 1e-9 and worst_step < 0.2
    line = _verdict(capsys, 7, ok,
                    f"worst within-phase rise {worst_rise:.3g} <= 1e-9, "
                    f"worst gauge gap {worst_gauge:.3g} deg <= 1e-9, "
                    f"worst late step {worst_step:.3g} < 0.2 rad; {dt:.1f}s")
    assert ok, line


def test_criterion_8_alignment_optimality(capsys):
    # The reported L2 alignment must beat 1000 random alignments for every
    # seed, not merely on average.
    t0 = time.perf_counter()
    worst_margin = np.inf
    ok = True
    for seed in range(20):
        rng = np.random.default_rng(300 + seed)
        gt = rotation_list(300 + seed, 100)
        est = {}
        for i, r in enumerate(gt):
            axis = rng.standard_normal(3)
            axis /= np.linalg.norm(axis)
            est[i] = r @ exp(np.radians(5.0) * axis)
        res = evaluate(est, dict(enumerate(gt)))

        est_q = np.stack([est[i].quat for i in range(100)])
        gt_q = np.stack([gt[i].quat for i in range(100)])
        cand = random_rotations(rng, 1000)
        aligned = quat_mul(est_q[None, :, :], cand[:, None, :])
        angs = np.degrees(quat_angle(quat_mul(aligned, quat_conj(gt_q)[None])))
        rand_rms = np.sqrt((angs ** 2).mean(axis=1))
        margin = float(rand_rms.min() - res.theta2_deg)
        worst_margin = min(worst_margin, margin)
        ok = ok and res.theta2_deg <= rand_rms.min() + 1e-9
    dt = time.perf_counter() - t0
    line = _verdict(capsys, 8, ok,
                    f"L2 alignment beat 1000 random alignments on all 20 "
                    f"seeds (worst margin {worst_margin:.2f} deg); {dt:.1f}s")
    assert ok, line


def test_criterion_9_real_scene_advisory(capsys):
    # Advisory only: runs when ROTAVG_ELS_FILE points at a real-scene graph
    # export; reports accuracy without gating the suite.
    path = os.environ.get("ROTAVG_ELS_FILE")
    if not path:
        with capsys.disabled():
            print("[criterion 9] SKIP: set ROTAVG_ELS_FILE to run the "
                  "real-scene advisory check")
        pytest.skip("no real-scene graph file configured")
    g = gio.load_graph(path)
    t0 = time.perf_counter()
    rep = solve(g)
    dt = time.perf_counter() - t0
    if rep.final_metrics is None:
        detail = f"solved {g.n} nodes in {dt:.0f}s (no ground truth in file)"
    else:
        detail = (f"theta1 {rep.final_metrics.theta1_deg:.2f} deg "
                  f"(reference 2.1+-0.5), theta2 "
                  f"{rep.final_metrics.theta2_deg:.2f} deg "
                  f"(reference 7.4+-1.5); {dt:.0f}s")
    _verdict(capsys, 9, True, "advisory: " + detail)


# -- supporting invariants on the shared sweep ------------------------------


def test_sweep_refinement_improves_on_initialization(sweep_rows):
    rows, _ = sweep_rows
    for q in (0.0, 0.1, 0.2, 0.3):
        assert _median(rows, q, "theta1_final") <= \
            _median(rows, q, "theta1_init"), f"q={q}"


def test_sweep_accuracy_degrades_monotonically(sweep_rows):
    rows, _ = sweep_rows
    meds = [_median(rows, q, "theta1_final")
            for q in (0.0, 0.1, 0.2, 0.3, 0.4)]
    inversions = [a - b for a, b in zip(meds, meds[1:]) if a > b]
    assert len(inversions) <= 1
    assert all(gap <= 0.1 for gap in inversions), meds


def test_sweep_baseline_sits_on_the_oracle_floor(sweep_rows):
    # On outlier-free problems the pipeline should land within 20% of what
    # refinement started from the ground truth itself achieves.
    rows, _ = sweep_rows
    q0 = [r for r in rows if r["q"] == 0.0]
    floor = []
    for r in q0:
        ds = generate(SynthConfig(n=100, p=0.5, q=0.0, sigma_deg=5.0,
                                  seed=r["seed"]))
        gt = dict(ds.graph.ground_truth)
        res = refine(ds.graph, gt)
        floor.append(evaluate(res.rotations, ds.graph.ground_truth).theta1_deg)
    oracle = float(np.mean(floor))
    mine = float(np.mean([r["theta1_final"] for r in q0]))
    assert abs(mine - oracle) <= 0.2 * oracle, (mine, oracle)
