"""End-to-end solver and parameter sweeps.

solve() chains the stages: sample loop errors, pick thresholds, run the
hierarchical initializer, filter edges by residual, refine with IRLS.  When
the graph carries ground truth, accuracy is reported after initialization and
after refinement.  sweep() runs solve over a grid of synthetic problems,
optionally in parallel processes, and serializes rows to CSV.
"""

import csv
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import product

import numpy as np

from .errors import InvalidConfigError
from .filtering import FilterConfig, apply_filter, filter_edges
from .graph import ViewGraph
from .initializer import InitConfig, init_full
from .metrics import MetricsResult, evaluate
from .refinement import RefineConfig, refine
from .so3 import Rotation
from .synthetic import SynthConfig, generate
from .triplets import median_loop_error, pick_thresholds, sample_loop_errors

WORKERS_ENV = "ROTAVG_WORKERS"


@dataclass(frozen=True)
class PipelineConfig:
    init: InitConfig = field(default_factory=InitConfig)
    filter: FilterConfig = field(default_factory=FilterConfig)
    refine: RefineConfig = field(default_factory=RefineConfig)
    m: int = 3                      # thresholds to derive when init.eps is unset
    max_triplets_per_edge: int = 10
    random_sampling: bool = False
    seed: int = 0
    keep_trace: bool = False


@dataclass(frozen=True)
class SolveReport:
    """Everything one solve produced, ready for JSON or CSV serialization."""

    n: int
    n_edges: int
    median_loop_error: float
    thresholds: tuple[float, ...]
    rotations: dict[int, Rotation]
    tree_edges: list[tuple[int, int]]
    removed_edges: list[tuple[int, int]]
    filter_skipped: bool
    init_metrics: MetricsResult | None
    final_metrics: MetricsResult | None
    refine_iterations: int
    timings: dict[str, float]
    trace: list[str] | None

    def to_dict(self, include_timings: bool = True) -> dict:
        d: dict = {
            "n": self.n,
            "n_edges": self.n_edges,
            "median_loop_error": self.median_loop_error,
            "thresholds": list(self.thresholds),
            "n_removed": len(self.removed_edges),
            "removed_edges": [list(e) for e in self.removed_edges],
            "filter_skipped": self.filter_skipped,
            "refine_iterations": self.refine_iterations,
        }
        for name, metr in (("init", self.init_metrics),
                           ("final", self.final_metrics)):
            d[name] = None if metr is None else {
                "theta1_deg": metr.theta1_deg,
                "theta2_deg": metr.theta2_deg,
                "n_evaluated": metr.n_evaluated,
            }
        if self.trace is not None:
            d["trace"] = self.trace
        if include_timings:
            d["timings"] = self.timings
        return d


def _headline_metrics(g: ViewGraph, estimates: dict[int, Rotation]) -> MetricsResult | None:
    """Metrics over the largest component (each component has its own gauge)."""
    if g.ground_truth is None:
        return None
    sizes = np.bincount(g.component_labels, minlength=g.n_components)
    label = int(np.argmax(sizes))
    nodes = g.component_nodes(label)
    est = {int(i): estimates[int(i)] for i in nodes if int(i) in estimates}
    gt = {int(i): g.ground_truth[int(i)] for i in nodes
          if int(i) in g.ground_truth}
    if not (set(est) & set(gt)):
        return None
    return evaluate(est, gt)


def solve(g: ViewGraph, cfg: PipelineConfig | None = None) -> SolveReport:
    """Run the full pipeline on one view graph."""
    cfg = cfg or PipelineConfig()
    timings: dict[str, float] = {}
    t0 = time.perf_counter()

    rng = np.random.default_rng(cfg.seed) if cfg.random_sampling else None
    sample = sample_loop_errors(g, cfg.max_triplets_per_edge, rng=rng)
    med = median_loop_error(sample)
    eps = cfg.init.eps if cfg.init.eps is not None else \
        pick_thresholds(sample, cfg.m)
    timings["sample_s"] = time.perf_counter() - t0

    t1 = time.perf_counter()
    init = init_full(g, replace(cfg.init, eps=eps))
    timings["init_s"] = time.perf_counter() - t1

    t2 = time.perf_counter()
    init_metrics = _headline_metrics(g, init.rotations)
    filt = filter_edges(g, init, sample, cfg.filter)
    g_kept = apply_filter(g, filt)
    timings["filter_s"] = time.perf_counter() - t2

    t3 = time.perf_counter()
    ref = refine(g_kept, init.rotations, cfg.refine, anchors=init.roots)
    timings["refine_s"] = time.perf_counter() - t3
    final_metrics = _headline_metrics(g, ref.rotations)
    timings["total_s"] = time.perf_counter() - t0

    removed = [(g.edges[int(k)].i, g.edges[int(k)].j) for k in filt.removed]
    return SolveReport(
        n=g.n, n_edges=g.n_edges, median_loop_error=med,
        thresholds=tuple(eps), rotations=ref.rotations,
        tree_edges=list(init.tree_edges), removed_edges=removed,
        filter_skipped=filt.skipped, init_metrics=init_metrics,
        final_metrics=final_metrics, refine_iterations=ref.iterations,
        timings=timings,
        trace=[ev.format() for ev in init.trace] if cfg.keep_trace else None)


# -- sweeps -----------------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    """Grid of synthetic problems: the cross product of the four axes."""

    ns: tuple[int, ...]
    ps: tuple[float, ...]
    qs: tuple[float, ...]
    sigmas: tuple[float, ...]
    trials: int = 1
    base_seed: int = 0

    def __post_init__(self):
        if not (self.ns and self.ps and self.qs and self.sigmas):
            raise InvalidConfigError("every sweep axis needs at least one value")
        if self.trials < 1:
            raise InvalidConfigError("trials must be >= 1")

    def cells(self) -> list[tuple[int, float, float, float, int, int]]:
        """(n, p, q, sigma, trial, seed) rows in deterministic order."""
        out = []
        idx = 0
        for n, p, q, s in product(self.ns, self.ps, self.qs, self.sigmas):
            for t in range(self.trials):
                out.append((n, p, q, s, t, self.base_seed + idx))
                idx += 1
        return out


CSV_COLUMNS = [
    "n", "p", "q", "sigma_deg", "trial", "seed", "n_edges", "n_outliers",
    "median_loop_error", "thresholds", "filter_skipped", "n_removed",
    "outlier_recall", "inlier_retention", "refine_iterations",
    "theta1_init", "theta2_init", "theta1_final", "theta2_final", "t_total_s",
]


def _run_cell(args) -> dict:
    n, p, q, sigma, trial, seed, cfg = args
    ds = generate(SynthConfig(n=n, p=p, q=q, sigma_deg=sigma, seed=seed))
    report = solve(ds.graph, cfg)
    removed = set(report.removed_edges)
    outliers = {e for e, bad in ds.labels.items() if bad}
    inliers = {e for e, bad in ds.labels.items() if not bad}
    recall = (len(removed & outliers) / len(outliers)) if outliers else 1.0
    retention = (len(inliers - removed) / len(inliers)) if inliers else 1.0
    return {
        "n": n, "p": p, "q": q, "sigma_deg": sigma, "trial": trial,
        "seed": seed, "n_edges": ds.graph.n_edges, "n_outliers": len(outliers),
        "median_loop_error": report.median_loop_error,
        "thresholds": ";".join(format(t, ".9g") for t in report.thresholds),
        "filter_skipped": report.filter_skipped,
        "n_removed": len(report.removed_edges),
        "outlier_recall": recall, "inlier_retention": retention,
        "refine_iterations": report.refine_iterations,
        "theta1_init": report.init_metrics.theta1_deg,
        "theta2_init": report.init_metrics.theta2_deg,
        "theta1_final": report.final_metrics.theta1_deg,
        "theta2_final": report.final_metrics.theta2_deg,
        "t_total_s": report.timings["total_s"],
    }


def resolve_workers(workers: int | None = None) -> int:
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))
    return max(1, workers)


def sweep(spec: SweepSpec, cfg: PipelineConfig | None = None,
          workers: int | None = None) -> list[dict]:
    """Solve every cell of the grid; row order is deterministic regardless
    of worker count."""
    cfg = cfg or PipelineConfig()
    jobs = [(n, p, q, s, t, seed, cfg) for n, p, q, s, t, seed in spec.cells()]
    nw = resolve_workers(workers)
    if nw <= 1 or len(jobs) <= 1:
        rows = [_run_cell(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=nw) as pool:
            rows = list(pool.map(_run_cell, jobs))
    rows.sort(key=lambda r: (r["n"], r["p"], r["q"], r["sigma_deg"], r["trial"]))
    return rows


def write_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
