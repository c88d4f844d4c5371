"""Command-line front end.

Subcommands:
    solve  - run the pipeline on a graph file, write report/estimates
    synth  - generate a synthetic graph (+ labels sidecar)
    sweep  - grid of synthetic problems from a TOML config, CSV out
    eval   - compare two rotation files

Exit codes: 0 success, 2 invalid input or configuration, 3 numerical failure.
Worker count for sweeps comes from the ROTAVG_WORKERS environment variable.
"""

import argparse
import json
import sys

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import io as gio
from .errors import (ComponentExhausted, GraphError, InvalidConfigError,
                     NoOverlapError, NumericalError, ParseError, RotavgError)
from .filtering import FilterConfig
from .initializer import InitConfig
from .metrics import evaluate
from .pipeline import PipelineConfig, SweepSpec, solve, sweep, write_csv
from .refinement import RefineConfig
from .synthetic import SynthConfig, generate


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="rotavg",
        description="Rotation averaging: hierarchical initialization, "
                    "edge filtering, IRLS refinement.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="run the pipeline on a graph file")
    sp.add_argument("input", help="graph file (E/G records)")
    sp.add_argument("--report", help="write the JSON report here")
    sp.add_argument("--est-out", help="write estimated rotations here")
    sp.add_argument("--s-init", type=int, default=10)
    sp.add_argument("--m", type=int, default=3,
                    help="number of loop-error thresholds")
    sp.add_argument("--tau", type=float, default=1.0,
                    help="chordal residual cutoff for edge filtering")
    sp.add_argument("--use-inliers", action="store_true",
                    help="gate edges by correspondence-count tiers")
    sp.add_argument("--loss", choices=("half", "l1", "l2"), default="half")
    sp.add_argument("--trace", action="store_true",
                    help="print initializer trace lines")

    gp = sub.add_parser("synth", help="generate a synthetic problem")
    gp.add_argument("--n", type=int, required=True)
    gp.add_argument("--p", type=float, default=0.3)
    gp.add_argument("--q", type=float, default=0.0)
    gp.add_argument("--sigma", type=float, default=0.0,
                    help="noise stddev in degrees")
    gp.add_argument("--seed", type=int, default=0)
    gp.add_argument("--out", required=True, help="graph file to write")
    gp.add_argument("--labels-out", help="outlier labels sidecar")

    wp = sub.add_parser("sweep", help="run a grid of synthetic problems")
    wp.add_argument("--config", required=True, help="TOML sweep spec")
    wp.add_argument("--out", required=True, help="CSV to write")

    ep = sub.add_parser("eval", help="compare estimated rotations to reference")
    ep.add_argument("--est", required=True)
    ep.add_argument("--ref", required=True)
    return ap


def _cmd_solve(args) -> int:
    g = gio.load_graph(args.input)
    cfg = PipelineConfig(
        init=InitConfig(s_init=args.s_init, use_inlier_counts=args.use_inliers),
        filter=FilterConfig(tau=args.tau),
        refine=RefineConfig(loss=args.loss),
        m=args.m, keep_trace=args.trace)
    report = solve(g, cfg)
    if args.trace and report.trace:
        for line in report.trace:
            print(line)
    print(f"nodes={report.n} edges={report.n_edges}")
    print(f"median_loop_error={report.median_loop_error:.9g}")
    print("thresholds=" + ";".join(format(t, ".9g") for t in report.thresholds))
    print(f"filter removed={len(report.removed_edges)} "
          f"skipped={str(report.filter_skipped).lower()}")
    print(f"refine_iterations={report.refine_iterations}")
    for name, metr in (("init", report.init_metrics),
                       ("final", report.final_metrics)):
        if metr is not None:
            print(f"{name} theta1_deg={metr.theta1_deg:.9g} "
                  f"theta2_deg={metr.theta2_deg:.9g}")
    if args.report:
        with open(args.report, "w") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    if args.est_out:
        gio.save_rotations(report.rotations, g.n, args.est_out)
    return 0


def _cmd_synth(args) -> int:
    ds = generate(SynthConfig(n=args.n, p=args.p, q=args.q,
                              sigma_deg=args.sigma, seed=args.seed))
    gio.save_graph(ds.graph, args.out)
    if args.labels_out:
        gio.save_labels(ds.labels, args.labels_out)
    print(f"wrote {ds.graph.n} nodes, {ds.graph.n_edges} edges, "
          f"{ds.n_outliers} outliers")
    return 0


def _load_sweep_config(path) -> tuple[SweepSpec, PipelineConfig]:
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)
    try:
        grid = doc["sweep"]
        spec = SweepSpec(
            ns=tuple(int(x) for x in grid["n"]),
            ps=tuple(float(x) for x in grid["p"]),
            qs=tuple(float(x) for x in grid["q"]),
            sigmas=tuple(float(x) for x in grid["sigma_deg"]),
            trials=int(grid.get("trials", 1)),
            base_seed=int(grid.get("base_seed", 0)))
    except KeyError as exc:
        raise InvalidConfigError(
            f"sweep config is missing key {exc.args[0]!r}") from None
    opts = doc.get("solve", {})
    cfg = PipelineConfig(
        init=InitConfig(s_init=int(opts.get("s_init", 10)),
                        use_inlier_counts=bool(opts.get("use_inliers", False))),
        filter=FilterConfig(tau=float(opts.get("tau", 1.0))),
        refine=RefineConfig(loss=str(opts.get("loss", "half"))),
        m=int(opts.get("m", 3)))
    return spec, cfg


def _cmd_sweep(args) -> int:
    spec, cfg = _load_sweep_config(args.config)
    rows = sweep(spec, cfg)
    write_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def _cmd_eval(args) -> int:
    est = gio.load_rotations(args.est)
    ref = gio.load_rotations(args.ref)
    res = evaluate(est, ref)
    print(json.dumps({"theta1_deg": res.theta1_deg,
                      "theta2_deg": res.theta2_deg,
                      "n_evaluated": res.n_evaluated}, sort_keys=True))
    return 0


_COMMANDS = {"solve": _cmd_solve, "synth": _cmd_synth,
             "sweep": _cmd_sweep, "eval": _cmd_eval}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ParseError, GraphError, InvalidConfigError, NoOverlapError,
            tomllib.TOMLDecodeError, FileNotFoundError, IsADirectoryError,
            PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, ComponentExhausted) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except RotavgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
