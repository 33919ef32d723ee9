"""Command-line entry point: ``extremal-hull <subcommand> [options]``.

Output files go to ``--out``, or to ``$EXTREMAL_HULL_OUT``, or to the current
directory. The exit status is 0 when every declared verdict passes, 1 when
some verdict fails and 2 on invalid input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import burgers, drift, experiments, hull, paths, sticky, synthesis
from .errors import ExtremalHullError

OUT_ENV = "EXTREMAL_HULL_OUT"


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", default=argparse.SUPPRESS, help="JSON config file")
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="RNG seed (u64)")
    p.add_argument("--out", default=argparse.SUPPRESS, help="output directory")
    p.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS)
    return p


def build_parser():
    common = _common()
    parser = argparse.ArgumentParser(prog="extremal-hull", parents=[common],
                                     description="Extremal sets, concave majorants and adhesion dynamics.")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="simulate a path and save it")
    s.add_argument("--kind", choices=("levy", "brownian", "integrated-brownian", "ito"), default="levy")
    s.add_argument("--eps", type=float, default=1e-3, help="truncation level for levy paths")
    s.add_argument("--n", type=int, default=1024, help="grid steps for gaussian paths")
    s.add_argument("--horizon", type=float, nargs=2, default=(0.0, 1.0), metavar=("T0", "T1"))
    s.add_argument("--phi", default="1+a^2", help="Itô diffusion coefficient name")
    s.add_argument("--psi", default="sin(a)", help="Itô drift coefficient name")

    h = sub.add_parser("hull", parents=[common], help="concave majorant and extremal times of a path")
    h.add_argument("--input", required=True, help="path JSON written by 'simulate'")
    h.add_argument("--side", choices=("superior", "inferior"), default="superior")

    d = sub.add_parser("drift", parents=[common], help="add a drift and analyse the extremal set")
    d.add_argument("--input", required=True)
    d.add_argument("--kind", choices=("zero", "linear", "quadratic", "parabolic-burgers"), default="quadratic")
    d.add_argument("--param", type=float, default=-1.0)
    d.add_argument("--mu", type=float, nargs="*", default=[])
    d.add_argument("--u", type=float, nargs="*", default=[])

    b = sub.add_parser("burgers", parents=[common], help="Hopf–Cole solution from an initial potential")
    b.add_argument("--input", required=True)
    b.add_argument("--t", type=float, required=True)
    b.add_argument("--x", type=float, nargs=3, default=None, metavar=("XMIN", "XMAX", "N"))

    k = sub.add_parser("sticky", parents=[common], help="sticky-particle run and hull prediction")
    k.add_argument("--velocities", type=str, default=None, help="comma-separated velocities")
    k.add_argument("--positions", type=str, default=None, help="comma-separated positions")
    k.add_argument("--n", type=int, default=10, help="number of random particles")

    v = sub.add_parser("verify", parents=[common], help="run experiments and emit reports")
    v.add_argument("--experiment", action="append", default=[], choices=experiments.EXPERIMENT_IDS)
    v.add_argument("--replicas", type=int, default=None)
    v.add_argument("--workers", type=int, default=None)
    v.add_argument("--plots", action="store_true", help="also emit plot data")
    v.add_argument("--list", action="store_true", help="list experiment ids and exit")
    return parser


def _out_dir(args):
    return getattr(args, "out", None) or os.environ.get(OUT_ENV) or "."


def _fmt(args):
    return getattr(args, "format", "json")


def _seed(args, default=0):
    return getattr(args, "seed", default)


def _config(args):
    path = getattr(args, "config", None)
    if path is None:
        return None
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(args, files):
    experiments._write(files, _out_dir(args))
    for name in sorted(files):
        print(os.path.join(_out_dir(args), name))


def _read_path(name):
    with open(name, encoding="utf-8") as fh:
        return paths.loads_path(fh.read())


def _csv_rows(header, rows):
    lines = [",".join(header)]
    lines += [",".join(repr(float(v)) if not isinstance(v, (bool, np.bool_, int, np.integer)) else str(int(v))
                       for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def cmd_simulate(args):
    rng = synthesis.RngStream(_seed(args))
    t0, t1 = args.horizon
    if args.kind == "levy":
        cfg = _config(args)
        measure = json.loads(cfg).get("process", {}).get("measure") if cfg else None
        spec = synthesis.LevyMeasureSpec.from_dict(measure or experiments.BV_MEASURE)
        path = synthesis.simulate_bv_levy(spec, args.eps, (t0, t1), rng).path
    else:
        process = {"kind": args.kind, "phi": args.phi, "psi": args.psi}
        path = experiments._gaussian_path(process, paths.Grid.over(t0, t1, args.n), rng)
    if _fmt(args) == "json":
        files = {"path.json": paths.dumps_path(path)}
    elif isinstance(path, paths.JumpPath):
        files = {"path.csv": _csv_rows(["t", "size"], zip(path.times, path.sizes))}
    else:
        files = {"path.csv": _csv_rows(["t", "value"], zip(path.times, path.values))}
    _write(args, files)
    return 0


def cmd_hull(args):
    path = _read_path(args.input)
    if args.side == "superior":
        m, _ = hull.concave_majorant_of_path(path)
        e = hull.extremal_superior_times(path)
    else:
        m, _ = hull.convex_minorant_of_path(path)
        e = hull.extremal_inferior_times(path)
    if _fmt(args) == "json":
        files = {"majorant.json": m.to_json(), "extremal.json": e.to_json()}
    else:
        files = {"majorant.csv": m.to_csv(), "extremal.csv": e.to_csv()}
    _write(args, files)
    return 0


def cmd_drift(args):
    path = _read_path(args.input)
    f = drift.DriftSpec(args.kind, args.param)
    y = drift.add_drift(path, f)
    e = hull.extremal_superior_times(y)
    iso = drift.classify_isolation(y, f, e)
    report = {
        "drift": f.to_dict(),
        "extremal": json.loads(e.to_json()),
        "isolation": [{"t": float(t), "left_isolated": bool(li), "right_isolated": bool(ri),
                       "accumulation_candidate": bool(ac)}
                      for t, li, ri, ac in zip(iso.times, iso.left_isolated, iso.right_isolated,
                                               iso.accumulation_candidate)],
    }
    if args.mu and args.u:
        if not f.is_concave:
            raise ExtremalHullError("exceeding times need a concave drift")
        report["exceeding_times"] = [{"mu": mu, "u": u, "times": drift.exceeding_times(y, f, mu, u)}
                                     for mu in args.mu for u in args.u]
    if _fmt(args) == "json":
        files = {"drift.json": json.dumps(report, indent=2)}
    else:
        rows = [(r["t"], r["left_isolated"], r["right_isolated"], r["accumulation_candidate"])
                for r in report["isolation"]]
        files = {"drift.csv": _csv_rows(["t", "left_isolated", "right_isolated", "accumulation_candidate"], rows)}
    _write(args, files)
    return 0


def cmd_burgers(args):
    psi0 = _read_path(args.input)
    field = burgers.drifted_potential(psi0, args.t)
    if args.x is None:
        lo, hi = field.horizon
        x = np.linspace(lo - 1.0, hi + 1.0, 401)
    else:
        x = np.linspace(args.x[0], args.x[1], int(args.x[2]))
    psi = burgers.hopf_cole_potential(field, x)
    a = field.a
    lag = burgers.lagrangian(field, a)
    shocks = burgers.shock_intervals(field)
    if _fmt(args) == "csv":
        files = {"potential.csv": burgers.potential_to_csv(x, psi),
                 "lagrangian.csv": burgers.lagrangian_to_csv(a, lag),
                 "shocks.csv": shocks.to_csv()}
    else:
        files = {"burgers.json": json.dumps({
            "t": field.t,
            "potential": [[float(u), float(v)] for u, v in zip(x, psi)],
            "lagrangian": [[float(u), float(v)] for u, v in zip(a, lag)],
            "shocks": json.loads(shocks.to_json()),
        }, indent=2)}
    _write(args, files)
    return 0


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def cmd_sticky(args):
    if args.velocities is not None:
        v = np.array(_floats(args.velocities))
    else:
        v = synthesis.RngStream(_seed(args)).generator().standard_normal(args.n)
    x = np.array(_floats(args.positions)) if args.positions else np.arange(v.size, dtype=float)
    start = sticky.init_system(x, v)
    final, events = sticky.run_to_completion(start)
    files = {"events.csv": sticky.events_to_csv(events, start),
             "partition.json": sticky.partition_to_json(final.partition)}
    status = 0
    if args.positions is None:
        agree, detail = sticky.verify_discrete_theorem(v)
        files["verify.json"] = json.dumps({"agree": agree, **detail}, indent=2)
        status = 0 if agree else 1
    _write(args, files)
    return status


def cmd_verify(args):
    if args.list:
        for name in experiments.EXPERIMENT_IDS:
            print(name)
        return 0
    text = _config(args)
    if text is not None:
        configs = experiments.load_configs(text)
    elif args.experiment:
        configs = [experiments.ExperimentConfig.default(e) for e in args.experiment]
    else:
        raise ExtremalHullError("verify needs --config or --experiment (see --list)")
    status = 0
    for cfg in configs:
        overrides = {}
        if hasattr(args, "seed"):
            overrides["seed"] = args.seed
        if args.replicas is not None:
            overrides["replicas"] = args.replicas
        if args.workers is not None:
            overrides["workers"] = args.workers
        if overrides:
            cfg = experiments.ExperimentConfig.from_dict({**cfg.to_dict(), **overrides})
        report = experiments.run_experiment(cfg)
        fmt = getattr(args, "format", None) or cfg.output.get("format", "json")
        out = getattr(args, "out", None) or cfg.output.get("dir") or _out_dir(args)
        files = experiments.emit_report(report, fmt)
        if args.plots:
            files.update(experiments.emit_plot_data(report))
        experiments._write(files, out)
        for v in report.verdicts:
            mark = "PASS" if v["passed"] else "FAIL"
            print(f"{mark} {report.experiment} {v['metric']} = {v['value']} ({v['op']} {v['threshold']})")
        if not report.passed:
            status = 1
    return status


COMMANDS = {
    "simulate": cmd_simulate,
    "hull": cmd_hull,
    "drift": cmd_drift,
    "burgers": cmd_burgers,
    "sticky": cmd_sticky,
    "verify": cmd_verify,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ExtremalHullError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
