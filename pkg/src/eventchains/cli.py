"""Command-line front end.

Subcommands: analyze (chain enumeration), simulate (Monte-Carlo),
enumerate (exhaustive oracle), sweep (one parameter over a range),
compare (analyze vs simulate with significance flags), debug
(inspection helpers).  Exit codes: 0 ok, 1 model/runtime error,
2 usage error, 3 failed comparison.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from . import metrics as metrics_mod
from .engine import run_ecc
from .errors import BudgetExceeded, ConfigError, EmptyChainSet, TreeTooLarge
from .exact import enumerate_exact
from .params import DEFAULTS, parse_config_file, validate_config
from .schedule import StateIndex, lambda_set
from .sim import simulate

EXIT_OK, EXIT_ERROR, EXIT_USAGE, EXIT_COMPARE = 0, 1, 2, 3

_OVERRIDE_KEYS = [k for k in DEFAULTS if k != "n_nodes"]


def _add_model_args(p):
    p.add_argument("--nodes", "-n", type=int, help="number of contending nodes")
    p.add_argument("--theta", type=float, help="chain probability threshold (0 = exhaustive)")
    p.add_argument("--workers", type=int,
                   default=None, help="engine worker processes (default $ECC_WORKERS or 1)")
    p.add_argument("--config", help="flat key=value configuration file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any configuration key (repeatable)")


def _add_output_args(p):
    p.add_argument("--format", choices=("json", "csv"), default="csv")
    p.add_argument("--out", help="write the report to this path instead of stdout")
    p.add_argument("--pdf-out", help="write the latency PDF as t_ms,p CSV rows")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="eventchains",
        description="Performance analysis of the 802.15.4 unslotted CSMA/CA "
                    "for N simultaneously contending nodes.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="enumerate outcome chains and derive metrics")
    _add_model_args(p)
    _add_output_args(p)
    p.add_argument("--dump-chains", help="write finalized chains, one per line")
    p.add_argument("--progress", action="store_true",
                   help="report examined/finalized chain rates on stderr")

    p = sub.add_parser("simulate", help="Monte-Carlo simulation of the MAC")
    _add_model_args(p)
    _add_output_args(p)
    p.add_argument("--runs", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=1)

    p = sub.add_parser("enumerate", help="exhaustive joint-draw oracle (tiny instances)")
    _add_model_args(p)
    p.add_argument("--max-leaves", type=int, default=10_000_000)

    p = sub.add_parser("sweep", help="run analyze over a parameter range")
    _add_model_args(p)
    _add_output_args(p)
    p.add_argument("--param", required=True, help="configuration key to sweep")
    p.add_argument("--from", dest="lo", type=float, required=True)
    p.add_argument("--to", dest="hi", type=float, required=True)
    p.add_argument("--step", type=float, default=1.0)

    p = sub.add_parser("compare", help="analyze vs simulate, flag disagreements")
    _add_model_args(p)
    p.add_argument("--runs", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--sigma", type=float, default=3.0, help="tolerance in standard errors")

    p = sub.add_parser("debug", help="inspection helpers")
    _add_model_args(p)
    p.add_argument("what", choices=("lambda",))
    p.add_argument("i", type=int)
    p.add_argument("j", type=int)
    return ap


def _resolve_model(args):
    raw = {}
    if args.config:
        raw.update(parse_config_file(args.config))
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        raw[key.strip()] = value.strip()
    if args.nodes is not None:
        raw["n_nodes"] = args.nodes
    if args.theta is not None:
        raw["theta"] = args.theta
    workers = args.workers
    if workers is None:
        workers = int(os.environ.get("ECC_WORKERS", raw.get("workers", 1)))
    raw["workers"] = workers
    return validate_config(raw)


def _emit_report(model, report, args):
    if args.format == "json":
        text = json.dumps({"n": model.n_nodes, "theta": model.theta,
                           **report.as_dict()}, indent=2) + "\n"
    else:
        import io
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(metrics_mod.CSV_HEADER)
        w.writerow(report.csv_row(model))
        text = buf.getvalue()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.pdf_out:
        sym_s = model.timing.symbol_duration_s
        with open(args.pdf_out, "w", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["t_ms", "p"])
            for t_sym, p in report.latency_pdf.items():
                w.writerow([f"{t_sym * sym_s * 1e3:.6f}", f"{p:.12g}"])


def _progress_printer():
    import time as _time
    t0 = _time.perf_counter()

    def emit(stats):
        dt = max(_time.perf_counter() - t0, 1e-9)
        sys.stderr.write(f"\rexamined={stats.examined} finalized={stats.finalized} "
                         f"({stats.examined / dt:.0f}/s)")
        sys.stderr.flush()

    return emit


def _cmd_analyze(args):
    model = _resolve_model(args)
    progress = _progress_printer() if getattr(args, "progress", False) else None
    result = run_ecc(model, progress=progress)
    if progress is not None:
        sys.stderr.write("\n")
    if args.dump_chains:
        with open(args.dump_chains, "w", encoding="utf-8") as fh:
            for chain in result.chains:
                fh.write(chain.to_line() + "\n")
    _emit_report(model, result.report(), args)
    return EXIT_OK


def _sim_report_to_metrics(sim):
    return metrics_mod.MetricsReport(
        coverage=1.0,
        delivery_ratio=sim.delivery_ratio,
        latency_pdf=dict(sim.latency_hist),
        latency_mean=sim.latency_mean,
        energy_total=sim.energy_mean,
        chain_count=sim.runs,
        wall_time=0.0,
    )


def _cmd_simulate(args):
    model = _resolve_model(args)
    sim = simulate(model, runs=args.runs, seed=args.seed)
    _emit_report(model, _sim_report_to_metrics(sim), args)
    return EXIT_OK


def _cmd_enumerate(args):
    model = _resolve_model(args)
    dist = enumerate_exact(model, max_leaves=args.max_leaves)
    for sig in sorted(dist.outcomes, key=lambda s: (len(s), s)):
        seq = " ".join(f"{k}@{t}" for k, t in sig)
        sys.stdout.write(f"p={float(dist.outcomes[sig])!r} [{seq}]\n")
    sys.stdout.write(f"# outcomes={len(dist.outcomes)} leaves={dist.leaves} "
                     f"total_mass={float(dist.total_mass())!r} "
                     f"delivery_ratio={float(dist.delivery_ratio):.6f}\n")
    return EXIT_OK


def _cmd_sweep(args):
    values = []
    v = args.lo
    while v <= args.hi + 1e-12:
        values.append(v)
        v += args.step
    rows = []
    for v in values:
        sweep_set = list(args.set) + [f"{args.param}={int(v) if float(v).is_integer() else v}"]
        ns = argparse.Namespace(**vars(args))
        ns.set = sweep_set
        model = _resolve_model(ns)
        result = run_ecc(model)
        rows.append((v, model, result.report()))
    w = csv.writer(sys.stdout if not args.out else open(args.out, "w", newline=""))
    w.writerow([args.param] + metrics_mod.CSV_HEADER)
    for v, model, report in rows:
        w.writerow([v] + report.csv_row(model))
    return EXIT_OK


def _cmd_compare(args):
    model = _resolve_model(args)
    result = run_ecc(model)
    report = result.report()
    sim = simulate(model, runs=args.runs, seed=args.seed)
    checks = [
        ("delivery_ratio", report.delivery_ratio, sim.delivery_ratio, sim.delivery_se),
        ("latency_mean_s", report.latency_mean, sim.latency_mean, sim.latency_se),
    ]
    failed = False
    for name, a_val, s_val, se in checks:
        se = max(se, 1e-300)
        n_sigma = abs(a_val - s_val) / se
        flag = "ok" if n_sigma <= args.sigma else "DISAGREE"
        if n_sigma > args.sigma:
            failed = True
        sys.stdout.write(f"{name}: analysis={a_val:.6g} sim={s_val:.6g} "
                         f"se={se:.3g} sigma={n_sigma:.2f} {flag}\n")
    return EXIT_COMPARE if failed else EXIT_OK


def _cmd_debug(args):
    model = _resolve_model(args)
    if args.what == "lambda":
        inst = lambda_set(model, StateIndex(args.i, args.j))
        sys.stdout.write(" ".join(str(t) for t in inst) + "\n")
    return EXIT_OK


_HANDLERS = {
    "analyze": _cmd_analyze,
    "simulate": _cmd_simulate,
    "enumerate": _cmd_enumerate,
    "sweep": _cmd_sweep,
    "compare": _cmd_compare,
    "debug": _cmd_debug,
}


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return _HANDLERS[args.command](args)
    except (ConfigError, EmptyChainSet, TreeTooLarge, BudgetExceeded, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
