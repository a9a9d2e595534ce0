"""Command line interface.

    freqtrack run <preset|config.yaml> [--out DIR] [--seed N] [--dt S] [--detrend] [--input CSV]
    freqtrack list-presets
    freqtrack check <preset|config.yaml> [--seed N] [--dt S]
    freqtrack analyze <trace.csv> --omega0 W [--skip S] [--tail F]
    freqtrack show-preset <preset>
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys

from . import analysis
from .config import dump_config, load_config
from .errors import FreqTrackError, NotConvergedError, NotEnoughDecayError
from .io import emit_suite_report, read_trace_csv
from .scenarios import PRESET_DESCRIPTIONS, PRESETS, get_preset, run_suite, with_overrides


def _load_suite(target, seed=None, dt=None, detrend=False, input_path=None):
    if target in PRESETS:
        return get_preset(target, seed=seed, dt=dt, input_path=input_path, detrend=detrend)
    if os.path.exists(target):
        return with_overrides(load_config(target), seed=seed, dt=dt, detrend=detrend or None)
    raise FreqTrackError(f"{target!r} is neither a preset ({', '.join(sorted(PRESETS))}) nor a config file")


def _print_checks(result, out):
    for where, c in result.all_checks():
        out.write(f"{'PASS' if c.passed else 'FAIL'}  {where}:{c.name}  {c.detail}\n")


def cmd_run(args):
    suite = _load_suite(args.target, args.seed, args.dt, args.detrend, args.input)
    result = run_suite(suite)
    paths = emit_suite_report(result, args.out)
    _print_checks(result, sys.stdout)
    print(f"wrote {len(paths)} files to {args.out}")
    return 0


def cmd_check(args):
    suite = _load_suite(args.target, args.seed, args.dt, args.detrend, args.input)
    result = run_suite(suite)
    _print_checks(result, sys.stdout)
    print("PASS" if result.passed else "FAIL")
    return 0 if result.passed else 1


def cmd_list(args):
    for name in sorted(PRESETS):
        print(f"{name:10s} {PRESET_DESCRIPTIONS.get(name, '')}")
    return 0


def cmd_show(args):
    kwargs = {"input_path": "measured.csv"} if args.preset == "table1" else {}
    sys.stdout.write(dump_config(get_preset(args.preset, **kwargs)))
    return 0


def cmd_analyze(args):
    trace = read_trace_csv(args.trace)
    skip = args.skip if args.skip is not None else analysis.default_transient_skip(args.omega0)
    out = {"omega0": args.omega0, "transient_skip": skip}
    try:
        fit = analysis.fit_exponential_window(trace, args.omega0, skip)
        out.update(beta_hat=fit.rate, fit_window=[fit.t_start, fit.t_end])
    except NotEnoughDecayError as exc:
        out["beta_hat"] = None
        out["fit_error"] = str(exc)
    try:
        st = analysis.residual_stats(trace, args.omega0, args.tail)
        out.update(epsilon_ss_mean=st.mean, epsilon_ss_var=st.variance)
    except NotConvergedError as exc:
        out["residual_error"] = str(exc)
    out["time_to_2pct"] = analysis.time_to_band(trace, args.omega0, 0.02)
    if not math.isfinite(out["time_to_2pct"]):
        out["time_to_2pct"] = None
    print(json.dumps(out, indent=2))
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="freqtrack", description="Frequency-estimator simulation harness")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("target", help="preset name or YAML config path")
        sp.add_argument("--seed", type=int, default=None, help="noise seed override")
        sp.add_argument("--dt", type=float, default=None, help="integration step override, s")
        sp.add_argument("--detrend", action="store_true", help="subtract the mean of file-backed signals")
        sp.add_argument("--input", default=None, help="measured t,sigma CSV (preset table1)")

    r = sub.add_parser("run", help="run a preset or config and write trace CSVs + summaries")
    common(r)
    r.add_argument("--out", default="out", help="output directory (default: out)")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("check", help="run and evaluate checks; exit status 1 on any failure")
    common(c)
    c.set_defaults(func=cmd_check)

    ls = sub.add_parser("list-presets", help="list the scenario presets")
    ls.set_defaults(func=cmd_list)

    sh = sub.add_parser("show-preset", help="print a preset as a YAML config")
    sh.add_argument("preset", choices=sorted(PRESETS))
    sh.set_defaults(func=cmd_show)

    a = sub.add_parser("analyze", help="rate fit and residual statistics of an emitted trace CSV")
    a.add_argument("trace")
    a.add_argument("--omega0", type=float, required=True)
    a.add_argument("--skip", type=float, default=None, help="transient skip, s (default 3 periods)")
    a.add_argument("--tail", type=float, default=0.25, help="steady-state tail fraction")
    a.set_defaults(func=cmd_analyze)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (FreqTrackError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
