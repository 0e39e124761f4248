"""Command-line front end.

Subcommands: ``precompute``, ``simulate``, ``compare``, ``project`` and
``ingest``. Run reports are CSV with the columns
``t_min,sigma_mAmin,remaining_metric,remaining_pct`` (one row per window,
LF line endings); ``remaining_metric`` uses 255·10^5 as a full battery.

Exit codes: 0 success, 1 usage, 2 validation, 3 numeric fault.
"""

from __future__ import annotations

import argparse
import re
import sys
from pathlib import Path

import numpy as np

from wsnbattery import __version__
from wsnbattery.core import SCALES, ConfigError, load_config, precompute
from wsnbattery.fixedpoint import NumericOverflow
from wsnbattery.projection import DEFAULT_DISCARD_MIN, NoDecayError, project_lifetime
from wsnbattery.runs import (REPORT_HEADER, TIERS, drift_slope, read_report, run_tier,
                             write_atomic, write_meta)
from wsnbattery.workload import (RDC_KINDS, ROLES, SCENARIOS, TraceError, build_scenario,
                                 generate_rdc, named_scenario, parse_trace)

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_NUMERIC = 0, 1, 2, 3

_UNITS = {"s": 1 / 60, "sec": 1 / 60, "min": 1.0, "m": 1.0, "h": 60.0, "d": 1440.0}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_duration(text: str) -> float:
    """``90s``, ``10min``, ``60h``, ``2d`` or a bare number of minutes -> minutes."""
    m = re.fullmatch(r"\s*([0-9]*\.?[0-9]+(?:[eE][-+]?\d+)?)\s*([a-z]*)\s*", text)
    if not m or m.group(2) not in ("", *_UNITS):
        raise argparse.ArgumentTypeError(f"bad duration {text!r} (use s, min, h or d)")
    return float(m.group(1)) * _UNITS.get(m.group(2), 1.0)


def _emit(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        write_atomic(out, text)


def _profile(cfg, name):
    if name not in cfg.profiles:
        raise ConfigError(f"unknown profile {name!r}; known: {', '.join(sorted(cfg.profiles))}")
    return cfg.profiles[name]


def cmd_precompute(args) -> int:
    cfg = load_config(args.config)
    d = precompute(cfg.params, cfg.idle_fraction)
    reals = d.reals()
    keys = list(SCALES)
    sys.stdout.write("," + ",".join(keys) + "\n")
    sys.stdout.write("R," + ",".join(f"{reals[k]:.6g}" for k in keys) + "\n")
    sys.stdout.write("I," + ",".join(str(v) for v in d.scaled.as_tuple()) + "\n")
    return EXIT_OK


def _windows_for(args, cfg):
    delta_ms = cfg.params.delta_ms
    if getattr(args, "scenario", None):
        return build_scenario(named_scenario(args.scenario, args.rdc, args.seed), delta_ms)
    return generate_rdc(args.rdc, args.rate, args.role, args.duration, args.seed, delta_ms)


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    profile = _profile(cfg, args.profile)
    windows = _windows_for(args, cfg)
    report = run_tier(windows, args.estimator, profile, cfg)
    _emit(report.to_csv(), args.out)
    if args.out not in (None, "-"):
        write_meta(args.out, {
            "profile": profile.name, "rdc": args.rdc, "rate": args.rate, "role": args.role,
            "duration_min": args.duration, "scenario": args.scenario,
            "estimator": args.estimator, "seed": args.seed, "config_hash": cfg.digest(),
            "version": __version__})
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = load_config(args.config)
    profile = _profile(cfg, args.profile)
    tiers = [t.strip() for t in args.tiers.split(",")]
    if len(tiers) != 2 or any(t not in TIERS for t in tiers):
        raise UsageError(f"--tiers needs two of {', '.join(TIERS)}, got {args.tiers!r}")
    windows = _windows_for(args, cfg)
    a, b = (run_tier(windows, t, profile, cfg) for t in tiers)
    diff = a.metric.astype(float) - b.metric.astype(float)
    lines = [f"t_min,sigma_{tiers[0]},sigma_{tiers[1]},metric_{tiers[0]},metric_{tiers[1]},difference"]
    for row in zip(a.t_min.tolist(), a.sigma.tolist(), b.sigma.tolist(),
                   a.metric.tolist(), b.metric.tolist(), diff.tolist()):
        lines.append("{:.6f},{:.6f},{:.6f},{:.3f},{:.3f},{:.3f}".format(*row))
    _emit("\n".join(lines) + "\n", args.out)
    if len(diff):
        rel = np.abs(a.sigma - b.sigma) / np.where(b.sigma > 0, b.sigma, 1.0)
        sys.stderr.write(
            f"windows={len(diff)} max_abs_difference={np.abs(diff).max():.3f} "
            f"drift_per_1e5_windows={drift_slope(diff) * 1e5:.3f} "
            f"max_rel_sigma_error={rel.max():.6f}\n")
    return EXIT_OK


def cmd_project(args) -> int:
    text = Path(args.input).read_text()
    report = read_report(text)
    name = args.scenario or Path(args.input).stem
    fit, t0 = project_lifetime(report.t_min, report.pct, args.discard)
    sys.stdout.write("scenario,slope_per_day,projected_days,rms\n")
    sys.stdout.write(f"{name},{fit.slope * 1440:.6f},{t0 / 1440:.4f},{fit.rms:.6f}\n")
    return EXIT_OK


def cmd_ingest(args) -> int:
    cfg = load_config(args.config)
    profile = _profile(cfg, args.profile)
    try:
        text = Path(args.trace).read_text()
    except OSError as exc:
        raise TraceError(f"cannot read trace: {exc}") from None
    windows = parse_trace(text, cfg.params.delta_ms)
    report = run_tier(windows, args.estimator, profile, cfg)
    _emit(report.to_csv(), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="wsnbattery", description=__doc__,
                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--config", help="battery config file (default: 880 mAh, beta=1, 2 s)")
        sp.add_argument("--profile", default="sky", help="current profile (default: sky)")

    def workload(sp):
        sp.add_argument("--rdc", choices=RDC_KINDS, default="contikimac")
        sp.add_argument("--rate", type=float, default=1.0, help="packets per minute")
        sp.add_argument("--role", choices=ROLES, default="sender")
        sp.add_argument("--duration", type=parse_duration, default=60.0,
                        help="simulated time, e.g. 90s, 10min, 60h, 2d (default 60min)")
        sp.add_argument("--scenario", choices=SCENARIOS,
                        help="named multi-phase scenario instead of a single RDC phase")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", help="output CSV (default: stdout)")

    sp = sub.add_parser("precompute", help="print the offline constants (real and integer rows)")
    sp.add_argument("--config")
    sp.set_defaults(func=cmd_precompute)

    sp = sub.add_parser("simulate", help="run a workload through one estimator tier",
                        description=f"Writes a run report CSV: {REPORT_HEADER}")
    common(sp)
    workload(sp)
    sp.add_argument("--estimator", choices=TIERS, default="float")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("compare", help="run two tiers on the same workload",
                        description="CSV columns: t_min,sigma_A,sigma_B,metric_A,metric_B,difference")
    common(sp)
    workload(sp)
    sp.add_argument("--tiers", default="float,int", help="two comma-separated tiers")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("project", help="extrapolate lifetime from a run report",
                        description="Prints scenario,slope_per_day,projected_days,rms")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--scenario", help="label for the summary line (default: file stem)")
    sp.add_argument("--discard", type=parse_duration, default=DEFAULT_DISCARD_MIN,
                    help="initial transient to drop before fitting (default 10min)")
    sp.set_defaults(func=cmd_project)

    sp = sub.add_parser("ingest", help="run a logged trace through one tier",
                        description="Trace CSV: start_ms,end_ms,state or window,cpu_ms,lpm_ms,tx_ms,rx_ms")
    common(sp)
    sp.add_argument("--trace", required=True)
    sp.add_argument("--estimator", choices=TIERS, default="int")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_ingest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"wsnbattery: error: {exc}\n")
        return EXIT_USAGE
    except NumericOverflow as exc:
        sys.stderr.write(f"wsnbattery: numeric fault: {exc}\n")
        return EXIT_NUMERIC
    except NoDecayError as exc:
        sys.stderr.write(f"wsnbattery: {exc}\n")
        return EXIT_VALIDATION
    except (ConfigError, TraceError, ValueError, OSError) as exc:
        sys.stderr.write(f"wsnbattery: error: {exc}\n")
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
