"""Command-line interface: ``logperiodic {fit,extrema,superbubble,synth}``.

Exit codes: 0 success, 1 usage error (bad flags, missing files,
inconsistent configuration), 2 computation error (bad data, failed fit).
Reports are JSON documents; plot data is plain CSV.  Each report embeds a
run manifest and each CSV written to a file gets a ``.manifest.json``
sidecar.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import logging
import math
import sys
from importlib import metadata
from pathlib import Path

import numpy as np

from .exceptions import InvalidConfig, LogPeriodicError
from .fit import DAY, FitConfig, FitResult, fit_lppl
from .forecast import SuperBubbleThresholds, detect_superbubble, extrema_times
from .ingest import date_to_t, fractional_year_to_date, parse_csv, parse_date, to_csv
from .model import ModelParams, Side, evaluate_model
from .synth import SynthConfig, generate, superbubble_params

log = logging.getLogger("logperiodic")

EXIT_OK, EXIT_USAGE, EXIT_COMPUTE = 0, 1, 2
REPORT_FORMAT = "logperiodic-report/1"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def parse_time(text: str) -> float:
    """Fractional year from either a number (``2008.5``) or an ISO date."""
    try:
        value = float(text)
    except ValueError:
        return date_to_t(parse_date(text))
    if not math.isfinite(value):
        raise InvalidConfig(f"non-finite time {text!r}")
    return value


def _time_arg(text: str) -> float:
    try:
        return parse_time(text)
    except LogPeriodicError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def manifest(command: str, args: argparse.Namespace, input_bytes: bytes | None = None) -> dict:
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}
    return {
        "command": command,
        "config": json.loads(json.dumps(config, default=str)),
        "input_sha256": None if input_bytes is None else hashlib.sha256(input_bytes).hexdigest(),
        "tool_version": tool_version(),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }


def _date_or_none(t: float) -> str | None:
    try:
        return fractional_year_to_date(t).isoformat()
    except LogPeriodicError:
        return None


def fit_to_dict(result: FitResult) -> dict:
    params = result.params.as_dict()
    params["t_crit_date"] = _date_or_none(result.params.t_crit)
    return {
        "params": params,
        "rmse": result.rmse,
        "sse": result.sse,
        "n_points": result.n_points,
        "degenerate": result.degenerate,
        "fit_log_price": result.fit_log_price,
        "grid": {
            "tc_grid": list(result.tc_grid) if result.tc_grid else None,
            "alpha_grid": list(result.config.alpha_grid),
            "lambdas": list(result.config.lambdas),
            "refine_rounds": result.config.refine_rounds,
            "side": result.config.side.value,
        },
        "trace_points": int(result.objective_trace.shape[0]),
    }


def write_report(report: dict, path: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=False, allow_nan=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def read_report(path) -> dict:
    """Load a report written by this tool."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if data.get("format") != REPORT_FORMAT:
        raise InvalidConfig(f"{path} is not a {REPORT_FORMAT} document")
    return data


def _write_csv(text: str, path: str | None, meta: dict) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    Path(path).write_text(text, encoding="utf-8", newline="\n")
    Path(str(path) + ".manifest.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")


def _read_input(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read input file {path}: {exc.strerror or exc}") from None


def _fit_config(args, tc_min=None, tc_max=None, window=None) -> FitConfig:
    tc_grid = None
    if tc_min is not None or tc_max is not None:
        if tc_min is None or tc_max is None:
            raise InvalidConfig("--tc-min and --tc-max must be given together")
        tc_grid = (tc_min, tc_max, args.tc_step)
    return FitConfig(
        side=Side.parse(args.side),
        lambdas=tuple(args.lam),
        tc_grid=tc_grid,
        alpha_grid=(args.alpha_min, args.alpha_max, args.alpha_step),
        refine_rounds=args.refine_rounds,
        fit_log_price=args.log_price,
        window=window,
    )


def _window(start, end):
    if start is None and end is None:
        return None
    return (-math.inf if start is None else start, math.inf if end is None else end)


# ---------------------------------------------------------------- commands


def cmd_fit(args) -> int:
    raw = _read_input(args.input)
    series = parse_csv(raw, label=args.input)
    config = _fit_config(args, args.tc_min, args.tc_max, _window(args.window_start, args.window_end))
    window_series = config.apply_window(series)
    result = fit_lppl(window_series, config)

    report = {
        "format": REPORT_FORMAT,
        "kind": "fit",
        "manifest": manifest("fit", args, raw),
        "data": {
            "label": series.label,
            "t_first": float(window_series.t[0]),
            "t_last": float(window_series.t[-1]),
            "n_points": len(window_series),
        },
        "fit": fit_to_dict(result),
    }
    write_report(report, args.out)

    curve_path = args.curve_out
    if curve_path is None and args.out is not None:
        curve_path = str(Path(args.out).with_suffix(".curve.csv"))
    if curve_path is not None:
        observed = np.log(window_series.price) if result.fit_log_price else window_series.price
        model = np.atleast_1d(evaluate_model(result.params, window_series.t))
        rows = ["t,observed,model"]
        for t, obs, fitted in zip(window_series.t, observed, model):
            rows.append(f"{float(t)!r},{float(obs)!r},{float(fitted)!r}")
        _write_csv("\n".join(rows) + "\n", curve_path, report["manifest"])
    return EXIT_OK


def _params_from_args(args) -> ModelParams:
    if args.report:
        data = read_report(args.report)
        section = data.get("fit") or data.get(args.report_fit or "long_fit")
        if section is None:
            raise InvalidConfig(f"{args.report} holds no fit parameters")
        return ModelParams.from_dict(section["params"])
    if args.t_crit is None:
        raise UsageError("either --report or --t-crit (with oscillation flags) is required")
    fields = dict(t_crit=args.t_crit, alpha=args.alpha, lam=args.lam, side=Side.parse(args.side))
    if args.amplitude is not None:
        return ModelParams.from_amplitude_phase(args.amplitude, args.phase, **fields)
    return ModelParams(c_cos=args.c_cos, d_sin=args.d_sin, **fields)


def cmd_extrema(args) -> int:
    params = _params_from_args(args)
    maxima, minima = extrema_times(params, args.t_from, args.t_to, min_distance=args.min_distance)
    rows = sorted(
        [("max", t, x) for t, x in zip(maxima.times, maxima.distances)]
        + [("min", t, x) for t, x in zip(minima.times, minima.distances)],
        key=lambda row: row[1],
    )
    text = "kind,t,x\n" + "".join(f"{k},{float(t)!r},{float(x)!r}\n" for k, t, x in rows)
    _write_csv(text, args.out, manifest("extrema", args))
    return EXIT_OK


def cmd_superbubble(args) -> int:
    raw = _read_input(args.input)
    series = parse_csv(raw, label=args.input)
    args.side = "pre"
    long_config = _fit_config(args, args.long_tc_min, args.long_tc_max, (args.long_start, args.long_end))
    short_config = _fit_config(args, args.short_tc_min, args.short_tc_max, (args.short_start, args.short_end))
    thresholds = SuperBubbleThresholds(args.min_gap, args.max_rel_rmse, args.min_sse_ratio)
    result = detect_superbubble(series, long_config, short_config, thresholds)
    report = {
        "format": REPORT_FORMAT,
        "kind": "superbubble",
        "manifest": manifest("superbubble", args, raw),
        "is_superbubble": result.is_superbubble,
        "gap_years": result.gap_years,
        "short_rel_rmse": result.rel_rmse,
        "sse_ratio": result.sse_ratio,
        "checks": result.checks,
        "thresholds": thresholds.as_dict(),
        "long_fit": fit_to_dict(result.long_fit),
        "short_fit": fit_to_dict(result.short_fit),
    }
    write_report(report, args.out)
    return EXIT_OK


def cmd_synth(args) -> int:
    if not args.step_days > 0:
        raise UsageError("--step-days must be positive")
    base = ModelParams(
        t_crit=args.t_crit, alpha=args.alpha, lam=args.lam, p_crit=args.p_crit,
        a_env=args.a_env, c_cos=args.c_cos, d_sin=args.d_sin, side=Side.parse(args.side),
    )
    overlay = None
    if args.sb_t_crit is not None:
        sb = superbubble_params(
            args.sb_t_crit, args.sb_start, args.sb_height,
            alpha=args.sb_alpha, oscillation=args.sb_oscillation, lam=args.lam, phase=args.sb_phase,
        )
        overlay = (sb, args.sb_start)
    config = SynthConfig(
        base=base,
        t_from=args.t_from,
        t_to=args.t_to,
        step=args.step_days * DAY,
        superbubble=overlay,
        noise_sigma_rel=args.noise,
        seed=args.seed,
        snap_to_days=True,
    )
    series = generate(config)
    _write_csv(to_csv(series), args.out, manifest("synth", args))
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _add_grid_flags(p, with_tc: bool = True):
    p.add_argument("--lambda", dest="lam", type=float, action="append", default=None,
                   help="scaling factor; repeat to scan several (default 2)")
    if with_tc:
        p.add_argument("--tc-min", type=_time_arg)
        p.add_argument("--tc-max", type=_time_arg)
    p.add_argument("--tc-step", type=float, default=DAY, help="t_crit grid step in years (default 1/365)")
    p.add_argument("--alpha-min", type=float, default=0.05)
    p.add_argument("--alpha-max", type=float, default=1.5)
    p.add_argument("--alpha-step", type=float, default=0.05)
    p.add_argument("--refine-rounds", type=int, default=6)
    p.add_argument("--log-price", action="store_true", help="fit log(price) instead of price")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="logperiodic", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="fit the model to a date,price CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--window-start", type=_time_arg)
    p.add_argument("--window-end", type=_time_arg)
    p.add_argument("--side", choices=["pre", "post"], default="pre")
    _add_grid_flags(p)
    p.add_argument("--out", help="report path (default stdout)")
    p.add_argument("--curve-out", help="t,observed,model CSV (default derived from --out)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("extrema", help="tabulate oscillation extrema")
    p.add_argument("--report", help="fit or superbubble report to take parameters from")
    p.add_argument("--report-fit", choices=["long_fit", "short_fit"], help="which fit of a superbubble report")
    p.add_argument("--t-crit", type=_time_arg)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--lambda", dest="lam", type=float, default=2.0)
    p.add_argument("--c-cos", type=float, default=1.0)
    p.add_argument("--d-sin", type=float, default=0.0)
    p.add_argument("--amplitude", type=float, help="oscillation amplitude B (overrides --c-cos/--d-sin)")
    p.add_argument("--phase", type=float, default=0.0, help="oscillation phase in radians, with --amplitude")
    p.add_argument("--side", choices=["pre", "post"], default="pre")
    p.add_argument("--from", dest="t_from", type=_time_arg, required=True)
    p.add_argument("--to", dest="t_to", type=_time_arg, required=True)
    p.add_argument("--min-distance", type=float, default=DAY, help="closest extremum to t_crit, in years")
    p.add_argument("--out")
    p.set_defaults(func=cmd_extrema)

    p = sub.add_parser("superbubble", help="two-tier long/short window detection")
    p.add_argument("--input", required=True)
    p.add_argument("--long-start", type=_time_arg, required=True)
    p.add_argument("--long-end", type=_time_arg, required=True)
    p.add_argument("--short-start", type=_time_arg, required=True)
    p.add_argument("--short-end", type=_time_arg, required=True)
    p.add_argument("--long-tc-min", type=_time_arg)
    p.add_argument("--long-tc-max", type=_time_arg)
    p.add_argument("--short-tc-min", type=_time_arg)
    p.add_argument("--short-tc-max", type=_time_arg)
    _add_grid_flags(p, with_tc=False)
    p.add_argument("--min-gap", type=float, default=0.5)
    p.add_argument("--max-rel-rmse", type=float, default=0.05)
    p.add_argument("--min-sse-ratio", type=float, default=2.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_superbubble)

    p = sub.add_parser("synth", help="write a synthetic date,price CSV")
    p.add_argument("--t-crit", type=_time_arg, default=2010.75)
    p.add_argument("--alpha", type=float, default=0.6)
    p.add_argument("--lambda", dest="lam", type=float, default=2.0)
    p.add_argument("--p-crit", type=float, default=150.0)
    p.add_argument("--a-env", type=float, default=-25.0)
    p.add_argument("--c-cos", type=float, default=2.5)
    p.add_argument("--d-sin", type=float, default=0.0)
    p.add_argument("--side", choices=["pre", "post"], default="pre")
    p.add_argument("--from", dest="t_from", type=_time_arg, default=1999.5)
    p.add_argument("--to", dest="t_to", type=_time_arg, default=2008.4)
    p.add_argument("--step-days", type=float, default=1.0)
    p.add_argument("--noise", type=float, default=0.0, help="noise sigma as a fraction of mean price")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sb-t-crit", type=_time_arg, help="add a super-bubble overlay with this critical time")
    p.add_argument("--sb-alpha", type=float, default=0.5)
    p.add_argument("--sb-height", type=float, default=3.0, help="overlay rise from ramp start to its t_crit")
    p.add_argument("--sb-oscillation", type=float, default=1.0, help="overlay amplitude / envelope coefficient")
    p.add_argument("--sb-phase", type=float, default=0.0)
    p.add_argument("--sb-start", type=_time_arg, default=2007.5, help="overlay ramp start")
    p.add_argument("--out")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # --help exits 0, bad usage exits 1
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if args.command in ("fit", "superbubble") and args.lam is None:
        args.lam = [2.0]
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"logperiodic {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvalidConfig as exc:
        print(f"logperiodic {args.command}: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LogPeriodicError as exc:
        print(f"logperiodic {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
