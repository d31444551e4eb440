"""Command-line front end: ``stdp-bcm <subcommand> [options]``.

Every subcommand accepts ``--config FILE`` (TOML). Command-line flags override
the matching config keys. Exit status is 0 on success, 2 when a comparison
fails and 1 on usage errors.

Config layout (all keys optional)::

    rule = "pair"                  # pair | triplet | pair-circuit | triplet-circuit
    mode = "presynaptic-centred"   # nearest | all-to-all | presynaptic-centred
    rho_x = 10.0
    rho_y = [10, 20, 40]           # or a [grid] table with start/stop/num
    duration = 200.0
    n_trials = 50
    seed = 2012
    normalization = "per-pre-spike"
    out = "curve.csv"
    workers = 1
    oracle = "auto"                # compare only: auto or one of the analytic kinds

    [params]                       # fields of the rule's parameter class
    a_plus = 1.0

    [window]
    dt_min = -0.1
    dt_max = 0.1
    points = 201

    [threshold_mod]
    variants = [{a_plus = 0.85}, {a_plus = 1.0}, {a_plus = 1.15}]

    [pairing]
    delta_t = 0.01
    freqs = [1, 5, 10, 20, 40]
    n_pairs = 60

    [analytic]
    kind = "pair"                  # pair | pair-nearest | triplet | triplet-all-to-all
"""
from __future__ import annotations

import argparse
import dataclasses
import sys
from typing import Sequence

import numpy as np

from . import _csv, analytic
from .circuit import PairCircuitParams, TripletCircuitParams, circuit_learning_window
from .experiments import (
    DEFAULT_GRID,
    RULES,
    SWEEP_HEADER,
    ExperimentConfig,
    bcm_sweep,
    compare_mc_analytic,
    extract_threshold,
    oracle_for,
    pairing_frequency_sweep,
    renormalize,
    sweep_rows,
    threshold_modulation,
)
from .rules import PairParams, TripletParams, pair_window, run_triplet
from .spikes import SpikeTrain

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2

_PARAM_TYPES = {
    "pair": PairParams,
    "triplet": TripletParams,
    "pair-circuit": PairCircuitParams,
    "triplet-circuit": TripletCircuitParams,
}


_ORACLES = ("pair", "pair-nearest", "triplet", "triplet-all-to-all")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(";", ",").split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _assignment(text: str) -> tuple[str, str]:
    key, sep, value = text.partition("=")
    if not sep or not key.strip():
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    return key.strip(), value.strip()


def _coerce(value):
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            return value
    return value


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML config file")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output CSV path ('-' for stdout)")
    common.add_argument("--format", choices=["csv"], default="csv")
    common.add_argument("--plot-data", help="also write a gnuplot-style data file here")

    proto = argparse.ArgumentParser(add_help=False)
    proto.add_argument("--rule", choices=RULES)
    proto.add_argument("--mode")
    proto.add_argument("--rho-x", type=float)
    proto.add_argument("--rho-y", type=_floats, help="comma-separated grid in Hz")
    proto.add_argument("--duration", type=float, help="seconds per trial (biological)")
    proto.add_argument("--trials", type=int, dest="n_trials")
    proto.add_argument("--normalization")
    proto.add_argument("--workers", type=int)
    proto.add_argument(
        "--param", type=_assignment, action="append", default=[], metavar="KEY=VALUE",
        help="override one rule parameter (repeatable)",
    )

    parser = _Parser(prog="stdp-bcm", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("window", parents=[common, proto], help="learning window of a rule or circuit")
    p.add_argument("--dt-min", type=float)
    p.add_argument("--dt-max", type=float)
    p.add_argument("--points", type=int)

    sub.add_parser("bcm-sweep", parents=[common, proto], help="Monte-Carlo drift vs post rate")

    p = sub.add_parser("threshold-mod", parents=[common, proto], help="three-variant threshold modulation")
    p.add_argument(
        "--variant", action="append", default=[], metavar="KEY=VALUE[,KEY=VALUE]",
        help="amplitude overrides for one curve; give exactly three",
    )

    p = sub.add_parser("pairing-freq", parents=[common, proto], help="pairing-frequency protocol")
    p.add_argument("--delta-t", type=float)
    p.add_argument("--freqs", type=_floats)
    p.add_argument("--pairs", type=int, dest="n_pairs")

    p = sub.add_parser("compare", parents=[common, proto], help="Monte-Carlo sweep vs mean-field curve")
    p.add_argument(
        "--oracle", choices=["auto", *_ORACLES],
        help="mean-field curve to compare against (default: the one matching the rule and mode)",
    )

    p = sub.add_parser("analytic", parents=[common, proto], help="tabulate mean-field drift curves")
    p.add_argument("--kind", choices=["pair", "pair-nearest", "triplet", "triplet-all-to-all"])
    return parser


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise UsageError(f"cannot read config {path!r}: {exc}") from exc


def _settings(args, cfg: dict) -> dict:
    """Flatten config and flags; flags win."""
    s = {k: v for k, v in cfg.items() if not isinstance(v, dict)}
    for section in ("params", "window", "threshold_mod", "pairing", "analytic", "grid"):
        s[section] = dict(cfg.get(section, {}))
    for key in (
        "seed", "out", "plot_data", "rule", "mode", "rho_x", "rho_y", "duration",
        "n_trials", "normalization", "workers",
    ):
        value = getattr(args, key, None)
        if value is not None:
            s[key] = value
    for key, value in getattr(args, "param", []):
        s["params"][key] = _coerce(value)
    return s


def _grid(s: dict) -> tuple:
    if "rho_y" in s:
        return tuple(float(r) for r in s["rho_y"])
    g = s["grid"]
    if g:
        return tuple(np.linspace(float(g["start"]), float(g["stop"]), int(g["num"])).tolist())
    return DEFAULT_GRID


def _params(rule: str, overrides: dict):
    ptype = _PARAM_TYPES[rule]
    names = {f.name for f in dataclasses.fields(ptype)}
    unknown = set(overrides) - names
    if unknown:
        raise UsageError(f"unknown {ptype.__name__} fields: {sorted(unknown)}")
    return ptype(**overrides)


def _experiment(s: dict) -> ExperimentConfig:
    rule = s.get("rule", "pair")
    if rule not in RULES:
        raise UsageError(f"unknown rule {rule!r}")
    kwargs = dict(rule=rule, params=_params(rule, s["params"]), rho_y=_grid(s))
    for key in ("mode", "rho_x", "duration", "n_trials", "seed", "normalization", "w0"):
        if key in s:
            kwargs[key] = s[key]
    return ExperimentConfig(**kwargs)


def _emit(s: dict, header, rows) -> None:
    rows = list(rows)
    out = s.get("out")
    if out in (None, "-"):
        _csv.write_rows(sys.stdout, header, rows)
    else:
        _csv.write_rows(out, header, rows)
    if s.get("plot_data"):
        _csv.write_plot_data(s["plot_data"], header, rows)


def _info(msg: str) -> None:
    print(msg, file=sys.stderr)


# --- subcommands -----------------------------------------------------------------


def _cmd_window(args, s) -> int:
    rule = s.get("rule", "pair")
    w = s["window"]
    params = _params(rule, s["params"])
    circuit = rule.endswith("circuit")
    if circuit:
        span = max(params.pot_window, params.dep_window) * 1.25
    else:
        span = 5.0 * max(params.tau_plus, params.tau_minus)
    lo = args.dt_min if args.dt_min is not None else float(w.get("dt_min", -span))
    hi = args.dt_max if args.dt_max is not None else float(w.get("dt_max", span))
    n = args.points if args.points is not None else int(w.get("points", 201))
    grid = np.linspace(lo, hi, n)
    if circuit:
        rows = circuit_learning_window(params, grid)
    elif rule == "pair":
        rows = [(float(dt), float(pair_window(dt, params))) for dt in grid]
    else:
        rows = []
        for dt in grid.tolist():
            duration = abs(dt) + 1.0
            pre = SpikeTrain([max(0.0, -dt)], duration)
            post = SpikeTrain([max(0.0, dt)], duration)
            rows.append((dt, run_triplet(pre, post, params).delta_w))
    _emit(s, ["delta_t_s", "delta_w"], rows)
    return EXIT_OK


def _cmd_bcm_sweep(args, s) -> int:
    config = _experiment(s)
    points = bcm_sweep(config, workers=int(s.get("workers", 1)))
    _emit(s, SWEEP_HEADER, sweep_rows(points))
    est = extract_threshold(points)
    _info(f"threshold: {est.theta_hat if est.theta_hat is not None else 'none'}")
    return EXIT_OK


def _cmd_threshold_mod(args, s) -> int:
    config = _experiment(s)
    raw = args.variant or s["threshold_mod"].get("variants", [])
    variants = []
    for item in raw:
        if isinstance(item, str):
            pairs = [_assignment(p) for p in item.split(",") if p.strip()]
            variants.append({k: float(v) for k, v in pairs})
        else:
            variants.append({k: float(v) for k, v in item.items()})
    if len(variants) != 3:
        raise UsageError("threshold-mod needs exactly three variants")
    result = threshold_modulation(config, variants, workers=int(s.get("workers", 1)))
    rows = []
    for label, curve in zip(result.labels, result.curves):
        rows.extend((label, *row) for row in sweep_rows(curve))
    _emit(s, ["variant", *SWEEP_HEADER], rows)
    for label, est in zip(result.labels, result.thresholds):
        _info(f"{label}: threshold {est.theta_hat if est.theta_hat is not None else 'none'}")
    return EXIT_OK if result.strictly_ordered else EXIT_FAIL


def _cmd_pairing_freq(args, s) -> int:
    rule = s.get("rule", "triplet")
    if rule not in ("pair", "triplet"):
        raise UsageError("pairing-freq supports the pair and triplet rules")
    pp = s["pairing"]
    params = _params(rule, s["params"])
    delta_t = args.delta_t if args.delta_t is not None else float(pp.get("delta_t", 0.01))
    freqs = args.freqs or pp.get("freqs", [1, 5, 10, 20, 40])
    n_pairs = args.n_pairs if args.n_pairs is not None else int(pp.get("n_pairs", 60))
    mode = s.get("mode", "nearest")
    rows = pairing_frequency_sweep(params, delta_t, freqs, n_pairs, mode)
    _emit(s, ["freq_hz", "delta_w"], rows)
    return EXIT_OK


def _cmd_compare(args, s) -> int:
    config = _experiment(s)
    kind = args.oracle or s.get("oracle", "auto")
    if kind == "auto":
        oracle = oracle_for(config)
    else:
        if kind not in _ORACLES:
            raise UsageError(f"unknown oracle {kind!r}")
        if kind.split("-")[0] != config.rule:
            raise UsageError(f"oracle {kind!r} does not apply to rule {config.rule!r}")
        oracle = renormalize(_analytic_curve(kind, s), config.rho_x, config.normalization)
    report = compare_mc_analytic(config, oracle, workers=int(s.get("workers", 1)))
    rows = [
        (p.rho_y, p.mean_drift, p.std_error, p.n_trials, o, z)
        for p, o, z in zip(report.points, report.oracle, report.z)
    ]
    _emit(s, [*SWEEP_HEADER, "oracle", "z"], rows)
    _info(
        f"{report.fraction_within:.1%} of points within |z| <= {report.z_max:g}: "
        f"{'PASS' if report.passed else 'FAIL'}"
    )
    return EXIT_OK if report.passed else EXIT_FAIL


def _analytic_curve(kind: str, s: dict, announce: bool = False):
    rho_x = float(s.get("rho_x", 10.0))
    if kind.startswith("pair"):
        params = _params("pair", s["params"])
        if kind == "pair":
            if announce:
                _info(f"closed-form threshold: {analytic.pair_threshold(params)}")
            return analytic.pair_curve(params)
        return analytic.pair_nearest_curve(params, rho_x)
    params = _params("triplet", s["params"])
    if kind == "triplet":
        if announce and params.a3_minus == 0:
            _info(f"closed-form threshold: {analytic.minimal_triplet_threshold(params, rho_x)}")
        return analytic.triplet_curve(params, rho_x)
    if announce and params.a3_plus > 0:
        theta = analytic.triplet_threshold_alltoall(params, analytic.BcmThresholdModel())
        _info(f"closed-form threshold: {theta}")
    return analytic.triplet_alltoall_curve(params, rho_x)


def _cmd_analytic(args, s) -> int:
    kind = args.kind or s["analytic"].get("kind", "pair")
    curve = _analytic_curve(kind, s, announce=True)
    _emit(s, ["rho_y_hz", "drift"], analytic.tabulate(curve, _grid(s)))
    return EXIT_OK


_COMMANDS = {
    "window": _cmd_window,
    "bcm-sweep": _cmd_bcm_sweep,
    "threshold-mod": _cmd_threshold_mod,
    "pairing-freq": _cmd_pairing_freq,
    "compare": _cmd_compare,
    "analytic": _cmd_analytic,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        s = _settings(args, _load_config(args.config))
        return _COMMANDS[args.command](args, s)
    except (UsageError, ValueError, TypeError) as exc:
        print(f"stdp-bcm {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
