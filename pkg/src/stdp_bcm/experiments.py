"""Poisson-protocol sweeps, threshold extraction and the pairing-frequency protocol."""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import IO, Mapping, Sequence

import numpy as np

from . import _csv
from .analytic import (
    AnalyticCurve,
    Normalization,
    UnexpectedOrientationError,
    pair_curve,
    pair_nearest_curve,
    triplet_alltoall_curve,
    triplet_curve,
)
from .circuit import (
    PairCircuitParams,
    TripletCircuitParams,
    pair_circuit_drift,
    pair_circuit_run,
    to_circuit_time,
    triplet_circuit_drift,
    triplet_circuit_run,
)
from .rules import InteractionMode, PairParams, TripletParams, run_pair, run_triplet
from .spikes import Seed, gen_pairing_protocol, gen_poisson

__all__ = [
    "RULES",
    "MINIMAL_TRIPLET",
    "ExperimentConfig",
    "BcmCurvePoint",
    "ThresholdEstimate",
    "ThresholdModulation",
    "ComparisonReport",
    "bcm_sweep",
    "extract_threshold",
    "sign_changes",
    "threshold_modulation",
    "pairing_frequency_sweep",
    "compare_mc_analytic",
    "oracle_for",
    "renormalize",
    "write_sweep_csv",
]

RULES = ("pair", "triplet", "pair-circuit", "triplet-circuit")

_PARAM_TYPES = {
    "pair": PairParams,
    "triplet": TripletParams,
    "pair-circuit": PairCircuitParams,
    "triplet-circuit": TripletCircuitParams,
}

_AMPLITUDES = {
    "pair": ("a_plus", "a_minus"),
    "triplet": TripletParams.AMPLITUDES,
    "pair-circuit": ("i_pot", "i_dep"),
    "triplet-circuit": ("i_pot", "i_dep", "i_pot3", "i_dep3"),
}

#: Minimal triplet rule used for the BCM experiments (A3- = 0, no pair potentiation).
MINIMAL_TRIPLET = TripletParams(
    a2_plus=0.0,
    a2_minus=1.0,
    a3_plus=1.0,
    a3_minus=0.0,
    tau_plus=0.020,
    tau_minus=0.050,
    tau_x=0.100,
    tau_y=0.100,
)

DEFAULT_GRID = tuple(np.linspace(5.0, 120.0, 16).tolist())


@dataclass(frozen=True)
class ExperimentConfig:
    """One Poisson-protocol experiment: a rule, its parameters and the rate grid.

    ``duration`` is in biological seconds; circuit rules see the trains
    compressed by their acceleration factor. ``w0=None`` starts rules at 0 and
    circuits at half their weight range. ``mode=None`` picks presynaptic-centred
    pairing for the pair rule and nearest-spike for everything else.
    """

    rule: str = "pair"
    params: object = None
    mode: InteractionMode | None = None
    rho_x: float = 10.0
    rho_y: tuple = DEFAULT_GRID
    duration: float = 200.0
    n_trials: int = 50
    seed: int = 2012
    normalization: Normalization = Normalization.PER_PRE_SPIKE
    w0: float | None = None
    output: str | None = None

    def __post_init__(self):
        if self.rule not in RULES:
            raise ValueError(f"rule must be one of {RULES}, got {self.rule!r}")
        ptype = _PARAM_TYPES[self.rule]
        if self.params is None:
            object.__setattr__(self, "params", ptype())
        elif type(self.params) is not ptype:
            raise ValueError(f"rule {self.rule!r} needs {ptype.__name__}, got {type(self.params).__name__}")
        if self.mode is None:
            default = "presynaptic-centred" if self.rule == "pair" else "nearest"
            object.__setattr__(self, "mode", InteractionMode.parse(default))
        object.__setattr__(self, "mode", InteractionMode.parse(self.mode))
        object.__setattr__(self, "normalization", Normalization.parse(self.normalization))
        grid = tuple(float(r) for r in np.atleast_1d(self.rho_y))
        object.__setattr__(self, "rho_y", grid)
        if not grid:
            raise ValueError("rho_y grid must not be empty")
        if any(r < 0 or not math.isfinite(r) for r in grid):
            raise ValueError("rho_y values must be finite and >= 0")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("rho_y grid must be strictly ascending")
        if not (math.isfinite(self.rho_x) and self.rho_x >= 0):
            raise ValueError("rho_x must be finite and >= 0")
        if not (math.isfinite(self.duration) and self.duration > 0):
            raise ValueError("duration must be > 0")
        if int(self.n_trials) != self.n_trials or self.n_trials < 1:
            raise ValueError("n_trials must be a positive integer")
        if self.rule == "triplet" and self.mode is InteractionMode.PRESYNAPTIC_CENTRED:
            raise ValueError("the triplet rule supports nearest and all-to-all modes only")

    @property
    def is_circuit(self) -> bool:
        return self.rule.endswith("circuit")

    @property
    def start_weight(self) -> float:
        if self.w0 is not None:
            return float(self.w0)
        return self.params.w_max / 2 if self.is_circuit else 0.0

    def with_params(self, **overrides) -> ExperimentConfig:
        return replace(self, params=replace(self.params, **overrides))


@dataclass(frozen=True)
class BcmCurvePoint:
    rho_y: float
    mean_drift: float
    std_error: float
    n_trials: int


@dataclass(frozen=True)
class ThresholdEstimate:
    theta_hat: float | None
    bracket: tuple[float, float] | None = None
    method: str = "interpolated-sign-change"


def _trial_delta(config: ExperimentConfig, grid_index: int, trial: int) -> float:
    rho_y = config.rho_y[grid_index]
    pre = gen_poisson(config.rho_x, config.duration, Seed(config.seed, grid_index, 2 * trial))
    post = gen_poisson(rho_y, config.duration, Seed(config.seed, grid_index, 2 * trial + 1))
    w0 = config.start_weight
    if config.rule == "pair":
        traj = run_pair(pre, post, config.params, config.mode, w0)
    elif config.rule == "triplet":
        traj = run_triplet(pre, post, config.params, config.mode, w0)
    else:
        accel = config.params.accel
        run = pair_circuit_run if config.rule == "pair-circuit" else triplet_circuit_run
        traj = run(to_circuit_time(pre, accel), to_circuit_time(post, accel), config.params, w0)
    return traj.final_w - w0


def _normalizer(config: ExperimentConfig) -> float:
    if config.normalization is Normalization.PER_SECOND:
        return config.duration
    return config.rho_x * config.duration


def _grid_point(args) -> BcmCurvePoint:
    config, grid_index = args
    deltas = np.array([_trial_delta(config, grid_index, k) for k in range(config.n_trials)])
    norm = _normalizer(config)
    drift = deltas / norm if norm > 0 else np.zeros_like(deltas)
    n = drift.size
    sem = float(np.std(drift, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return BcmCurvePoint(config.rho_y[grid_index], float(np.mean(drift)), sem, n)


def bcm_sweep(config: ExperimentConfig, workers: int = 1) -> list[BcmCurvePoint]:
    """Mean normalised weight drift and its standard error at every ``rho_y``.

    Trial ``k`` at grid index ``i`` draws its pre train from stream
    ``(seed, i, 2k)`` and its post train from ``(seed, i, 2k + 1)``, so results
    do not depend on ``workers``.
    """
    jobs = [(config, i) for i in range(len(config.rho_y))]
    if workers is None or workers <= 1:
        return [_grid_point(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_grid_point, jobs))


def sign_changes(values: Sequence[float]) -> tuple[int, int]:
    """Number of ``(- to +, + to -)`` transitions, zeros skipped."""
    signs = [math.copysign(1, v) for v in values if v != 0]
    up = sum(1 for a, b in zip(signs, signs[1:]) if a < 0 < b)
    down = sum(1 for a, b in zip(signs, signs[1:]) if a > 0 > b)
    return up, down


def extract_threshold(curve: Sequence[BcmCurvePoint]) -> ThresholdEstimate:
    """Linearly interpolate the first LTD -> LTP crossing of a measured curve."""
    if len(curve) < 2:
        raise ValueError("need at least two curve points")
    rates = [p.rho_y for p in curve]
    if any(b <= a for a, b in zip(rates, rates[1:])):
        raise ValueError("curve points must be ordered by ascending rho_y")
    for a, b in zip(curve, curve[1:]):
        if a.mean_drift < 0 < b.mean_drift:
            frac = -a.mean_drift / (b.mean_drift - a.mean_drift)
            theta = a.rho_y + frac * (b.rho_y - a.rho_y)
            return ThresholdEstimate(theta, (a.rho_y, b.rho_y))
    up, down = sign_changes([p.mean_drift for p in curve])
    if down and not up:
        raise UnexpectedOrientationError("the measured curve only goes from LTP to LTD")
    return ThresholdEstimate(None)


@dataclass(frozen=True)
class ThresholdModulation:
    labels: list[str]
    curves: list[list[BcmCurvePoint]]
    thresholds: list[ThresholdEstimate]

    @property
    def strictly_ordered(self) -> str | None:
        """``"decreasing"`` / ``"increasing"`` if the thresholds are, else ``None``."""
        th = [t.theta_hat for t in self.thresholds]
        if any(t is None for t in th):
            return None
        if all(a > b for a, b in zip(th, th[1:])):
            return "decreasing"
        if all(a < b for a, b in zip(th, th[1:])):
            return "increasing"
        return None


def threshold_modulation(
    base: ExperimentConfig,
    variants: Sequence[Mapping[str, float]],
    labels: Sequence[str] | None = None,
    workers: int = 1,
) -> ThresholdModulation:
    """Sweep three amplitude settings of the same rule with the same seeds."""
    if len(variants) != 3:
        raise ValueError("threshold modulation takes exactly three variants")
    allowed = set(_AMPLITUDES[base.rule])
    for v in variants:
        extra = set(v) - allowed
        if extra:
            raise ValueError(f"variants may only change amplitudes {sorted(allowed)}; got {sorted(extra)}")
    if labels is None:
        labels = [",".join(f"{k}={v:g}" for k, v in sorted(var.items())) for var in variants]
    curves, thresholds = [], []
    for var in variants:
        points = bcm_sweep(base.with_params(**var), workers=workers)
        curves.append(points)
        thresholds.append(extract_threshold(points))
    return ThresholdModulation(list(labels), curves, thresholds)


def pairing_frequency_sweep(
    params: PairParams | TripletParams,
    delta_t: float,
    freqs: Sequence[float],
    n_pairs: int,
    mode: InteractionMode = InteractionMode.NEAREST_SPIKE,
) -> list[tuple[float, float]]:
    """Total weight change after ``n_pairs`` pre/post pairings at each frequency."""
    freqs = [float(f) for f in freqs]
    if any(b <= a for a, b in zip(freqs, freqs[1:])):
        raise ValueError("frequencies must be strictly ascending")
    run = run_triplet if isinstance(params, TripletParams) else run_pair
    out = []
    for f in freqs:
        pre, post = gen_pairing_protocol(delta_t, f, n_pairs)
        out.append((f, run(pre, post, params, mode, 0.0).delta_w))
    return out


@dataclass(frozen=True)
class ComparisonReport:
    points: list[BcmCurvePoint]
    oracle: list[float]
    z: list[float]
    z_max: float = 3.0
    min_fraction: float = 0.95

    @property
    def fraction_within(self) -> float:
        return sum(1 for z in self.z if abs(z) <= self.z_max) / len(self.z)

    @property
    def passed(self) -> bool:
        return self.fraction_within >= self.min_fraction


def _z(mean: float, expected: float, sem: float) -> float:
    if sem > 0:
        return (mean - expected) / sem
    return 0.0 if mean == expected else math.copysign(math.inf, mean - expected)


def compare_mc_analytic(
    config: ExperimentConfig,
    oracle: AnalyticCurve,
    points: Sequence[BcmCurvePoint] | None = None,
    workers: int = 1,
) -> ComparisonReport:
    """Z-scores of Monte-Carlo means against a mean-field curve on the config grid."""
    if oracle.normalization is not config.normalization:
        raise ValueError(
            f"oracle is {oracle.normalization.value} but the config measures "
            f"{config.normalization.value}"
        )
    if points is None:
        points = bcm_sweep(config, workers=workers)
    expected = [float(oracle(p.rho_y)) for p in points]
    z = [_z(p.mean_drift, e, p.std_error) for p, e in zip(points, expected)]
    return ComparisonReport(list(points), expected, z)


def oracle_for(config: ExperimentConfig) -> AnalyticCurve:
    """Mean-field drift curve matching the rule, pairing and normalisation of ``config``."""
    rx = config.rho_x
    p = config.params
    if config.rule == "pair":
        if config.mode is InteractionMode.PRESYNAPTIC_CENTRED:
            base = pair_curve(p)
        elif config.mode is InteractionMode.NEAREST_SPIKE:
            base = pair_nearest_curve(p, rx)
        else:
            base = AnalyticCurve(
                lambda r: rx * r * (p.a_plus * p.tau_plus - p.a_minus * p.tau_minus),
                Normalization.PER_SECOND,
                "pair all-to-all",
            )
    elif config.rule == "triplet":
        base = (
            triplet_curve(p, rx)
            if config.mode is InteractionMode.NEAREST_SPIKE
            else triplet_alltoall_curve(p, rx)
        )
    elif config.rule == "pair-circuit":
        base = AnalyticCurve(lambda r: pair_circuit_drift(p, rx, r), Normalization.PER_SECOND, "pair circuit")
    else:
        base = AnalyticCurve(
            lambda r: triplet_circuit_drift(p, rx, r), Normalization.PER_SECOND, "triplet circuit"
        )
    return renormalize(base, rx, config.normalization)


def renormalize(curve: AnalyticCurve, rho_x: float, target) -> AnalyticCurve:
    """Convert between per-pre-spike and per-second drift at pre rate ``rho_x``."""
    target = Normalization.parse(target)
    if curve.normalization is target:
        return curve
    if target is Normalization.PER_SECOND:
        return AnalyticCurve(lambda r: rho_x * curve.evaluator(r), target, curve.label)
    if rho_x == 0:
        return AnalyticCurve(lambda r: 0.0, target, curve.label)
    return AnalyticCurve(lambda r: curve.evaluator(r) / rho_x, target, curve.label)


def sweep_rows(points: Sequence[BcmCurvePoint]):
    return [(p.rho_y, p.mean_drift, p.std_error, p.n_trials) for p in points]


SWEEP_HEADER = ["rho_y_hz", "mean_drift", "std_error", "n_trials"]


def write_sweep_csv(points: Sequence[BcmCurvePoint], dest: str | os.PathLike | IO[str]) -> None:
    _csv.write_rows(dest, SWEEP_HEADER, sweep_rows(points))
