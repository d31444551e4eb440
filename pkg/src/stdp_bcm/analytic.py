"""Mean-field drift of the STDP rules under independent Poisson stimulation.

These closed forms are the oracles the Monte-Carlo experiments are checked
against. Pair amplitudes are stored positive (see :class:`PairParams`); the
formulas below use signed amplitudes, and :func:`signed_pair_amplitudes` is the
single place where that conversion happens.
"""
from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass
from typing import IO, Callable, Sequence

import numpy as np
from scipy import optimize

from . import _csv
from .rules import PairParams, TripletParams

__all__ = [
    "DegenerateParametersError",
    "UnexpectedOrientationError",
    "Normalization",
    "BcmThresholdModel",
    "AnalyticCurve",
    "SignCheck",
    "signed_pair_amplitudes",
    "pair_bcm_curve",
    "pair_nearest_drift",
    "pair_threshold",
    "triplet_drift",
    "triplet_drift_alltoall",
    "triplet_threshold_alltoall",
    "minimal_triplet_threshold",
    "numeric_threshold",
    "bcm_sign_check",
    "pair_curve",
    "pair_nearest_curve",
    "triplet_curve",
    "triplet_alltoall_curve",
    "tabulate",
    "write_curve_csv",
]


class DegenerateParametersError(ValueError):
    """Parameters for which a threshold formula has a vanishing denominator."""


class UnexpectedOrientationError(ValueError):
    """Drift goes from potentiation to depression instead of the BCM direction."""


class Normalization(enum.Enum):
    PER_PRE_SPIKE = "per-pre-spike"
    PER_SECOND = "per-second"

    @classmethod
    def parse(cls, value: "str | Normalization") -> "Normalization":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        for member in cls:
            if member.value == key or member.name.lower().replace("_", "-") == key:
                return member
        if key in ("perprespike", "pre"):
            return cls.PER_PRE_SPIKE
        if key in ("persecond", "second", "rate"):
            return cls.PER_SECOND
        raise ValueError(f"unknown normalization {value!r}")


@dataclass(frozen=True)
class BcmThresholdModel:
    """Sliding threshold ``theta = alpha * <rho_y^p>``.

    ``mean_rho_p`` is the current ``<rho_y^p>`` and ``rho0_p`` its long-run
    reference value; the all-to-all triplet threshold scales with their ratio.
    """

    mean_rho_p: float = 1.0
    rho0_p: float = 1.0
    alpha: float = 1.0
    p: float = 2.0

    def __post_init__(self):
        if self.p <= 1:
            raise ValueError(f"p must exceed 1, got {self.p!r}")
        if not (self.rho0_p > 0 and math.isfinite(self.rho0_p)):
            raise ValueError("rho0_p must be finite and > 0")
        if not (self.mean_rho_p >= 0 and math.isfinite(self.mean_rho_p)):
            raise ValueError("mean_rho_p must be finite and >= 0")

    @property
    def theta(self) -> float:
        return self.alpha * self.mean_rho_p

    @classmethod
    def stationary(cls, p: float = 2.0) -> BcmThresholdModel:
        return cls(mean_rho_p=1.0, rho0_p=1.0, p=p)


@dataclass(frozen=True)
class AnalyticCurve:
    """Drift as a function of the post-synaptic rate (Hz)."""

    evaluator: Callable[[float], float]
    normalization: Normalization
    label: str = ""

    def __call__(self, rho_y):
        if np.ndim(rho_y):
            return np.array([self.evaluator(float(r)) for r in np.asarray(rho_y, dtype=float)])
        return self.evaluator(float(rho_y))


def signed_pair_amplitudes(params: PairParams) -> tuple[float, float]:
    """``(A+, A-)`` with the depression amplitude carrying its negative sign."""
    return params.a_plus, -params.a_minus


def pair_bcm_curve(params: PairParams, rho_y: float) -> float:
    """Mean weight change per pre spike, presynaptic-centred nearest pairing.

    ``C(rho_y) = rho_y * (A+ / (1/tau+ + rho_y) + A- / (1/tau- + rho_y))``
    """
    if rho_y < 0:
        raise ValueError("rho_y must be >= 0")
    a_p, a_m = signed_pair_amplitudes(params)
    return rho_y * (a_p / (1.0 / params.tau_plus + rho_y) + a_m / (1.0 / params.tau_minus + rho_y))


def pair_nearest_drift(params: PairParams, rho_x: float, rho_y: float) -> float:
    """Mean drift per second of the symmetric nearest-spike pair rule.

    Each post spike samples the latest pre spike and each pre spike the latest
    post spike, so the potentiation factor depends on ``rho_x`` rather than
    ``rho_y``. Equals :func:`triplet_drift` with both triplet amplitudes zero.
    """
    a_p, a_m = signed_pair_amplitudes(params)
    return rho_x * rho_y * (
        a_p / (1.0 / params.tau_plus + rho_x) + a_m / (1.0 / params.tau_minus + rho_y)
    )


def pair_threshold(params: PairParams) -> float | None:
    """Positive root of :func:`pair_bcm_curve`, or ``None`` when there is none.

    ``theta = -(A+/tau- + A-/tau+) / (A+ + A-)`` with signed amplitudes.
    """
    a_p, a_m = signed_pair_amplitudes(params)
    denom = a_p + a_m
    if denom == 0:
        raise DegenerateParametersError("A+ + A- = 0: the pair curve has no finite threshold")
    theta = -(a_p / params.tau_minus + a_m / params.tau_plus) / denom
    return theta if theta > 0 else None


def triplet_drift(params: TripletParams, rho_x: float, rho_y: float) -> float:
    """Mean drift per second of the nearest-spike triplet rule."""
    if rho_x < 0 or rho_y < 0:
        raise ValueError("rates must be >= 0")
    p = params
    inv_p, inv_m = 1.0 / p.tau_plus, 1.0 / p.tau_minus
    inv_x, inv_y = 1.0 / p.tau_x, 1.0 / p.tau_y
    xy = rho_x * rho_y
    return (
        -p.a2_minus * xy / (inv_m + rho_y)
        - p.a3_minus * rho_x * xy / ((inv_m + rho_y) * (inv_x + rho_x))
        + p.a2_plus * xy / (inv_p + rho_x)
        + p.a3_plus * xy * rho_y / ((inv_p + rho_x) * (inv_y + rho_y))
    )


def triplet_drift_alltoall(params: TripletParams, rho_x: float, rho_y: float) -> float:
    """Mean drift per second of the all-to-all triplet rule.

    With independent Poisson trains each trace averages to rate times time
    constant, giving
    ``rho_x rho_y (-A2- tau- - A3- tau- tau_x rho_x + A2+ tau+ + A3+ tau+ tau_y rho_y)``.
    """
    if rho_x < 0 or rho_y < 0:
        raise ValueError("rates must be >= 0")
    p = params
    return rho_x * rho_y * (
        -p.a2_minus * p.tau_minus
        - p.a3_minus * p.tau_minus * p.tau_x * rho_x
        + p.a2_plus * p.tau_plus
        + p.a3_plus * p.tau_plus * p.tau_y * rho_y
    )


def triplet_threshold_alltoall(params: TripletParams, model: BcmThresholdModel) -> float:
    """Sliding threshold of the all-to-all triplet rule with ``A3- = 0``.

    ``theta = <rho_y^p> / rho0^p * (A2- tau- - A2+ tau+) / (A3+ tau+ tau_y)``
    """
    p = params
    if p.a3_plus == 0:
        raise DegenerateParametersError("A3+ = 0: no rate-dependent potentiation term")
    ratio = model.mean_rho_p / model.rho0_p
    return ratio * (p.a2_minus * p.tau_minus - p.a2_plus * p.tau_plus) / (
        p.a3_plus * p.tau_plus * p.tau_y
    )


def minimal_triplet_threshold(params: TripletParams, rho_x: float) -> float | None:
    """Positive root in ``rho_y`` of :func:`triplet_drift` for ``A3- = 0``.

    Clearing denominators leaves a quadratic in ``rho_y``; the larger root is
    returned when it is positive.
    """
    p = params
    if p.a3_minus != 0:
        raise ValueError("closed-form root assumes A3- = 0")
    a = 1.0 / p.tau_plus + rho_x
    b, c = 1.0 / p.tau_minus, 1.0 / p.tau_y
    qa = p.a2_plus + p.a3_plus
    qb = p.a2_plus * (b + c) + p.a3_plus * b - p.a2_minus * a
    qc = p.a2_plus * b * c - p.a2_minus * a * c
    if qa == 0:
        if qb == 0:
            return None
        root = -qc / qb
        return root if root > 0 else None
    disc = qb * qb - 4.0 * qa * qc
    if disc < 0:
        return None
    root = (-qb + math.sqrt(disc)) / (2.0 * qa)
    return root if root > 0 else None


def numeric_threshold(
    curve: AnalyticCurve, lo: float, hi: float, tol: float = 1e-3
) -> float | None:
    """Bisect for the LTD -> LTP crossing of ``curve`` on ``[lo, hi]``."""
    if not lo < hi:
        raise ValueError("lo must be below hi")
    if not tol > 0:
        raise ValueError("tol must be > 0")
    f_lo, f_hi = curve(lo), curve(hi)
    if f_lo == 0 and f_hi > 0:
        return lo
    if f_lo < 0 and f_hi == 0:
        return hi
    if f_lo > 0 and f_hi < 0:
        raise UnexpectedOrientationError(
            f"curve goes from LTP at {lo} Hz to LTD at {hi} Hz"
        )
    if not (f_lo < 0 < f_hi):
        return None
    return optimize.bisect(curve, lo, hi, xtol=tol)


@dataclass(frozen=True)
class SignCheck:
    passed: bool
    first_violation: tuple[float, float] | None = None  # (rho_y, drift)
    degenerate: bool = False
    reason: str = ""

    def __bool__(self) -> bool:
        return self.passed


def bcm_sign_check(curve: AnalyticCurve, theta: float | None, grid: Sequence[float]) -> SignCheck:
    """Check drift < 0 below ``theta``, > 0 above it, and zero at rate 0."""
    rates = np.asarray(grid, dtype=float)
    values = curve(rates)
    zero = curve(0.0)
    if zero != 0:
        return SignCheck(False, (0.0, zero), reason="drift at rho_y = 0 is not zero")
    if np.all(values == 0):
        return SignCheck(True, degenerate=True, reason="curve vanishes on the whole grid")
    if theta is None:
        return SignCheck(
            False, (float(rates[0]), float(values[0])), reason="no positive threshold exists"
        )
    for r, v in zip(rates.tolist(), values.tolist()):
        if r == 0:
            continue
        if (r < theta and not v < 0) or (r > theta and not v > 0):
            return SignCheck(False, (r, v), reason=f"wrong sign relative to theta={theta}")
    return SignCheck(True)


# --- curve factories -----------------------------------------------------------


def pair_curve(params: PairParams) -> AnalyticCurve:
    return AnalyticCurve(
        lambda r: pair_bcm_curve(params, r), Normalization.PER_PRE_SPIKE, "pair presynaptic-centred"
    )


def pair_nearest_curve(params: PairParams, rho_x: float) -> AnalyticCurve:
    return AnalyticCurve(
        lambda r: pair_nearest_drift(params, rho_x, r), Normalization.PER_SECOND, "pair nearest"
    )


def triplet_curve(params: TripletParams, rho_x: float) -> AnalyticCurve:
    return AnalyticCurve(
        lambda r: triplet_drift(params, rho_x, r), Normalization.PER_SECOND, "triplet nearest"
    )


def triplet_alltoall_curve(params: TripletParams, rho_x: float) -> AnalyticCurve:
    return AnalyticCurve(
        lambda r: triplet_drift_alltoall(params, rho_x, r),
        Normalization.PER_SECOND,
        "triplet all-to-all",
    )


def tabulate(curve: AnalyticCurve, grid: Sequence[float]) -> list[tuple[float, float]]:
    return [(float(r), float(curve(float(r)))) for r in grid]


def write_curve_csv(rows, dest: str | os.PathLike | IO[str]) -> None:
    _csv.write_rows(dest, ["rho_y_hz", "drift"], rows)
