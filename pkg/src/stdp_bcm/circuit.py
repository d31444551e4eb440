"""Behavioural models of the pair-based and triplet-based STDP circuits.

Each spike resets a node voltage that then ramps linearly to a rail. A later
spike of the other kind samples that voltage and moves charge on the weight
capacitor in proportion to it:

* a pre pulse resets ``v_pot`` to 0 (it ramps up to ``vdd``) and samples
  ``v_dep`` for depression;
* a post pulse resets ``v_dep`` to ``vdd`` (it ramps down to 0) and samples
  ``v_pot`` for potentiation.

Because every pulse resets its ramp, the circuits pair spikes nearest-neighbour
only. Times in this module are circuit time; with the default acceleration of
1000, one circuit millisecond stands for one biological second.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np

from .rules import PRE, PairParams, TripletParams, WeightTrajectory, _merge
from .spikes import SpikeTrain

__all__ = [
    "PairCircuitParams",
    "TripletCircuitParams",
    "CircuitTrajectory",
    "pair_circuit_run",
    "triplet_circuit_run",
    "circuit_learning_window",
    "pair_circuit_drift",
    "triplet_circuit_drift",
    "to_circuit_time",
]

VDD = 3.3
_DRIVES = ("complement", "proportional")


def _default_slope(tau_bio: float, accel: float = 1000.0) -> float:
    # a triangular window of half-length 2*tau has the same area as exp(-t/tau)
    return VDD / (2.0 * tau_bio / accel)


@dataclass(frozen=True)
class PairCircuitParams:
    """Bias settings of the pair circuit, in circuit time.

    ``slope_pot`` / ``slope_dep`` stand in for the V_tp / V_td gate biases and
    ``i_pot`` / ``i_dep`` for V_A+ / V_A-. One pulse moves the weight by
    ``i * drive * pulse_width / c_w``.

    ``pot_drive`` selects how the potentiation current follows ``v_pot``:
    ``"complement"`` uses ``1 - v_pot/vdd`` (largest right after the pre spike,
    giving a decaying window); ``"proportional"`` uses ``v_pot/vdd`` while the
    ramp is still below the rail.
    """

    vdd: float = VDD
    slope_pot: float = _default_slope(0.0168)
    slope_dep: float = _default_slope(0.0337)
    i_pot: float = 20.0
    i_dep: float = 14.0
    pulse_width: float = 1e-6
    c_w: float = 1.0
    accel: float = 1000.0
    pot_drive: str = "complement"

    def __post_init__(self):
        for f in fields(self):
            if f.name == "pot_drive":
                continue
            v = getattr(self, f.name)
            if f.name.startswith("i_"):
                # a zero bias current switches its branch off
                if not (math.isfinite(v) and v >= 0):
                    raise ValueError(f"{f.name} must be finite and >= 0, got {v!r}")
            elif not (math.isfinite(v) and v > 0):
                raise ValueError(f"{f.name} must be finite and > 0, got {v!r}")
        if self.pot_drive not in _DRIVES:
            raise ValueError(f"pot_drive must be one of {_DRIVES}, got {self.pot_drive!r}")
        shortest = min(self._windows())
        if self.pulse_width >= shortest:
            raise ValueError("pulse_width must be shorter than every learning window")

    def _windows(self):
        return self.vdd / self.slope_pot, self.vdd / self.slope_dep

    @property
    def w_max(self) -> float:
        return self.vdd

    @property
    def pot_window(self) -> float:
        """Length (circuit seconds) after a pre spike during which potentiation is possible."""
        return self.vdd / self.slope_pot

    @property
    def dep_window(self) -> float:
        return self.vdd / self.slope_dep

    @classmethod
    def matched(
        cls, rule: PairParams, accel: float = 1000.0, charge_per_unit: float = 2e-5, **kw
    ) -> PairCircuitParams:
        """Circuit whose triangular windows have the same areas as ``rule``'s exponentials."""
        pw = kw.pop("pulse_width", 1e-6)
        return cls(
            slope_pot=VDD / (2.0 * rule.tau_plus / accel),
            slope_dep=VDD / (2.0 * rule.tau_minus / accel),
            i_pot=rule.a_plus * charge_per_unit / pw,
            i_dep=rule.a_minus * charge_per_unit / pw,
            pulse_width=pw,
            accel=accel,
            **kw,
        )


@dataclass(frozen=True)
class TripletCircuitParams(PairCircuitParams):
    """Pair circuit plus the second ramps and the two triplet currents.

    ``i_dep3 = 0`` is the minimal circuit with the second depression branch removed.
    """

    slope_pot2: float = _default_slope(0.114)
    slope_dep2: float = _default_slope(0.101)
    i_pot3: float = 200.0
    i_dep3: float = 0.0

    def _windows(self):
        return (*super()._windows(), self.vdd / self.slope_pot2, self.vdd / self.slope_dep2)

    @classmethod
    def matched(
        cls, rule: TripletParams, accel: float = 1000.0, charge_per_unit: float = 2e-5, **kw
    ) -> TripletCircuitParams:
        pw = kw.pop("pulse_width", 1e-6)
        scale = charge_per_unit / pw
        return cls(
            slope_pot=VDD / (2.0 * rule.tau_plus / accel),
            slope_dep=VDD / (2.0 * rule.tau_minus / accel),
            slope_pot2=VDD / (2.0 * rule.tau_y / accel),
            slope_dep2=VDD / (2.0 * rule.tau_x / accel),
            i_pot=rule.a2_plus * scale,
            i_dep=rule.a2_minus * scale,
            i_pot3=rule.a3_plus * scale,
            i_dep3=rule.a3_minus * scale,
            pulse_width=pw,
            accel=accel,
            **kw,
        )


@dataclass(frozen=True, eq=False)
class CircuitTrajectory(WeightTrajectory):
    """Weight trajectory plus the node voltages each pulse sampled."""

    voltages: dict = field(default_factory=dict)


def to_circuit_time(train: SpikeTrain, accel: float) -> SpikeTrain:
    """Relabel a biological-time train in circuit time (divide times by ``accel``)."""
    return SpikeTrain(train.times / accel, train.duration / accel)


def _ramp_up(vdd, slope, since):
    return vdd if since is None else min(vdd, slope * since)


def _ramp_down(vdd, slope, since):
    return 0.0 if since is None else max(0.0, vdd - slope * since)


def _run(pre: SpikeTrain, post: SpikeTrain, p: PairCircuitParams, w0: float, triplet: bool):
    if not 0.0 <= w0 <= p.w_max:
        raise ValueError(f"w0 must lie in [0, {p.w_max}], got {w0!r}")
    times, kinds, _ = _merge(pre, post)
    # coincident pulses: post first, so dt = 0 depresses as in the pair rule
    order = np.lexsort((-kinds.astype(np.int16), times))
    times, kinds = times[order], kinds[order]
    vdd = p.vdd
    q_pot = p.pulse_width / p.c_w
    complement = p.pot_drive == "complement"
    use_pot3 = triplet and p.i_pot3 > 0
    use_dep3 = triplet and p.i_dep3 > 0

    def drive(v):
        if v >= vdd:
            return 0.0
        return 1.0 - v / vdd if complement else v / vdd

    n = times.size
    weights = np.empty(n)
    v_pot = np.empty(n)
    v_dep = np.empty(n)
    v_pot2 = np.empty(n) if triplet else None
    v_dep2 = np.empty(n) if triplet else None
    last_pre = last_post = None
    w = float(w0)
    for i, (t, k) in enumerate(zip(times.tolist(), kinds.tolist())):
        vp = _ramp_up(vdd, p.slope_pot, None if last_pre is None else t - last_pre)
        vd = _ramp_down(vdd, p.slope_dep, None if last_post is None else t - last_post)
        if triplet:
            vp2 = _ramp_up(vdd, p.slope_pot2, None if last_post is None else t - last_post)
            vd2 = _ramp_down(vdd, p.slope_dep2, None if last_pre is None else t - last_pre)
            v_pot2[i], v_dep2[i] = vp2, vd2
        if k == PRE:
            e1 = vd / vdd
            dw = -p.i_dep * e1 * q_pot
            if use_dep3:
                dw -= p.i_dep3 * e1 * (vd2 / vdd) * q_pot
            last_pre = t
        else:
            d1 = drive(vp)
            dw = p.i_pot * d1 * q_pot
            if use_pot3:
                dw += p.i_pot3 * d1 * drive(vp2) * q_pot
            last_post = t
        w = min(max(w + dw, 0.0), p.w_max)
        weights[i] = w
        v_pot[i], v_dep[i] = vp, vd
    volts = {"v_pot": v_pot, "v_dep": v_dep}
    if triplet:
        volts.update(v_pot2=v_pot2, v_dep2=v_dep2)
    return CircuitTrajectory(times, weights, float(w0), kinds, voltages=volts)


def pair_circuit_run(
    pre: SpikeTrain, post: SpikeTrain, params: PairCircuitParams, w0: float | None = None
) -> CircuitTrajectory:
    """Simulate the pair circuit; trains are in circuit time. ``w0`` defaults to ``vdd/2``."""
    return _run(pre, post, params, params.w_max / 2 if w0 is None else w0, triplet=False)


def triplet_circuit_run(
    pre: SpikeTrain, post: SpikeTrain, params: TripletCircuitParams, w0: float | None = None
) -> CircuitTrajectory:
    """Simulate the triplet circuit.

    A post pulse additionally samples ``v_pot2`` (reset by the previous post) and
    adds ``i_pot3 * drive(v_pot1) * drive(v_pot2)``, the two ramps acting like
    a series transistor pair. A pre pulse does the mirror image with ``v_dep2``
    and ``i_dep3``.
    """
    return _run(pre, post, params, params.w_max / 2 if w0 is None else w0, triplet=True)


def circuit_learning_window(params: PairCircuitParams, delta_t_grid) -> list[tuple[float, float]]:
    """Weight change of one isolated pre/post pair per ``delta_t = t_post - t_pre`` (circuit s)."""
    out = []
    w0 = params.w_max / 2
    run = triplet_circuit_run if isinstance(params, TripletCircuitParams) else pair_circuit_run
    for dt in np.asarray(delta_t_grid, dtype=float).tolist():
        if not math.isfinite(dt):
            raise ValueError("delta_t grid must be finite")
        duration = abs(dt) + max(params._windows())
        pre = SpikeTrain([max(0.0, -dt)], duration)
        post = SpikeTrain([max(0.0, dt)], duration)
        traj = run(pre, post, params, w0)
        out.append((dt, traj.final_w - w0))
    return out


# --- mean-field drift of the circuits (no clamping) -----------------------------


def _complement_mean(x: float) -> float:
    """E[(1 - s/L)+] for s ~ Exp(rate) with x = rate * L."""
    if x == 0:
        return 0.0
    return 1.0 + math.expm1(-x) / x


def _proportional_mean(x: float) -> float:
    """E[(s/L) 1{s < L}] for s ~ Exp(rate) with x = rate * L."""
    if x == 0:
        return 0.0
    return (-math.expm1(-x) - x * math.exp(-x)) / x


def _pot_mean(p: PairCircuitParams, rate_bio: float, window_circuit: float) -> float:
    x = rate_bio * window_circuit * p.accel
    return _complement_mean(x) if p.pot_drive == "complement" else _proportional_mean(x)


def pair_circuit_drift(params: PairCircuitParams, rho_x: float, rho_y: float) -> float:
    """Expected weight change per biological second, ignoring rail clamping."""
    p = params
    q = p.pulse_width / p.c_w
    pot = rho_y * p.i_pot * q * _pot_mean(p, rho_x, p.pot_window)
    dep = rho_x * p.i_dep * q * _complement_mean(rho_y * p.dep_window * p.accel)
    return pot - dep


def triplet_circuit_drift(params: TripletCircuitParams, rho_x: float, rho_y: float) -> float:
    p = params
    q = p.pulse_width / p.c_w
    d1 = _pot_mean(p, rho_x, p.pot_window)
    d2 = _pot_mean(p, rho_y, p.vdd / p.slope_pot2)
    e1 = _complement_mean(rho_y * p.dep_window * p.accel)
    e2 = _complement_mean(rho_x * (p.vdd / p.slope_dep2) * p.accel)
    pot = rho_y * q * (p.i_pot * d1 + p.i_pot3 * d1 * d2)
    dep = rho_x * q * (p.i_dep * e1 + p.i_dep3 * e1 * e2)
    return pot - dep
