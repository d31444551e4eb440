"""Exact event-driven pair-based and triplet-based STDP.

Two evaluation paths are provided and kept bit-compatible:

* per-event functions (``pair_on_pre``, ``triplet_on_post``, ...) that mutate a
  :class:`SynapseState`; :func:`run_stepwise` drives them over a merged event
  stream and is the reference implementation;
* :func:`run_pair` / :func:`run_triplet`, which compute nearest-spike rules with
  vectorised neighbour lookups and fall back to the stepwise driver for
  all-to-all interactions.

Events are processed in time order; a pre and a post spike at the same instant
are processed pre first. Weights are unbounded.
"""
from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass, field, replace
from typing import IO

import numpy as np

from . import _csv
from .spikes import SpikeTrain

__all__ = [
    "InteractionMode",
    "PairParams",
    "TripletParams",
    "SynapseState",
    "WeightTrajectory",
    "pair_window",
    "pair_on_pre",
    "pair_on_post",
    "triplet_on_pre",
    "triplet_on_post",
    "run_pair",
    "run_triplet",
    "run_stepwise",
    "write_trajectory_csv",
    "read_trajectory_csv",
]

PRE, POST = 0, 1


class InteractionMode(enum.Enum):
    """Which spike pairings a rule takes into account.

    ``NEAREST_SPIKE``
        Every post spike pairs with the latest pre spike and every pre spike
        with the latest post spike (triplet partners likewise use only the
        previous spike of the same kind).
    ``ALL_TO_ALL``
        Every spike pairs with all earlier spikes of the other kind, summed
        through exponentially decaying traces.
    ``PRESYNAPTIC_CENTRED``
        Pair rule only: every pre spike pairs with its nearest preceding and its
        nearest following post spike, and nothing else. Under independent
        Poisson trains this is the pairing whose mean drift per pre spike is
        :func:`stdp_bcm.analytic.pair_bcm_curve`.
    """

    NEAREST_SPIKE = "nearest"
    ALL_TO_ALL = "all-to-all"
    PRESYNAPTIC_CENTRED = "presynaptic-centred"

    @classmethod
    def parse(cls, value: "str | InteractionMode") -> "InteractionMode":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        aliases = {
            "nearest": cls.NEAREST_SPIKE,
            "nearest-spike": cls.NEAREST_SPIKE,
            "all-to-all": cls.ALL_TO_ALL,
            "alltoall": cls.ALL_TO_ALL,
            "presynaptic-centred": cls.PRESYNAPTIC_CENTRED,
            "presynaptic-centered": cls.PRESYNAPTIC_CENTRED,
            "pre-centred": cls.PRESYNAPTIC_CENTRED,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown interaction mode {value!r}") from None


def _check_positive(obj, names):
    for name in names:
        v = getattr(obj, name)
        if not (math.isfinite(v) and v > 0):
            raise ValueError(f"{name} must be finite and > 0, got {v!r}")


def _check_finite(obj, names, nonneg=False):
    for name in names:
        v = getattr(obj, name)
        if not math.isfinite(v) or (nonneg and v < 0):
            raise ValueError(f"{name} must be finite{' and >= 0' if nonneg else ''}, got {v!r}")


@dataclass(frozen=True)
class PairParams:
    """Pair rule: ``A+ exp(-dt/tau+)`` for ``dt > 0``, ``-A- exp(dt/tau-)`` otherwise.

    Both amplitudes are stored positive; the rule applies the sign.
    """

    a_plus: float = 1.0
    a_minus: float = 0.7
    tau_plus: float = 0.0168
    tau_minus: float = 0.0337

    AMPLITUDES = ("a_plus", "a_minus")

    def __post_init__(self):
        _check_positive(self, ("a_plus", "a_minus", "tau_plus", "tau_minus"))

    def scaled(self, c: float) -> PairParams:
        return replace(self, a_plus=self.a_plus * c, a_minus=self.a_minus * c)


@dataclass(frozen=True)
class TripletParams:
    """Triplet rule amplitudes and time constants.

    ``epsilon`` is subtracted literally from same-kind intervals; the current
    spike is always excluded from its own triplet partner regardless.
    """

    a2_plus: float = 0.005
    a2_minus: float = 0.007
    a3_plus: float = 0.05
    a3_minus: float = 0.0
    tau_plus: float = 0.0168
    tau_minus: float = 0.0337
    tau_x: float = 0.101
    tau_y: float = 0.114
    epsilon: float = 0.0

    AMPLITUDES = ("a2_plus", "a2_minus", "a3_plus", "a3_minus")

    def __post_init__(self):
        _check_finite(self, self.AMPLITUDES, nonneg=True)
        _check_positive(self, ("tau_plus", "tau_minus", "tau_x", "tau_y"))
        _check_finite(self, ("epsilon",), nonneg=True)

    def scaled(self, c: float) -> TripletParams:
        return replace(self, **{a: getattr(self, a) * c for a in self.AMPLITUDES})

    def pair_part(self) -> PairParams:
        """The pair rule obtained by dropping both triplet terms."""
        return PairParams(self.a2_plus, self.a2_minus, self.tau_plus, self.tau_minus)


@dataclass
class SynapseState:
    w: float = 0.0
    last_pre: float | None = None
    last_post: float | None = None
    second_last_pre: float | None = None
    second_last_post: float | None = None
    # all-to-all traces, valid at time ``t_trace``
    r1: float = 0.0
    r2: float = 0.0
    o1: float = 0.0
    o2: float = 0.0
    t_trace: float = -math.inf
    # presynaptic-centred pairing: pre spikes still waiting for a following post
    unpaired_pre: list[float] = field(default_factory=list)

    def _advance(self, t: float) -> None:
        latest = max(
            (x for x in (self.last_pre, self.last_post) if x is not None), default=-math.inf
        )
        if t < latest:
            raise ValueError(f"event at t={t!r} precedes already processed event at {latest!r}")

    def _decay(self, t: float, tau_r1, tau_r2, tau_o1, tau_o2) -> None:
        if self.t_trace == -math.inf:
            self.t_trace = t
            return
        dt = t - self.t_trace
        if dt:
            self.r1 *= math.exp(-dt / tau_r1)
            self.o1 *= math.exp(-dt / tau_o1)
            if tau_r2 is not None:
                self.r2 *= math.exp(-dt / tau_r2)
                self.o2 *= math.exp(-dt / tau_o2)
        self.t_trace = t

    def _record(self, kind: int, t: float) -> None:
        if kind == PRE:
            self.second_last_pre, self.last_pre = self.last_pre, t
        else:
            self.second_last_post, self.last_post = self.last_post, t


@dataclass(frozen=True, eq=False)
class WeightTrajectory:
    """Weight after every processed event (pre and post alike)."""

    times: np.ndarray
    weights: np.ndarray
    w0: float
    kinds: np.ndarray | None = None
    # exact per-event changes; differencing ``weights`` would add rounding
    dw: np.ndarray | None = None

    @property
    def final_w(self) -> float:
        return float(self.weights[-1]) if self.weights.size else float(self.w0)

    @property
    def delta_w(self) -> float:
        return self.final_w - self.w0

    @property
    def changes(self) -> np.ndarray:
        if self.dw is not None:
            return self.dw
        return np.diff(np.concatenate([[self.w0], self.weights]))


def pair_window(delta_t, params: PairParams):
    """Weight change of one pre/post pair separated by ``delta_t = t_post - t_pre``.

    Works on scalars and arrays. ``delta_t == 0`` counts as depression.
    """
    dt = np.asarray(delta_t, dtype=float)
    if not np.all(np.isfinite(dt)):
        raise ValueError("delta_t must be finite")
    out = np.where(
        dt > 0,
        params.a_plus * np.exp(-np.maximum(dt, 0.0) / params.tau_plus),
        -params.a_minus * np.exp(np.minimum(dt, 0.0) / params.tau_minus),
    )
    return float(out) if out.ndim == 0 else out


# --- per-event updates -------------------------------------------------------


def pair_on_pre(state: SynapseState, t: float, params: PairParams, mode: InteractionMode) -> float:
    state._advance(t)
    mode = InteractionMode.parse(mode)
    if mode is InteractionMode.ALL_TO_ALL:
        state._decay(t, params.tau_plus, None, params.tau_minus, None)
        dw = -params.a_minus * state.o1
        state.r1 += 1.0
    else:
        dw = 0.0 if state.last_post is None else pair_window(state.last_post - t, params)
        if mode is InteractionMode.PRESYNAPTIC_CENTRED:
            state.unpaired_pre.append(t)
    state.w += dw
    state._record(PRE, t)
    return dw


def pair_on_post(state: SynapseState, t: float, params: PairParams, mode: InteractionMode) -> float:
    state._advance(t)
    mode = InteractionMode.parse(mode)
    if mode is InteractionMode.ALL_TO_ALL:
        state._decay(t, params.tau_plus, None, params.tau_minus, None)
        if state.last_pre == t:
            # the coincident pre sits in r1 with weight 1 but pairs at dt = 0
            dw = params.a_plus * (state.r1 - 1.0) + pair_window(0.0, params)
        else:
            dw = params.a_plus * state.r1
        state.o1 += 1.0
    elif mode is InteractionMode.NEAREST_SPIKE:
        dw = 0.0 if state.last_pre is None else pair_window(t - state.last_pre, params)
    else:
        dw = 0.0
        for tp in state.unpaired_pre:
            dw += pair_window(t - tp, params)
        state.unpaired_pre.clear()
    state.w += dw
    state._record(POST, t)
    return dw


def triplet_on_post(
    state: SynapseState, t: float, params: TripletParams, mode: InteractionMode
) -> float:
    """Potentiation at a post spike: ``r1 * (A2+ + A3+ * o2)``.

    ``r1`` is the pre trace (time constant tau+) and ``o2`` the post trace
    (tau_y) taken just before this spike is added to it.
    """
    state._advance(t)
    mode = InteractionMode.parse(mode)
    p = params
    if mode is InteractionMode.ALL_TO_ALL:
        state._decay(t, p.tau_plus, p.tau_x, p.tau_minus, p.tau_y)
        o2 = state.o2 * math.exp(p.epsilon / p.tau_y) if p.epsilon else state.o2
        dw = state.r1 * (p.a2_plus + p.a3_plus * o2)
        state.o1 += 1.0
        state.o2 += 1.0
    elif mode is InteractionMode.NEAREST_SPIKE:
        r1 = 0.0 if state.last_pre is None else math.exp(-(t - state.last_pre) / p.tau_plus)
        o2 = (
            0.0
            if state.last_post is None
            else math.exp(-(t - state.last_post - p.epsilon) / p.tau_y)
        )
        dw = r1 * (p.a2_plus + p.a3_plus * o2)
    else:
        raise ValueError(f"{mode} is defined for the pair rule only")
    state.w += dw
    state._record(POST, t)
    return dw


def triplet_on_pre(
    state: SynapseState, t: float, params: TripletParams, mode: InteractionMode
) -> float:
    """Depression at a pre spike: ``-o1 * (A2- + A3- * r2)``."""
    state._advance(t)
    mode = InteractionMode.parse(mode)
    p = params
    if mode is InteractionMode.ALL_TO_ALL:
        state._decay(t, p.tau_plus, p.tau_x, p.tau_minus, p.tau_y)
        r2 = state.r2 * math.exp(p.epsilon / p.tau_x) if p.epsilon else state.r2
        dw = -state.o1 * (p.a2_minus + p.a3_minus * r2)
        state.r1 += 1.0
        state.r2 += 1.0
    elif mode is InteractionMode.NEAREST_SPIKE:
        o1 = 0.0 if state.last_post is None else math.exp(-(t - state.last_post) / p.tau_minus)
        r2 = (
            0.0
            if state.last_pre is None
            else math.exp(-(t - state.last_pre - p.epsilon) / p.tau_x)
        )
        dw = -o1 * (p.a2_minus + p.a3_minus * r2)
    else:
        raise ValueError(f"{mode} is defined for the pair rule only")
    state.w += dw
    state._record(PRE, t)
    return dw


# --- whole-train drivers -----------------------------------------------------


def _merge(pre: SpikeTrain, post: SpikeTrain):
    if pre.duration != post.duration:
        raise ValueError(
            f"pre and post trains must share a duration ({pre.duration!r} != {post.duration!r})"
        )
    times = np.concatenate([pre.times, post.times])
    kinds = np.concatenate(
        [np.full(len(pre), PRE, dtype=np.int8), np.full(len(post), POST, dtype=np.int8)]
    )
    order = np.lexsort((kinds, times))
    return times[order], kinds[order], order


def _trajectory(times, kinds, dw, w0) -> WeightTrajectory:
    weights = np.cumsum(np.concatenate([[float(w0)], dw]))[1:]
    return WeightTrajectory(times, weights, float(w0), kinds, dw)


def run_stepwise(
    pre: SpikeTrain,
    post: SpikeTrain,
    params: PairParams | TripletParams,
    mode: InteractionMode = InteractionMode.NEAREST_SPIKE,
    w0: float = 0.0,
) -> WeightTrajectory:
    """Reference driver: feed every event through the per-event update functions."""
    times, kinds, _ = _merge(pre, post)
    if isinstance(params, TripletParams):
        on_pre, on_post = triplet_on_pre, triplet_on_post
    else:
        on_pre, on_post = pair_on_pre, pair_on_post
    mode = InteractionMode.parse(mode)
    state = SynapseState(w=float(w0))
    weights = np.empty(times.size)
    dw = np.empty(times.size)
    for i, (t, k) in enumerate(zip(times.tolist(), kinds.tolist())):
        dw[i] = (on_pre if k == PRE else on_post)(state, t, params, mode)
        weights[i] = state.w
    return WeightTrajectory(times, weights, float(w0), kinds, dw)


def _nearest_index(sorted_times, query, inclusive):
    """Index of the latest ``sorted_times`` entry before (or at) each query, -1 if none."""
    side = "right" if inclusive else "left"
    return np.searchsorted(sorted_times, query, side=side) - 1


def _pair_changes(pre: np.ndarray, post: np.ndarray, params: PairParams, mode: InteractionMode):
    dw_pre = np.zeros(pre.size)
    dw_post = np.zeros(post.size)
    j = _nearest_index(post, pre, inclusive=False)
    has = j >= 0
    if has.any():
        dw_pre[has] = pair_window(post[j[has]] - pre[has], params)
    if mode is InteractionMode.NEAREST_SPIKE:
        i = _nearest_index(pre, post, inclusive=True)
        has = i >= 0
        if has.any():
            dw_post[has] = pair_window(post[has] - pre[i[has]], params)
    else:
        k = np.searchsorted(post, pre, side="left")
        has = k < post.size
        if has.any():
            np.add.at(dw_post, k[has], pair_window(post[k[has]] - pre[has], params))
    return dw_pre, dw_post


def _triplet_changes(pre: np.ndarray, post: np.ndarray, p: TripletParams):
    dw_pre = np.zeros(pre.size)
    dw_post = np.zeros(post.size)
    if post.size:
        i = _nearest_index(pre, post, inclusive=True)
        r1 = np.zeros(post.size)
        has = i >= 0
        r1[has] = np.exp(-(post[has] - pre[i[has]]) / p.tau_plus)
        o2 = np.zeros(post.size)
        o2[1:] = np.exp(-(post[1:] - post[:-1] - p.epsilon) / p.tau_y)
        dw_post = r1 * (p.a2_plus + p.a3_plus * o2)
    if pre.size:
        j = _nearest_index(post, pre, inclusive=False)
        o1 = np.zeros(pre.size)
        has = j >= 0
        o1[has] = np.exp(-(pre[has] - post[j[has]]) / p.tau_minus)
        r2 = np.zeros(pre.size)
        r2[1:] = np.exp(-(pre[1:] - pre[:-1] - p.epsilon) / p.tau_x)
        dw_pre = -o1 * (p.a2_minus + p.a3_minus * r2)
    return dw_pre, dw_post


def run_pair(
    pre: SpikeTrain,
    post: SpikeTrain,
    params: PairParams,
    mode: InteractionMode = InteractionMode.NEAREST_SPIKE,
    w0: float = 0.0,
) -> WeightTrajectory:
    mode = InteractionMode.parse(mode)
    if mode is InteractionMode.ALL_TO_ALL:
        return run_stepwise(pre, post, params, mode, w0)
    times, kinds, order = _merge(pre, post)
    dw_pre, dw_post = _pair_changes(pre.times, post.times, params, mode)
    return _trajectory(times, kinds, np.concatenate([dw_pre, dw_post])[order], w0)


def run_triplet(
    pre: SpikeTrain,
    post: SpikeTrain,
    params: TripletParams,
    mode: InteractionMode = InteractionMode.NEAREST_SPIKE,
    w0: float = 0.0,
) -> WeightTrajectory:
    mode = InteractionMode.parse(mode)
    if mode is InteractionMode.ALL_TO_ALL:
        return run_stepwise(pre, post, params, mode, w0)
    if mode is not InteractionMode.NEAREST_SPIKE:
        raise ValueError(f"{mode} is defined for the pair rule only")
    times, kinds, order = _merge(pre, post)
    dw_pre, dw_post = _triplet_changes(pre.times, post.times, params)
    return _trajectory(times, kinds, np.concatenate([dw_pre, dw_post])[order], w0)


def write_trajectory_csv(traj: WeightTrajectory, dest: str | os.PathLike | IO[str]) -> None:
    _csv.write_rows(
        dest, ["t_seconds", "w"], zip(traj.times.tolist(), traj.weights.tolist())
    )


def read_trajectory_csv(src: str | os.PathLike | IO[str], w0: float = 0.0) -> WeightTrajectory:
    header, rows = _csv.read_rows(src)
    if header != ["t_seconds", "w"]:
        raise ValueError(f"expected header 't_seconds,w', got {header!r}")
    data = np.array([[float(a), float(b)] for a, b in rows]).reshape(-1, 2)
    return WeightTrajectory(data[:, 0], data[:, 1], float(w0))
