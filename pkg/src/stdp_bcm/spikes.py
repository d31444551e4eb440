"""Stimulus spike trains: homogeneous Poisson processes and pairing protocols."""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import IO

import numpy as np

from . import _csv

__all__ = [
    "SpikeTrain",
    "RateSpec",
    "Seed",
    "TrainViolation",
    "gen_poisson",
    "gen_pairing_protocol",
    "validate_train",
    "write_train_csv",
    "read_train_csv",
]


@dataclass(frozen=True, eq=False)
class SpikeTrain:
    """Strictly increasing event times (seconds) observed over ``[0, duration)``."""

    times: np.ndarray
    duration: float

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).reshape(-1)
        times.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "duration", float(self.duration))
        violation = validate_train(self)
        if violation is not None:
            raise ValueError(f"invalid spike train: {violation}")

    def __len__(self) -> int:
        return self.times.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, SpikeTrain):
            return NotImplemented
        return self.duration == other.duration and np.array_equal(self.times, other.times)

    def shifted(self, offset: float) -> SpikeTrain:
        """Same train translated by ``offset`` (duration grows to keep all times inside)."""
        return SpikeTrain(self.times + offset, self.duration + offset)

    @property
    def rate(self) -> float:
        return self.times.size / self.duration


@dataclass(frozen=True)
class RateSpec:
    rho_x: float
    rho_y: float

    def __post_init__(self):
        for name in ("rho_x", "rho_y"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")


@dataclass(frozen=True)
class Seed:
    """Key of an independent random stream.

    ``(value, stream, substream)`` feeds a :class:`numpy.random.SeedSequence` whose
    output drives a counter-based Philox generator, so a given key always yields
    the same numbers no matter which process or thread asks for them.
    """

    value: int
    stream: int = 0
    substream: int = 0

    def __post_init__(self):
        for name in ("value", "stream", "substream"):
            v = getattr(self, name)
            if not 0 <= int(v) < 2**64:
                raise ValueError(f"{name} must be a 64-bit unsigned integer, got {v!r}")

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(
            entropy=int(self.value), spawn_key=(int(self.stream), int(self.substream))
        )
        return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True)
class TrainViolation:
    kind: str  # "ordering" | "duplicate" | "bounds" | "non-finite" | "duration"
    index: int
    detail: str = field(default="", compare=False)

    def __str__(self) -> str:
        return f"{self.kind} at index {self.index}" + (f" ({self.detail})" if self.detail else "")


def validate_train(train, duration: float | None = None) -> TrainViolation | None:
    """Return the first broken invariant of a train, or ``None`` if it is valid.

    Accepts a :class:`SpikeTrain` (or anything with ``times``/``duration``), or a
    raw array of times together with ``duration``.
    """
    if duration is None:
        times, duration = train.times, train.duration
    else:
        times = train
    times = np.asarray(times, dtype=float).reshape(-1)
    duration = float(duration)
    if not (math.isfinite(duration) and duration > 0):
        return TrainViolation("duration", -1, f"duration={duration!r}")
    bad = np.flatnonzero(~np.isfinite(times))
    if bad.size:
        return TrainViolation("non-finite", int(bad[0]))
    if times.size:
        diffs = np.diff(times)
        first_dup = np.flatnonzero(diffs == 0)
        first_dec = np.flatnonzero(diffs < 0)
        candidates = []
        if first_dup.size:
            candidates.append((int(first_dup[0]) + 1, "duplicate"))
        if first_dec.size:
            candidates.append((int(first_dec[0]) + 1, "ordering"))
        out = np.flatnonzero((times < 0) | (times >= duration))
        if out.size:
            candidates.append((int(out[0]), "bounds"))
        if candidates:
            index, kind = min(candidates)
            return TrainViolation(kind, index, f"t={times[index]!r}")
    return None


def gen_poisson(rate: float, duration: float, seed: Seed) -> SpikeTrain:
    """Homogeneous Poisson train built from inverse-CDF exponential intervals.

    Intervals are ``-log(1 - u) / rate`` with ``u`` uniform on ``[0, 1)``; they are
    drawn in blocks and accumulated until the running time passes ``duration``.
    """
    if not math.isfinite(rate) or rate < 0:
        raise ValueError(f"rate must be finite and >= 0, got {rate!r}")
    if not math.isfinite(duration) or duration <= 0:
        raise ValueError(f"duration must be > 0, got {duration!r}")
    if rate == 0:
        return SpikeTrain(np.empty(0), duration)

    rng = seed.generator()
    expected = rate * duration
    block = int(expected + 6.0 * math.sqrt(expected) + 16)
    chunks = []
    t = 0.0
    while t < duration:
        isi = -np.log1p(-rng.random(block)) / rate
        times = t + np.cumsum(isi)
        chunks.append(times)
        t = float(times[-1])
        block = max(16, block // 4)
    times = np.concatenate(chunks)
    times = times[: np.searchsorted(times, duration, side="left")]
    return SpikeTrain(times, duration)


def gen_pairing_protocol(
    delta_t: float, pair_frequency: float, n_pairs: int
) -> tuple[SpikeTrain, SpikeTrain]:
    """Pre spikes at ``k / f`` and post spikes at ``k / f + delta_t``.

    Both trains are shifted by ``max(0, -delta_t)`` so that no time is negative.
    Their common duration is ``n_pairs / f`` plus that shift.
    """
    if not (math.isfinite(pair_frequency) and pair_frequency > 0):
        raise ValueError(f"pair_frequency must be > 0, got {pair_frequency!r}")
    if int(n_pairs) != n_pairs or n_pairs < 1:
        raise ValueError(f"n_pairs must be a positive integer, got {n_pairs!r}")
    period = 1.0 / pair_frequency
    if not math.isfinite(delta_t) or abs(delta_t) >= period:
        raise ValueError(
            f"|delta_t|={abs(delta_t)!r} must be shorter than the pairing period {period!r}"
        )
    k = np.arange(int(n_pairs), dtype=float)
    shift = max(0.0, -delta_t)
    pre = k * period + shift
    post = k * period + (delta_t + shift)
    duration = n_pairs * period + shift
    return SpikeTrain(pre, duration), SpikeTrain(post, duration)


def write_train_csv(train: SpikeTrain, dest: str | os.PathLike | IO[str]) -> None:
    _csv.write_rows(dest, ["t_seconds"], ([float(t)] for t in train.times))


def read_train_csv(src: str | os.PathLike | IO[str], duration: float) -> SpikeTrain:
    header, rows = _csv.read_rows(src)
    if header != ["t_seconds"]:
        raise ValueError(f"expected header 't_seconds', got {header!r}")
    return SpikeTrain(np.array([float(r[0]) for r in rows if r]), duration)
