"""Slow, obviously-correct reference implementations used by the tests."""
import math

import numpy as np

from stdp_bcm.rules import PairParams, TripletParams, pair_window

# numpy's exp, so nearest-spike results can be compared bit for bit
exp = np.exp


def _events(pre, post):
    ev = [(t, 0) for t in pre.times.tolist()] + [(t, 1) for t in post.times.tolist()]
    ev.sort()  # pre (0) before post (1) on ties
    return ev


def pair_all_to_all(pre, post, p: PairParams):
    """Per-event weight changes as an explicit double sum over all earlier partners."""
    ev = _events(pre, post)
    out = []
    for n, (t, kind) in enumerate(ev):
        earlier = [s for s, k in ev[:n] if k != kind]
        if kind == 1:
            out.append(sum(pair_window(t - s, p) for s in earlier))
        else:
            out.append(sum(pair_window(s - t, p) for s in earlier))
    return np.array(out)


def triplet_all_to_all(pre, post, p: TripletParams):
    ev = _events(pre, post)
    out = []
    for n, (t, kind) in enumerate(ev):
        opp = [s for s, k in ev[:n] if k != kind]
        same = [s for s, k in ev[:n] if k == kind]
        if kind == 1:
            pair = sum(math.exp(-(t - s) / p.tau_plus) for s in opp)
            trip = sum(math.exp(-(t - s - p.epsilon) / p.tau_y) for s in same)
            out.append(pair * (p.a2_plus + p.a3_plus * trip))
        else:
            pair = sum(math.exp(-(t - s) / p.tau_minus) for s in opp)
            trip = sum(math.exp(-(t - s - p.epsilon) / p.tau_x) for s in same)
            out.append(-pair * (p.a2_minus + p.a3_minus * trip))
    return np.array(out)


def _scan_last(ev, n, kind):
    for s, k in reversed(ev[:n]):
        if k == kind:
            return s
    return None


def pair_nearest(pre, post, p: PairParams):
    ev = _events(pre, post)
    out = []
    for n, (t, kind) in enumerate(ev):
        partner = _scan_last(ev, n, 1 - kind)
        if partner is None:
            out.append(0.0)
        elif kind == 1:
            out.append(pair_window(t - partner, p))
        else:
            out.append(pair_window(partner - t, p))
    return np.array(out)


def pair_presynaptic_centred(pre, post, p: PairParams):
    """Total change: each pre pairs with its closest earlier post and closest later post."""
    total = 0.0
    for t in pre.times.tolist():
        before = [s for s in post.times.tolist() if s < t]
        after = [s for s in post.times.tolist() if s >= t]
        if before:
            total += pair_window(before[-1] - t, p)
        if after:
            total += pair_window(after[0] - t, p)
    return total


def triplet_nearest(pre, post, p: TripletParams):
    ev = _events(pre, post)
    out = []
    for n, (t, kind) in enumerate(ev):
        partner = _scan_last(ev, n, 1 - kind)
        prev_same = _scan_last(ev, n, kind)
        if partner is None:
            out.append(0.0)
            continue
        if kind == 1:
            r1 = exp(-(t - partner) / p.tau_plus)
            o2 = 0.0 if prev_same is None else exp(-(t - prev_same - p.epsilon) / p.tau_y)
            out.append(r1 * (p.a2_plus + p.a3_plus * o2))
        else:
            o1 = exp(-(t - partner) / p.tau_minus)
            r2 = 0.0 if prev_same is None else exp(-(t - prev_same - p.epsilon) / p.tau_x)
            out.append(-o1 * (p.a2_minus + p.a3_minus * r2))
    return np.array(out)


def random_trains(rng, max_spikes=50, duration=1.0):
    from stdp_bcm.spikes import SpikeTrain

    def one():
        n = int(rng.integers(0, max_spikes + 1))
        return SpikeTrain(np.unique(rng.uniform(0, duration, n)), duration)

    return one(), one()
