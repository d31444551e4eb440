import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from stdp_bcm.rules import (
    InteractionMode,
    PairParams,
    SynapseState,
    TripletParams,
    pair_on_post,
    pair_on_pre,
    pair_window,
    read_trajectory_csv,
    run_pair,
    run_stepwise,
    run_triplet,
    triplet_on_post,
    triplet_on_pre,
    write_trajectory_csv,
)
from stdp_bcm.spikes import Seed, SpikeTrain, gen_poisson

NEAREST = InteractionMode.NEAREST_SPIKE
ALL = InteractionMode.ALL_TO_ALL
CENTRED = InteractionMode.PRESYNAPTIC_CENTRED

EXAMPLE_TRIPLET = TripletParams(
    a2_plus=0.005, a2_minus=0.007, a3_plus=0.006, a3_minus=0.0,
    tau_plus=0.020, tau_minus=0.050, tau_x=0.100, tau_y=0.100,
)


def train(times, duration=1.0):
    return SpikeTrain(times, duration)


# --- window -------------------------------------------------------------------


def test_window_at_tau_plus():
    p = PairParams()
    assert abs(pair_window(p.tau_plus, p) - math.exp(-1)) < 1e-12


def test_window_at_zero_is_depression():
    assert pair_window(0.0, PairParams(a_minus=0.7)) == -0.7


def test_window_direct_value():
    p = PairParams(a_plus=1.0, tau_plus=0.020)
    assert pair_window(0.005, p) == pytest.approx(0.778801, abs=1e-6)


def test_window_arrays_and_errors():
    p = PairParams()
    out = pair_window(np.array([-0.01, 0.0, 0.01]), p)
    assert out.shape == (3,)
    assert out[0] < 0 and out[1] < 0 and out[2] > 0
    with pytest.raises(ValueError):
        pair_window(math.inf, p)
    with pytest.raises(ValueError):
        pair_window(np.array([0.0, math.nan]), p)


def test_params_validation():
    with pytest.raises(ValueError):
        PairParams(tau_plus=0.0)
    with pytest.raises(ValueError):
        PairParams(a_plus=math.nan)
    with pytest.raises(ValueError):
        TripletParams(a3_plus=-1.0)
    with pytest.raises(ValueError):
        TripletParams(tau_y=-0.1)
    with pytest.raises(ValueError):
        TripletParams(epsilon=-1e-6)


def test_mode_parse():
    assert InteractionMode.parse("nearest") is NEAREST
    assert InteractionMode.parse("ALL_TO_ALL") is ALL
    assert InteractionMode.parse(CENTRED) is CENTRED
    with pytest.raises(ValueError):
        InteractionMode.parse("sideways")


# --- run_pair -----------------------------------------------------------------


@pytest.mark.parametrize("mode", list(InteractionMode))
def test_empty_pre(mode):
    traj = run_pair(train([]), train([0.1, 0.2]), PairParams(), mode, w0=0.3)
    assert traj.final_w == 0.3
    assert np.all(traj.changes == 0)


def test_single_pair_nearest():
    p = PairParams(a_plus=1.0, tau_plus=0.020)
    traj = run_pair(train([0.010]), train([0.020]), p, NEAREST, w0=0.5)
    assert traj.final_w == pytest.approx(0.5 + math.exp(-0.5), abs=1e-12)


def test_single_pre_modes_agree():
    p = PairParams(a_plus=1.0, tau_plus=0.020)
    pre, post = train([0.010]), train([0.020, 0.030])
    expected = math.exp(-0.5) + math.exp(-1.0)
    for mode in (NEAREST, ALL):
        assert run_pair(pre, post, p, mode).delta_w == pytest.approx(expected, abs=1e-12)


def test_duration_mismatch():
    with pytest.raises(ValueError):
        run_pair(train([0.1], 1.0), train([0.2], 2.0), PairParams())
    with pytest.raises(ValueError):
        run_triplet(train([0.1], 1.0), train([0.2], 2.0), TripletParams())


def test_trajectory_shape():
    pre, post = train([0.1, 0.3]), train([0.2])
    traj = run_pair(pre, post, PairParams(), NEAREST, w0=1.0)
    np.testing.assert_array_equal(traj.times, [0.1, 0.2, 0.3])
    assert traj.final_w == traj.weights[-1]
    assert traj.changes.size == 3


def test_tie_processes_pre_first():
    p = PairParams()
    traj = run_pair(train([0.1]), train([0.1]), p, NEAREST)
    np.testing.assert_array_equal(traj.kinds, [0, 1])
    assert traj.delta_w == pytest.approx(-p.a_minus)
    traj = run_pair(train([0.1]), train([0.1]), p, ALL)
    assert traj.delta_w == pytest.approx(-p.a_minus)


# --- per-event triplet updates --------------------------------------------------


def test_first_post_without_pre():
    s = SynapseState()
    assert triplet_on_post(s, 0.1, EXAMPLE_TRIPLET, NEAREST) == 0.0


def test_triplet_post_example():
    s = SynapseState()
    triplet_on_post(s, 0.0, EXAMPLE_TRIPLET, NEAREST)  # previous post
    triplet_on_pre(s, 0.025, EXAMPLE_TRIPLET, NEAREST)
    dw = triplet_on_post(s, 0.030, EXAMPLE_TRIPLET, NEAREST)
    assert dw == pytest.approx(0.778801 * (0.005 + 0.006 * 0.740818), abs=1e-7)
    assert dw == pytest.approx(0.0073556, rel=1e-4)


def test_triplet_post_reduces_to_pair_branch():
    p = TripletParams(a2_plus=0.8, a3_plus=0.0, tau_plus=0.02)
    for gap in (0.001, 0.03, 0.3):
        s = SynapseState()
        triplet_on_post(s, 0.0, p, NEAREST)
        triplet_on_pre(s, 0.5, p, NEAREST)
        dw = triplet_on_post(s, 0.5 + gap, p, NEAREST)
        assert dw == pytest.approx(pair_window(gap, p.pair_part()), abs=1e-15)


def test_first_pre_without_post():
    s = SynapseState()
    assert triplet_on_pre(s, 0.1, EXAMPLE_TRIPLET, NEAREST) == 0.0


def test_triplet_pre_example():
    s = SynapseState()
    triplet_on_post(s, 0.0, EXAMPLE_TRIPLET, NEAREST)
    dw = triplet_on_pre(s, 0.010, EXAMPLE_TRIPLET, NEAREST)
    assert dw == pytest.approx(-0.007 * math.exp(-0.2), abs=1e-12)
    assert dw == pytest.approx(-0.0057312, abs=1e-7)


def test_triplet_pre_zero_amplitudes():
    p = TripletParams(a2_minus=0.0, a3_minus=0.0)
    s = SynapseState()
    for t, f in [(0.0, triplet_on_post), (0.01, triplet_on_pre), (0.02, triplet_on_pre)]:
        dw = f(s, t, p, NEAREST)
    assert dw == 0.0


def test_time_regression_raises():
    s = SynapseState()
    triplet_on_post(s, 0.5, EXAMPLE_TRIPLET, NEAREST)
    with pytest.raises(ValueError):
        triplet_on_pre(s, 0.4, EXAMPLE_TRIPLET, NEAREST)
    s = SynapseState()
    pair_on_pre(s, 0.5, PairParams(), ALL)
    with pytest.raises(ValueError):
        pair_on_post(s, 0.1, PairParams(), ALL)


def test_triplet_rejects_centred_mode():
    with pytest.raises(ValueError):
        triplet_on_post(SynapseState(), 0.1, EXAMPLE_TRIPLET, CENTRED)
    with pytest.raises(ValueError):
        run_triplet(train([0.1]), train([0.2]), EXAMPLE_TRIPLET, CENTRED)


def test_triplet_empty_post():
    traj = run_triplet(train([0.1, 0.2, 0.3]), train([]), EXAMPLE_TRIPLET, NEAREST, w0=2.0)
    assert traj.final_w == 2.0
    assert np.all(np.diff(traj.weights) <= 0)


def test_triplet_two_post_example():
    p = EXAMPLE_TRIPLET
    traj = run_triplet(train([0.0]), train([0.005, 0.035]), p, NEAREST)
    first = math.exp(-0.005 / 0.02) * p.a2_plus
    second = math.exp(-0.035 / 0.02) * (p.a2_plus + p.a3_plus * math.exp(-0.030 / 0.1))
    assert traj.delta_w == pytest.approx(first + second, abs=1e-15)


def test_epsilon_subtracted_literally():
    p = EXAMPLE_TRIPLET.__class__(**{**EXAMPLE_TRIPLET.__dict__, "epsilon": 0.001})
    s = SynapseState()
    triplet_on_post(s, 0.0, p, NEAREST)
    triplet_on_pre(s, 0.025, p, NEAREST)
    dw = triplet_on_post(s, 0.030, p, NEAREST)
    expect = math.exp(-0.005 / 0.02) * (0.005 + 0.006 * math.exp(-0.029 / 0.1))
    assert dw == pytest.approx(expect, abs=1e-15)


# --- brute-force oracles --------------------------------------------------------


def test_all_to_all_matches_double_sum():
    rng = np.random.default_rng(1)
    pp = PairParams()
    tp = TripletParams(a3_minus=0.004, epsilon=1e-4)
    for _ in range(100):
        pre, post = oracles.random_trains(rng)
        got = run_pair(pre, post, pp, ALL).changes
        np.testing.assert_allclose(got, oracles.pair_all_to_all(pre, post, pp), rtol=0, atol=1e-12)
        got = run_triplet(pre, post, tp, ALL).changes
        np.testing.assert_allclose(
            got, oracles.triplet_all_to_all(pre, post, tp), rtol=0, atol=1e-12
        )


def test_nearest_matches_neighbour_scan():
    rng = np.random.default_rng(2)
    pp = PairParams()
    tp = TripletParams(a3_minus=0.004, epsilon=1e-4)
    for _ in range(100):
        pre, post = oracles.random_trains(rng)
        assert np.array_equal(run_pair(pre, post, pp, NEAREST).changes, oracles.pair_nearest(pre, post, pp))
        assert np.array_equal(
            run_triplet(pre, post, tp, NEAREST).changes, oracles.triplet_nearest(pre, post, tp)
        )


def test_centred_matches_scan():
    rng = np.random.default_rng(3)
    pp = PairParams()
    for _ in range(100):
        pre, post = oracles.random_trains(rng)
        got = run_pair(pre, post, pp, CENTRED).delta_w
        assert got == pytest.approx(oracles.pair_presynaptic_centred(pre, post, pp), abs=1e-12)


@pytest.mark.parametrize("mode", [NEAREST, CENTRED, ALL])
def test_vectorised_equals_stepwise_pair(mode):
    pre = gen_poisson(30.0, 5.0, Seed(4, 0, 0))
    post = gen_poisson(45.0, 5.0, Seed(4, 0, 1))
    fast = run_pair(pre, post, PairParams(), mode)
    slow = run_stepwise(pre, post, PairParams(), mode)
    np.testing.assert_allclose(fast.weights, slow.weights, rtol=0, atol=1e-12)


def test_vectorised_equals_stepwise_triplet():
    pre = gen_poisson(30.0, 5.0, Seed(4, 1, 0))
    post = gen_poisson(45.0, 5.0, Seed(4, 1, 1))
    p = TripletParams(a3_minus=0.003, epsilon=2e-4)
    fast = run_triplet(pre, post, p, NEAREST)
    slow = run_stepwise(pre, post, p, NEAREST)
    np.testing.assert_allclose(fast.weights, slow.weights, rtol=0, atol=1e-14)


def test_stepwise_handles_ties():
    pre, post = train([0.1, 0.2, 0.3]), train([0.1, 0.25, 0.3])
    for mode in (NEAREST, CENTRED):
        fast = run_pair(pre, post, PairParams(), mode)
        slow = run_stepwise(pre, post, PairParams(), mode)
        np.testing.assert_allclose(fast.weights, slow.weights, atol=1e-15)
    fast = run_triplet(pre, post, EXAMPLE_TRIPLET, NEAREST)
    slow = run_stepwise(pre, post, EXAMPLE_TRIPLET, NEAREST)
    np.testing.assert_allclose(fast.weights, slow.weights, atol=1e-15)
    np.testing.assert_allclose(
        run_pair(pre, post, PairParams(), ALL).changes,
        oracles.pair_all_to_all(pre, post, PairParams()),
        atol=1e-12,
    )


# --- properties -----------------------------------------------------------------


@pytest.mark.parametrize("mode", [NEAREST, ALL])
def test_triplet_reduces_to_pair(mode):
    rng = np.random.default_rng(5)
    tp = TripletParams(a2_plus=0.9, a2_minus=0.6, a3_plus=0.0, a3_minus=0.0)
    for _ in range(30):
        pre, post = oracles.random_trains(rng)
        a = run_triplet(pre, post, tp, mode)
        b = run_pair(pre, post, tp.pair_part(), mode)
        np.testing.assert_array_equal(a.times, b.times)
        np.testing.assert_allclose(a.weights, b.weights, rtol=0, atol=1e-13)


@given(c=st.floats(0.01, 100.0), seed=st.integers(0, 1000))
@settings(max_examples=25, deadline=None)
def test_amplitude_linearity(c, seed):
    pre = gen_poisson(20.0, 2.0, Seed(seed, 0, 0))
    post = gen_poisson(20.0, 2.0, Seed(seed, 0, 1))
    pp = PairParams()
    for mode in (NEAREST, CENTRED):
        base = run_pair(pre, post, pp, mode).changes
        scaled = run_pair(pre, post, pp.scaled(c), mode).changes
        np.testing.assert_allclose(scaled, c * base, rtol=1e-12, atol=1e-300)
    tp = TripletParams(a3_minus=0.002)
    base = run_triplet(pre, post, tp, NEAREST).changes
    scaled = run_triplet(pre, post, tp.scaled(c), NEAREST).changes
    np.testing.assert_allclose(scaled, c * base, rtol=1e-12, atol=1e-300)


@pytest.mark.parametrize("mode", [NEAREST, ALL])
def test_time_shift_invariance(mode):
    pre = gen_poisson(25.0, 2.0, Seed(8, 0, 0))
    post = gen_poisson(25.0, 2.0, Seed(8, 0, 1))
    tp = TripletParams(a3_minus=0.002)
    for offset in (0.5, 3.0):
        a = run_triplet(pre, post, tp, mode).changes
        b = run_triplet(pre.shifted(offset), post.shifted(offset), tp, mode).changes
        np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-15)
        a = run_pair(pre, post, PairParams(), mode).changes
        b = run_pair(pre.shifted(offset), post.shifted(offset), PairParams(), mode).changes
        np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-15)


def test_sparse_inputs_modes_agree():
    pp = PairParams()
    tp = TripletParams(a3_minus=0.002)
    gap = 20 * max(tp.tau_plus, tp.tau_minus, tp.tau_x, tp.tau_y) * 1.05
    rng = np.random.default_rng(9)
    # interleave pre and post with every same-kind ISI above 20 time constants
    base = np.arange(20) * 2 * gap
    pre_t = base + rng.uniform(0, 0.05, base.size)
    post_t = base + gap + rng.uniform(-0.03, 0.03, base.size)
    duration = float(base[-1] + 3 * gap)
    pre, post = train(pre_t, duration), train(post_t, duration)
    for params, run in ((pp, run_pair), (tp, run_triplet)):
        a = run(pre, post, params, NEAREST).final_w
        b = run(pre, post, params, ALL).final_w
        assert a == pytest.approx(b, rel=1e-6)


def test_trajectory_csv_round_trip(tmp_path):
    pre = gen_poisson(10.0, 3.0, Seed(1, 0, 0))
    post = gen_poisson(10.0, 3.0, Seed(1, 0, 1))
    traj = run_pair(pre, post, PairParams(), NEAREST, w0=0.25)
    path = tmp_path / "traj.csv"
    write_trajectory_csv(traj, path)
    assert path.read_text().startswith("t_seconds,w\n")
    back = read_trajectory_csv(path, w0=0.25)
    np.testing.assert_array_equal(back.times, traj.times)
    np.testing.assert_array_equal(back.weights, traj.weights)
    with pytest.raises(ValueError):
        read_trajectory_csv(io.StringIO("t,w\n"))
