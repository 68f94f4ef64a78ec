import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gfm_htva.blocks import FirstOrderState, PIState, hpf_step, lpf_step, pi_step, reset


def run_lpf(state, stream):
    return np.array([lpf_step(state, float(u)) for u in stream])


def test_lpf_dc_gain():
    wc, dt = 100.0, 1e-4
    s = FirstOrderState(wc, dt)
    n = int(round(10 / wc / dt))
    y = run_lpf(s, np.full(n, 0.5))
    # ten time constants leave exp(-10) of the step outstanding
    assert y[-1] == pytest.approx(0.5 * (1 - math.exp(-10)), abs=1e-6)
    y = run_lpf(s, np.full(3 * n, 0.5))
    assert y[-1] == pytest.approx(0.5, abs=1e-12)


def test_lpf_step_response_matches_exponential():
    wc = 50.0
    dt = 1e-4 / wc
    s = FirstOrderState(wc, dt)
    n = int(round(1 / wc / dt))
    y = run_lpf(s, np.ones(n))
    assert y[-1] == pytest.approx(1 - math.exp(-1), abs=1e-3)


def test_lpf_zero_input_stays_zero():
    s = FirstOrderState(10.0, 1e-3)
    assert not run_lpf(s, np.zeros(100)).any()


def test_hpf_blocks_dc_and_passes_edge():
    wd, dt = 60.0, 50e-6
    s = FirstOrderState(wd, dt)
    first = hpf_step(s, 1.0)
    assert first == pytest.approx(1.0, abs=wd * dt)
    y = [first] + [hpf_step(s, 1.0) for _ in range(int(round(10 / wd / dt)) - 1)]
    assert y[-1] == pytest.approx(math.exp(-10), abs=1e-6)
    # decays like exp(-wd t)
    k = int(round(1 / wd / dt))
    assert y[k] == pytest.approx(math.exp(-1), abs=2e-3)


def test_hpf_decays_below_1e6_after_ten_time_constants_plus():
    wd, dt = 60.0, 50e-6
    s = FirstOrderState(wd, dt)
    for _ in range(int(round(14 / wd / dt))):
        y = hpf_step(s, 1.0)
    assert abs(y) < 1e-6


@given(st.lists(st.integers(0, 1), min_size=1, max_size=400), st.floats(1.0, 3000.0), st.floats(1e-6, 5e-4))
def test_complementarity_exact_for_activation_streams(bits, wc, dt):
    lo, hi = FirstOrderState(wc, dt), FirstOrderState(wc, dt)
    for b in bits:
        u = float(b)
        assert lpf_step(lo, u) + hpf_step(hi, u) == u


@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=200))
def test_complementarity_general_streams_to_rounding(stream):
    lo, hi = FirstOrderState(300.0, 50e-6), FirstOrderState(300.0, 50e-6)
    eps = np.finfo(float).eps
    for u in stream:
        y = lpf_step(lo, u)
        h = hpf_step(hi, u)
        assert abs(y + h - u) <= 2 * eps * max(abs(u), abs(y))


def test_trapezoidal_lpf_vs_continuous_within_tenth_percent():
    wc, dt = 200.0, 0.01 / 200.0
    s = FirstOrderState(wc, dt)
    s.u_prev = 1.0  # step present at t = 0
    t = dt * np.arange(1, 2001)
    y = run_lpf(s, np.ones_like(t))
    exact = 1 - np.exp(-wc * t)
    assert np.max(np.abs(y - exact)) <= 1e-3


@pytest.mark.parametrize("wc,dt", [(0.0, 1e-3), (-1.0, 1e-3), (10.0, 0.0), (5000.0, 1e-3)])
def test_first_order_rejects_bad_parameters(wc, dt):
    with pytest.raises(ValueError):
        FirstOrderState(wc, dt)


def test_filters_reject_non_finite_input():
    with pytest.raises(ValueError):
        lpf_step(FirstOrderState(1.0, 1e-3), float("inf"))


def test_pi_examples():
    s = PIState(1.1, 10.0, integ=0.3)
    assert pi_step(s, 0.0, 1e-3) == pytest.approx(0.3)
    assert pi_step(PIState(1.1, 0.0), 0.5, 1e-3) == pytest.approx(0.55)


def test_pi_trapezoidal_integration():
    s = PIState(0.0, 2.0)
    pi_step(s, 1.0, 0.1)
    assert s.integ == pytest.approx(0.1)  # half step: (1 + 0)/2 * 2 * 0.1
    pi_step(s, 1.0, 0.1)
    assert s.integ == pytest.approx(0.3)


def test_pi_anti_windup_under_sustained_error():
    s = PIState(0.5, 100.0, limit=1.0)
    outs = [pi_step(s, 1.0, 1e-3) for _ in range(200)]
    assert max(abs(o) for o in outs) <= 1.0
    held = s.integ
    pi_step(s, 1.0, 1e-3)
    assert s.integ == held
    # unwinds immediately when the error reverses
    assert pi_step(s, -1.0, 1e-3) < 1.0


def test_pi_freeze_holds_integrator():
    s = PIState(1.0, 5.0, integ=0.2)
    pi_step(s, 1.0, 1e-2, freeze=True)
    assert s.integ == 0.2


@given(st.lists(st.floats(-50, 50), min_size=1, max_size=200), st.floats(0.1, 5.0))
def test_pi_clamp_bounds_output(errors, clamp):
    s = PIState(1.1, 900.0, limit=clamp)
    for e in errors:
        assert abs(pi_step(s, e, 50e-6)) <= clamp


def test_pi_rejects_bad_gains():
    with pytest.raises(ValueError):
        PIState(-1.0, 1.0)
    with pytest.raises(ValueError):
        PIState(1.0, 1.0, limit=0.0)


def test_reset_examples():
    f = FirstOrderState(10.0, 1e-3)
    run_lpf(f, np.ones(10))
    reset(f)
    assert lpf_step(f, 0.0) == 0.0
    p = PIState(1.0, 1.0, integ=5.0)
    assert reset(p).integ == 0.0
    once = reset(PIState(1.0, 1.0, integ=5.0, e_prev=2.0))
    twice = reset(reset(PIState(1.0, 1.0, integ=5.0, e_prev=2.0)))
    assert once == twice
    with pytest.raises(TypeError):
        reset(object())
