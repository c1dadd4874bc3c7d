import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from josephson_qrc import backend
from josephson_qrc.baselines import (
    STOParams, StaticReservoirParams, SweepRow, baseline_features, baseline_sweep, crossing,
    static_features, sto_features, sweep_to_csv,
)
from josephson_qrc.datasets import gen_sine_square
from josephson_qrc.errors import InvalidSpecificationError, PositivityViolationError


def logistic_power(t, a, gamma, q, p0):
    """Exact solution of dp/dt = 2(a - gamma) p - 2(gamma q + a) p^2."""
    r, s = 2 * (a - gamma), 2 * (gamma * q + a)
    e = np.exp(r * t)
    return r * p0 * e / (r + s * p0 * (e - 1))


def test_static_hand_example():
    params = StaticReservoirParams(size=2)
    w_in = np.array([1.0, -2.0])
    w_res = np.array([[0.5, 0.0], [1.0, 1.0]])
    fm = static_features([1.0, 2.0], params, bias=False, w_in=w_in, w_res=w_res)
    # t=0: relu(w_in) ; t=1: relu(2 w_in + w_res @ w_in * 1) = relu([2.5, -5])
    np.testing.assert_allclose(fm.values, [[1.0, 2.5], [0.0, 0.0]])
    literal = static_features([1.0, 2.0], StaticReservoirParams(size=2, variant="literal"),
                              bias=False, w_in=w_in, w_res=w_res)
    np.testing.assert_allclose(literal.values[:, 1], [2.5, 0.0])


def test_static_memory_is_one_step():
    params = StaticReservoirParams(size=10, seed=3)
    a = static_features([0.3, -1.0, 0.5, 0.7], params).values
    b = static_features([-0.9, 0.2, 0.5, 0.7], params).values
    assert np.abs(a[:, 2] - b[:, 2]).max() > 0
    np.testing.assert_array_equal(a[:, 3], b[:, 3])


def test_static_weights_seeded_and_validated():
    w1 = StaticReservoirParams(seed=4).weights()
    w2 = StaticReservoirParams(seed=4).weights()
    np.testing.assert_array_equal(w1[1], w2[1])
    with pytest.raises(InvalidSpecificationError):
        StaticReservoirParams(size=0)
    with pytest.raises(InvalidSpecificationError):
        StaticReservoirParams(variant="deep")


def test_sto_matches_logistic_solution():
    params = STOParams(size=3)
    w = np.array([0.2, 0.6, 1.0])
    x = np.zeros(30)
    fm = sto_features(x, params, bias=False, w_in=w)
    t = params.interval * np.arange(1, 31)
    a = w[:, None] * params.i_dc * params.sigma
    exact = logistic_power(t[None, :], a, params.gamma_damping, params.q, params.p0)
    np.testing.assert_allclose(fm.values, exact, rtol=1e-9, atol=1e-12)


def test_sto_reaches_fixed_point():
    params = STOParams(size=4, seed=1)
    w = params.weights()
    fm = sto_features(np.full(200, 0.5), params, bias=False, w_in=w)
    current = params.i_dc + params.input_gain * 0.5
    np.testing.assert_allclose(fm.values[:, -1], params.fixed_point(w, current), atol=1e-9)
    assert params.fixed_point(np.array([1.0]), params.i_dc - params.input_gain)[0] == pytest.approx(0.1)
    assert params.fixed_point(np.array([1.0]), params.i_dc + params.input_gain)[0] == pytest.approx(0.9)
    assert params.fixed_point(np.array([0.01]), params.i_dc)[0] == 0.0


@settings(max_examples=20)
@given(st.lists(st.floats(-1, 1), min_size=1, max_size=40), st.integers(0, 100))
def test_sto_powers_bounded(inputs, seed):
    fm = sto_features(inputs, STOParams(size=5, seed=seed), bias=False)
    assert np.all(fm.values >= 0) and np.all(fm.values <= 1)


def test_sto_step_guard_and_divergence_flag():
    with pytest.raises(InvalidSpecificationError):
        STOParams(dt=1e-8)
    # the kernel flags the first interval whose unclamped power leaves [0, 1]
    out, bad = backend.sto_power(np.array([1.0]), np.array([0.0, 1e9]), 1e6, 2.0, 1.0, 5e-8, 2, 0.0,
                                 np.array([0.5]))
    assert bad == 1
    assert 0.0 <= out.min() and out.max() <= 1.0


def test_baseline_features_dispatch_and_determinism():
    x = gen_sine_square(4, seed=1).inputs
    a = baseline_features(x, "sto", 6, seed=2)
    b = baseline_features(x, "sto", 6, seed=2)
    np.testing.assert_array_equal(a.values, b.values)
    assert a.labels[-1] == "bias" and a.values.shape == (7, 32)
    with pytest.raises(InvalidSpecificationError):
        baseline_features(x, "esn", 4, 0)


def test_baseline_sweep_shapes(tmp_path):
    task = gen_sine_square(20, seed=5)
    rows = baseline_sweep(task, [4, 8], "static", seeds=[0, 1])
    assert [r.size for r in rows] == [4, 8]
    assert all(len(r.accuracies) == 2 and 0 <= r.mean <= 1 for r in rows)
    sweep_to_csv(rows, tmp_path / "s.csv")
    assert (tmp_path / "s.csv").read_text().splitlines()[0] == "size,mean_accuracy,std,seeds"


def test_crossing_definitions():
    rows = [SweepRow(s, m, 0.0, [0]) for s, m in [(4, 0.9), (8, 0.995), (12, 0.98), (16, 0.99), (20, 1.0)]]
    assert crossing(rows, sustained=False) == 8
    assert crossing(rows) == 16
    assert crossing(rows[:3]) is None
