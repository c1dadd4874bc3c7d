import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from josephson_qrc.errors import InvalidSpecificationError
from josephson_qrc.readout import (
    ReadoutWeights, classification_accuracy, fit, log_error_curve, log_rmse_curve, pinv, predict, rmse,
)


def test_identity_features_recover_targets():
    F = np.eye(4)
    Y = np.array([[1.0, 2.0, 3.0, 4.0]])
    np.testing.assert_allclose(fit(F, Y).values, Y, atol=1e-14)


@settings(max_examples=40)
@given(st.integers(0, 2**31), st.integers(2, 8), st.integers(10, 60))
def test_full_rank_matches_lstsq(seed, n_feat, n_samp):
    rng = np.random.default_rng(seed)
    F = rng.normal(size=(n_feat, n_samp))
    Y = rng.normal(size=(2, n_samp))
    W = fit(F, Y).values
    oracle = scipy.linalg.lstsq(F.T, Y.T)[0].T
    np.testing.assert_allclose(W, oracle, atol=1e-9)
    # normal equations: the residual is orthogonal to every feature row
    np.testing.assert_allclose((W @ F - Y) @ F.T, 0, atol=1e-9 * n_samp)


def test_rank_deficient_gives_minimum_norm_symmetric_weights():
    rng = np.random.default_rng(1)
    row = rng.normal(size=50)
    F = np.vstack([row, row])
    W = fit(F, 3 * row).values
    np.testing.assert_allclose(W, [[1.5, 1.5]], atol=1e-12)


@settings(max_examples=25)
@given(st.integers(0, 2**31))
def test_pinv_moore_penrose_identities(seed):
    rng = np.random.default_rng(seed)
    F = rng.normal(size=(5, 3)) @ rng.normal(size=(3, 20))  # rank 3
    P = pinv(F)
    np.testing.assert_allclose(F @ P @ F, F, atol=1e-10)
    np.testing.assert_allclose(P @ F @ P, P, atol=1e-10)
    np.testing.assert_allclose((F @ P).T, F @ P, atol=1e-10)
    np.testing.assert_allclose((P @ F).T, P @ F, atol=1e-10)


def test_fit_is_linear_in_targets():
    rng = np.random.default_rng(2)
    F = rng.normal(size=(4, 30))
    y1, y2 = rng.normal(size=30), rng.normal(size=30)
    np.testing.assert_allclose(fit(F, 2 * y1 - y2).values, 2 * fit(F, y1).values - fit(F, y2).values,
                               atol=1e-12)


def test_ridge_matches_closed_form():
    rng = np.random.default_rng(3)
    F = rng.normal(size=(3, 25))
    y = rng.normal(size=25)
    lam = 0.7
    oracle = np.linalg.inv(F @ F.T + lam * np.eye(3)) @ F @ y
    np.testing.assert_allclose(fit(F, y, ridge=lam).values[0], oracle, atol=1e-12)
    with pytest.raises(InvalidSpecificationError):
        fit(F, y, ridge=-1)


def test_shape_errors():
    with pytest.raises(InvalidSpecificationError):
        fit(np.ones((2, 5)), np.ones(4))
    with pytest.raises(InvalidSpecificationError):
        predict(np.ones((1, 3)), np.ones((2, 5)))
    with pytest.raises(InvalidSpecificationError):
        rmse([], [])


def test_predict_and_weights_csv(tmp_path):
    W = ReadoutWeights(np.array([[0.25, -1 / 3, 1.0]]), ["p_00", "p_01", "bias"])
    path = tmp_path / "w.csv"
    W.to_csv(path, ["square"])
    back = ReadoutWeights.from_csv(path)
    np.testing.assert_array_equal(back.values, W.values)
    assert back.labels == W.labels and back.bias
    F = np.array([[4.0], [3.0], [1.0]])
    assert predict(back, F)[0, 0] == pytest.approx(1.0)


def test_accuracy_examples():
    assert classification_accuracy([0.49, 0.5, 0.9, -2], [0, 1, 1, 0]) == 1.0
    assert classification_accuracy([0.51, 0.2], [0, 1]) == 0.0
    assert classification_accuracy([0.6, 0.6, 0.4, 0.4], [1, 0, 0, 1]) == 0.5


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=30), st.floats(0.5, 10))
def test_accuracy_invariant_under_monotone_map_about_threshold(pred, scale):
    pred = np.array(pred)
    target = (np.arange(pred.size) % 2).astype(float)
    mapped = 0.5 + scale * (pred - 0.5)
    assert classification_accuracy(mapped, target) == classification_accuracy(pred, target)


def test_rmse_values():
    pred, target = [1.0, 2.0, 3.0, 4.0], [0.0, 0.0, 0.0, 0.0]
    paper, standard = rmse(pred, target)
    assert standard == pytest.approx(math.sqrt(30 / 4))
    assert paper == pytest.approx(math.sqrt(30) / 4)


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=50))
def test_rmse_conventions_related_by_sqrt_n(errors):
    e = np.array(errors)
    paper, standard = rmse(e, np.zeros_like(e))
    assert abs(paper * math.sqrt(e.size) - standard) <= 1e-15 * max(1.0, standard) * 4


def test_log_curves():
    pred = np.array([[1.0, 1.0], [0.0, 0.0]])
    target = np.array([[1.1, 0.9], [0.0, 0.0]])
    curve = log_error_curve(pred, target, delays=[1, 2])
    assert curve[0] == pytest.approx(-1.0)
    assert curve[1] == pytest.approx(-12.0)
    rc = log_rmse_curve(pred, target)
    assert rc[0] == pytest.approx(-1.0)
    with pytest.raises(InvalidSpecificationError):
        log_error_curve(pred, target, delays=[1])
