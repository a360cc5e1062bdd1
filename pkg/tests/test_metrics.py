import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from jitlgpr import metrics
from jitlgpr.errors import DataError, InsufficientDataError


def test_single_point():
    r = metrics.evaluate([100.0], [90.0])
    assert (r.mae, r.rmse, r.mape) == (10.0, 10.0, 10.0)


def test_two_points_by_hand():
    # |10-12| = 2, |20-16| = 4 -> MAE 3, RMSE sqrt((4+16)/2), MAPE (20% + 20%)/2
    r = metrics.evaluate([10.0, 20.0], [12.0, 16.0])
    assert r.mae == pytest.approx(3.0, abs=1e-12)
    assert r.rmse == pytest.approx(np.sqrt(10.0), abs=1e-12)
    assert r.mape == pytest.approx(20.0, abs=1e-12)


def test_perfect_forecast():
    y = [3.0, 4.0, 5.0]
    r = metrics.evaluate(y, y)
    assert r.mae == r.rmse == r.mape == 0.0


def test_errors():
    with pytest.raises(DataError):
        metrics.evaluate([1.0, 2.0], [1.0])
    with pytest.raises(ZeroDivisionError, match="index 1"):
        metrics.mape([1.0, 0.0], [1.0, 1.0])
    with pytest.raises(ZeroDivisionError):
        metrics.yearly_pe(0.0, 1.0)


@pytest.mark.parametrize("actual, predicted, table", [(816.8, 824.3, 0.90), (477.6, 473.6, -0.83)])
def test_yearly_pe_table_values(actual, predicted, table):
    # the published table rounds from unrounded totals; agree within 0.02
    assert metrics.yearly_pe(actual, predicted) == pytest.approx(table, abs=0.02)


def test_yearly_pe_identity():
    assert metrics.yearly_pe(5.0, 5.0) == 0.0
    assert metrics.yearly_pe(200.0, 200.0 * 1.25) == pytest.approx(25.0, abs=1e-12)


finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False)


@given(st.lists(st.tuples(finite, finite), min_size=1, max_size=40))
def test_rmse_at_least_mae(pairs):
    y, yhat = np.array(pairs).T
    assert metrics.rmse(y, yhat) >= metrics.mae(y, yhat) - 1e-9


@given(st.lists(st.tuples(st.floats(1, 1e3), finite), min_size=2, max_size=30), st.randoms())
def test_permutation_invariance(pairs, rnd):
    y, yhat = np.array(pairs).T
    perm = list(range(len(y)))
    rnd.shuffle(perm)
    a = metrics.evaluate(y, yhat)
    b = metrics.evaluate(y[perm], yhat[perm])
    assert a.mae == pytest.approx(b.mae) and a.rmse == pytest.approx(b.rmse) and a.mape == pytest.approx(b.mape)


def test_ljung_box_constant_is_degenerate():
    with pytest.raises(DataError):
        metrics.ljung_box(np.ones(20), 2)


def test_ljung_box_alternating():
    n = 100
    x = np.tile([1.0, -1.0], n // 2)
    # rho_1 = -(n-1)/n exactly for a zero-mean alternating sequence
    expected = n * (n + 2) * ((n - 1) / n) ** 2 / (n - 1)
    q = metrics.ljung_box(x, 1)
    assert q == pytest.approx(expected, rel=1e-12)
    assert q == pytest.approx(n * (n + 2) / (n - 1), rel=0.03)


def test_ljung_box_needs_length():
    with pytest.raises(InsufficientDataError):
        metrics.ljung_box([1.0, 2.0, 3.0], 3)


def test_ljung_box_white_noise_size():
    crit = stats.chi2.ppf(0.95, 4)
    assert crit == pytest.approx(9.488, abs=1e-3)
    accepted = [metrics.ljung_box(np.random.default_rng(s).normal(size=100), 4) < crit for s in range(200)]
    assert 0.90 <= np.mean(accepted) <= 0.99
