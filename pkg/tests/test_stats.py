import numpy as np
import pytest
import statsmodels.api as sm
from hypothesis import given, settings
from hypothesis import strategies as st

from semimarkov_lob.errors import DataError, InsufficientDataError
from semimarkov_lob.events import PriceChangeSeq
from semimarkov_lob.ingest import MidQuote
from semimarkov_lob.stats import (
    density_from_depths,
    joint_queue_density,
    linear_fit_adjr2,
    realized_std,
    window_samples,
)


def test_window_samples_carry_forward():
    times = [0.0, 100.0, 650.0, 1300.0, 1900.0]
    mids = [0.0, 5.0, 1.0, 3.0, 2.0]
    np.testing.assert_array_equal(window_samples(times, mids, 600.0), [0.0, 5.0, 1.0, 3.0])


def test_realized_std_example():
    sd = realized_std([0.0, 600.0, 1200.0, 1800.0], [0.0, 1.0, 3.0, 2.0])
    assert sd == pytest.approx(np.std([1, 2, -1], ddof=1))
    assert sd == pytest.approx(1.5275, abs=1e-4)


def test_realized_std_needs_two_windows():
    with pytest.raises(InsufficientDataError):
        realized_std([0.0, 700.0], [1.0, 2.0])


@given(st.lists(st.floats(-100, 100), min_size=3, max_size=30), st.floats(-1e3, 1e3))
def test_realized_std_shift_invariant(mids, c):
    times = 600.0 * np.arange(len(mids))
    base = realized_std(times, mids)
    shifted = realized_std(times, np.asarray(mids) + c)
    assert shifted == pytest.approx(base, abs=1e-9)


def test_exact_line():
    x = np.array([0.01, 0.02, 0.05, 0.08])
    res = linear_fit_adjr2(x, 3 * x + 0.1)
    assert res.slope == pytest.approx(3.0)
    assert res.intercept == pytest.approx(0.1)
    assert res.r2 == pytest.approx(1.0, abs=1e-12)
    assert res.adj_r2 == pytest.approx(1.0, abs=1e-12)


def test_regression_errors():
    with pytest.raises(InsufficientDataError):
        linear_fit_adjr2([1, 2], [1, 2])
    with pytest.raises(DataError):
        linear_fit_adjr2([1, 1, 1], [1, 2, 3])


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6), st.integers(4, 40))
def test_against_statsmodels(seed, n):
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.001, 0.1, n)
    y = 2.0 * x + rng.normal(0, 0.01, n)
    ours = linear_fit_adjr2(x, y)
    ref = sm.OLS(y, sm.add_constant(x)).fit()
    assert ours.slope == pytest.approx(ref.params[1], rel=1e-9)
    assert ours.r2 == pytest.approx(ref.rsquared, abs=1e-10)
    assert ours.adj_r2 == pytest.approx(ref.rsquared_adj, abs=1e-10)
    assert ours.p_value == pytest.approx(ref.pvalues[1], rel=1e-6, abs=1e-300)
    assert ours.adj_r2 <= ours.r2
    ours0 = linear_fit_adjr2(x, y, fit_intercept=False)
    ref0 = sm.OLS(y, x).fit()
    assert ours0.slope == pytest.approx(ref0.params[0], rel=1e-9)
    assert ours0.r2 == pytest.approx(ref0.rsquared, abs=1e-10)
    assert ours0.adj_r2 == pytest.approx(ref0.rsquared_adj, abs=1e-10)


def test_density_point_mass():
    d = density_from_depths([(3, 5)], lot=1, cap=10)
    assert d.density[3, 5] == 1.0
    assert d.density.sum() == 1.0


def test_density_marginals():
    rng = np.random.default_rng(2)
    depths = rng.integers(1, 30, size=(500, 2))
    d = density_from_depths(depths, lot=1, cap=50)
    assert d.density.sum() == pytest.approx(1.0)
    assert d.marginal_bid() == pytest.approx(np.bincount(depths[:, 0], minlength=51) / 500)
    assert d.marginal_ask() == pytest.approx(np.bincount(depths[:, 1], minlength=51) / 500)


def test_uniform_density_flat():
    rng = np.random.default_rng(4)
    n, k = 200_000, 10
    d = density_from_depths(rng.integers(1, k + 1, size=(n, 2)), lot=1, cap=k)
    cells = d.density[1:, 1:]
    p = 1 / k**2
    sd = np.sqrt(p * (1 - p) / n)
    assert np.max(np.abs(cells - p)) < 3 * sd


def test_density_empty():
    with pytest.raises(InsufficientDataError):
        density_from_depths(np.empty((0, 2)))


def test_joint_density_direction_and_spread_filter():
    quotes = [MidQuote(0.0, 100, 101, 4, 6), MidQuote(1.0, 100, 102, 9, 9), MidQuote(2.0, 101, 102, 2, 3)]
    pcs = PriceChangeSeq(np.array([0.5, 0.5, -0.5]), np.ones(3), np.array([0.0, 1.0, 2.0]))
    up = joint_queue_density(quotes, pcs, "up", lot=1, cap=10)
    assert up.n_observations == 1 and up.density[4, 6] == 1.0
    down = joint_queue_density(quotes, pcs, "down", lot=1, cap=10)
    assert down.density[2, 3] == 1.0
