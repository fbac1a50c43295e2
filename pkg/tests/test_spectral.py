import math

import numpy as np
import pytest

from src.backward_exponent import BackwardExponent
from src.errors import DomainError
from src.levy_models import Esscher, ExponentialJumps, TruncatedStable
from src.ruin import RuinEngine
from src.spectral import (
    build_series,
    eigenmeasure_check,
    mu_coefficients,
    survival_curve,
    survival_series,
    t_alpha,
    tilted_series,
    truncation_error_table,
)
from src.transform_engine import esscher_tilt_density

R = 0.2
TABLE_N = [0, 1, 2, 3, 4, 6, 9, 12, 16]
TABLE_T = [3.0, 5.0, 7.0, 10.0, 15.0]


@pytest.fixture(scope="module")
def ts_series(ts_wf):
    return build_series(BackwardExponent(TruncatedStable(C=1.0, A=1.0, alpha=0.5), R), 16, wf=ts_wf)


@pytest.fixture(scope="module")
def table(ts_series):
    be = ts_series.wf.be
    engine = RuinEngine(be, ts_series.wf.grid)
    return truncation_error_table(ts_series, engine.survival_on_grid, TABLE_N, TABLE_T)


def test_t_alpha():
    assert t_alpha(0.5, R) == pytest.approx(5.0 * math.log(2.0), rel=1e-14)
    with pytest.raises(DomainError):
        t_alpha(1.0, R)


def test_exponential_mu_is_binomial():
    mu = mu_coefficients(BackwardExponent(ExponentialJumps(eta=0.4, delta=1.0), R), 6)
    np.testing.assert_allclose(mu, [1.0, 2.0, 1.0, 0.0, 0.0, 0.0, 0.0], atol=1e-10)


def test_truncated_stable_mu_nonnegative():
    mu = mu_coefficients(BackwardExponent(TruncatedStable(C=1.0, A=1.0, alpha=0.5), R), 16)
    assert mu[0] == 1.0
    assert np.all(mu >= -1e-12)


def test_moment_rule_gives_stationary_moments():
    # stationary dual law is Gamma(2, 1): E[X^n] / n! = n + 1
    be = BackwardExponent(ExponentialJumps(eta=0.4, delta=1.0), R)
    np.testing.assert_allclose(mu_coefficients(be, 5, rule="moments"), [1, 2, 3, 4, 5, 6], rtol=1e-12)
    with pytest.raises(DomainError):
        mu_coefficients(be, 2, rule="cumulants")


def test_mu_order_must_be_nonnegative():
    with pytest.raises(DomainError):
        mu_coefficients(BackwardExponent(ExponentialJumps(0.4, 1.0), R), -1)


def test_series_records_threshold(ts_series):
    assert ts_series.t_alpha == pytest.approx(5.0 * math.log(2.0))
    assert ts_series.N == 16
    assert ts_series.alpha == 0.5


class TestSurvivalSeries:
    def test_below_threshold_needs_force(self, ts_series):
        with pytest.raises(DomainError):
            survival_series(ts_series, 5.0, 3.0, 2)
        val = survival_series(ts_series, 5.0, 3.0, 2, force=True)
        assert math.isfinite(val)

    def test_order_beyond_table(self, ts_series):
        with pytest.raises(DomainError):
            survival_series(ts_series, 5.0, 10.0, 17)

    def test_zeroth_order_is_w(self, ts_series):
        x = np.array([2.0, 10.0])
        np.testing.assert_allclose(survival_series(ts_series, x, 10.0, 0), ts_series.wf.W(x))

    def test_close_to_reference_above_threshold(self, ts_series):
        engine = RuinEngine(ts_series.wf.be, ts_series.wf.grid)
        ref = engine.survival_on_grid(10.0)
        approx = survival_curve(ts_series, [10.0], 12)[0]
        assert np.max(np.abs(ref - approx)) <= 0.037

    def test_curve_rows_follow_t(self, ts_series):
        curve = survival_curve(ts_series, [5.0, 10.0], 4)
        assert curve.shape == (2, ts_series.wf.grid.M + 1)


@pytest.mark.parametrize("n,t", [(0, 5.0), (1, 5.0), (2, 10.0)])
def test_derivatives_are_eigenmeasures(ts_series, n, t):
    err = eigenmeasure_check(ts_series, n, t)
    scale = float(np.max(np.abs(ts_series.wf.on_grid(n + 1))))
    assert err <= 1e-2 * scale


def test_eigenmeasure_at_time_zero(ts_series):
    assert eigenmeasure_check(ts_series, 1, 0.0) == pytest.approx(0.0, abs=1e-12)


def test_tilted_series(ts_series):
    gamma = 0.5
    base_be = ts_series.wf.be
    tilted = tilted_series(ts_series, gamma)
    expected = esscher_tilt_density(ts_series.wf, gamma, base_be.varphi_r(gamma))
    np.testing.assert_allclose(tilted.wf.w_derivs[0], expected, rtol=1e-12, atol=1e-15)
    direct_mu = mu_coefficients(BackwardExponent(Esscher(base_be.model, gamma), R), ts_series.N)
    np.testing.assert_allclose(tilted.mu, direct_mu)
    with pytest.raises(DomainError):
        tilted_series(ts_series, 0.0)


@pytest.mark.slow
class TestTruncationErrorTable:
    @pytest.mark.parametrize("n,t,expected", [
        (0, 3.0, 0.898),
        (0, 7.0, 0.510),
        (0, 15.0, 0.109),
        (1, 7.0, 0.222),
        (2, 7.0, 0.142),
        (1, 10.0, 0.072),
    ])
    def test_leading_cells(self, table, n, t, expected):
        i, j = TABLE_N.index(n), TABLE_T.index(t)
        assert table.e[i, j] == pytest.approx(expected, abs=0.005)

    @pytest.mark.parametrize("n,t", [(9, 7.0), (12, 10.0), (16, 15.0)])
    def test_converged_cells(self, table, n, t):
        i, j = TABLE_N.index(n), TABLE_T.index(t)
        assert table.e[i, j] < 2e-3

    def test_nonincreasing_in_t_above_threshold(self, table):
        cols = [j for j, t in enumerate(TABLE_T) if t > 5.0 * math.log(2.0)]
        for i, n in enumerate(TABLE_N):
            if n > 12:
                continue
            row = table.e[i, cols]
            assert np.all(np.diff(row) <= 1e-3), f"N={n}: {row}"

    def test_stays_bounded_below_threshold(self, table):
        j = TABLE_T.index(3.0)
        assert np.all(table.e[:, j] < 2.0)

    def test_csv_and_text(self, table):
        text = table.to_csv()
        lines = text.splitlines()
        assert lines[0] == "N,t,e"
        assert len(lines) == 1 + len(TABLE_N) * len(TABLE_T)
        assert lines[1].startswith("0,3.0,")
        assert "TRUNCATION ERROR" in table.to_text()


# e_{N,t} computed with stationary moments as coefficients and a right-endpoint
# rectangle rule for the reference distribution function
MOMENTS_RECTANGLE_TABLE = {
    0: [0.905, 0.718, 0.526, 0.312, 0.130],
    1: [0.768, 0.461, 0.244, 0.091, 0.027],
    2: [1.283, 0.453, 0.139, 0.025, 0.020],
    3: [1.587, 0.385, 0.090, 0.024, 0.021],
    4: [2.424, 0.426, 0.088, 0.025, 0.021],
    6: [4.080, 0.349, 0.039, 0.022, 0.021],
    9: [9.320, 0.237, 0.033, 0.022, 0.021],
    12: [22.508, 0.167, 0.031, 0.022, 0.021],
    16: [582.088, 0.887, 0.030, 0.022, 0.021],
}


@pytest.fixture(scope="module")
def moments_table(ts_wf):
    be = BackwardExponent(TruncatedStable(C=1.0, A=1.0, alpha=0.5), R)
    s = build_series(be, 16, wf=ts_wf, mu_rule="moments")
    engine = RuinEngine(be, ts_wf.grid)
    return truncation_error_table(s, lambda t: engine.survival_on_grid(t, "rectangle"), TABLE_N, TABLE_T)


@pytest.mark.slow
class TestMomentsRectangleTable:
    @pytest.mark.parametrize("n", TABLE_N)
    @pytest.mark.parametrize("t", [7.0, 10.0, 15.0])
    def test_cells_above_threshold(self, moments_table, n, t):
        i, j = TABLE_N.index(n), TABLE_T.index(t)
        tol = 0.01 if n <= 4 else 0.015
        assert moments_table.e[i, j] == pytest.approx(MOMENTS_RECTANGLE_TABLE[n][j], abs=tol)

    @pytest.mark.parametrize("n", [0, 1])
    @pytest.mark.parametrize("t", [3.0, 5.0])
    def test_leading_rows_below_threshold(self, moments_table, n, t):
        i, j = TABLE_N.index(n), TABLE_T.index(t)
        assert moments_table.e[i, j] == pytest.approx(MOMENTS_RECTANGLE_TABLE[n][j], abs=0.01)

    def test_floor(self, moments_table):
        j = TABLE_T.index(15.0)
        tail = moments_table.e[TABLE_N.index(3):, j]
        assert np.all(np.abs(tail - 0.021) <= 0.002)

    def test_nonincreasing_in_t_above_threshold(self, moments_table):
        cols = [TABLE_T.index(t) for t in (7.0, 10.0, 15.0)]
        for i, n in enumerate(TABLE_N):
            if n > 12:
                continue
            row = moments_table.e[i, cols]
            assert np.all(np.diff(row) <= 1e-3), f"N={n}: {row}"

    def test_diverges_below_threshold(self, moments_table):
        j = TABLE_T.index(3.0)
        col = moments_table.e[TABLE_N.index(2):, j]
        assert np.all(np.diff(col) > 0)
        assert col[-1] > 100.0
