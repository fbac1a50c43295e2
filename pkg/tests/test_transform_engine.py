import math

import numpy as np
import pytest

from src.analytic_oracles import linnik_dual_laplace, stable_survival
from src.backward_exponent import BackwardExponent
from src.errors import AccuracyError, DomainError, UnsupportedModelError
from src.levy_models import Custom, Esscher, Linnik, TruncatedStable
from src.special_functions import gamma_cdf
from src.transform_engine import (
    GridSpec,
    atom_at_zero,
    dual_char_function,
    dual_laplace,
    esscher_tilt_density,
    finite_time_cdf,
    invert_to_cdf,
    monotone_violation,
    numeric_laplace,
    plan_fft,
    sign_changes,
    w_derivatives,
)

R = 0.2


class TestGridSpec:
    def test_defaults(self):
        g = GridSpec()
        assert g.h == 0.2 and g.M == 125
        assert g.x[0] == 0.0 and g.x[-1] == pytest.approx(25.0)
        assert g.x_ext[0] == pytest.approx(-1.0)
        assert g.x_ext.size == g.M + 1 + g.x_neg_steps

    @pytest.mark.parametrize("kw", [
        {"h": 0.0},
        {"M": 0},
        {"M": 2.5},
        {"n_freq": 1000},
        {"n_freq": 64},
        {"u_max": -1.0},
    ])
    def test_rejects_bad_values(self, kw):
        with pytest.raises(DomainError):
            GridSpec(**kw)


def test_plan_rejects_undecayed_cf():
    cf = lambda u: 1.0 / (1.0 + 1j * np.asarray(u))
    with pytest.raises(AccuracyError):
        plan_fft(cf, GridSpec(u_max=1.0))


def test_plan_covers_grid():
    cf = lambda u: (1.0 + 1j * np.asarray(u)) ** -3.0
    g = GridSpec()
    plan = plan_fft(cf, g)
    assert plan.span >= g.x_neg + g.extent + g.h
    assert plan.refine * plan.dy == pytest.approx(g.h)
    assert plan.n & (plan.n - 1) == 0


def test_constant_cf_with_unit_atom_is_a_step():
    g = GridSpec(M=20)
    cdf = invert_to_cdf(lambda u: np.ones_like(np.asarray(u), dtype=complex), g, atom=1.0)
    np.testing.assert_allclose(cdf, (g.x_ext >= 0).astype(float), atol=1e-12)


def test_inversion_of_gamma_three():
    g = GridSpec(M=100)
    cdf = invert_to_cdf(lambda u: (1.0 + 1j * np.asarray(u)) ** -3.0, g)
    x = g.x_ext
    ref = np.where(x >= 0, gamma_cdf(3.0, 1.0, np.maximum(x, 0.0)), 0.0)
    assert np.max(np.abs(cdf - ref)) <= 1e-5


def test_dual_char_function_limits(exp_model):
    be = BackwardExponent(exp_model, R)
    u = np.array([0.5, 2.0])
    np.testing.assert_allclose(dual_char_function(be, 0.0, u), 1.0)
    np.testing.assert_allclose(dual_char_function(be, math.inf, u), (1.0 + 1j * u) ** -2.0, rtol=1e-12)
    with pytest.raises(DomainError):
        dual_char_function(be, -1.0, u)


@pytest.mark.parametrize("t", [1.0, 5.0, math.inf])
@pytest.mark.parametrize("beta", [0.3, 2.0])
def test_dual_laplace_matches_linnik_closed_form(t, beta):
    m = Linnik(eta=0.4, delta=1.0, alpha=0.5)
    be = BackwardExponent(m, R)
    if math.isinf(t):
        expected = (1.0 + beta ** 0.5) ** (-0.4 / (0.5 * R))
    else:
        expected = linnik_dual_laplace(0.4, 1.0, 0.5, R, t, beta)
    assert dual_laplace(be, t, beta) == pytest.approx(expected, rel=1e-12)


def test_atom_at_zero(exp_model, stable_model):
    assert atom_at_zero(exp_model, 5.0) == pytest.approx(math.exp(-2.0))
    assert atom_at_zero(exp_model, math.inf) == 0.0
    assert atom_at_zero(stable_model, 1.0) == 0.0


def test_monotone_violation():
    assert monotone_violation([0.0, 1.0, 0.5, 2.0]) == pytest.approx(0.5)
    assert monotone_violation([0.0, 0.1, 0.1]) == 0.0
    assert monotone_violation([]) == 0.0


class TestWFamily:
    def test_exponential_w_is_gamma_cdf(self, exp_wf):
        x = exp_wf.grid.x
        err = np.max(np.abs(exp_wf.on_grid(0) - gamma_cdf(2.0, 1.0, x)))
        assert err <= 2e-4

    def test_exponential_density(self, exp_wf):
        x = exp_wf.grid.x
        assert np.max(np.abs(exp_wf.on_grid(1) - x * np.exp(-x))) <= 1e-3

    def test_w_vanishes_below_zero(self, exp_wf):
        assert exp_wf.W(-0.5) == 0.0
        assert exp_wf.W(np.array([-1.0, 0.0]))[0] == 0.0

    def test_w_is_a_distribution_function(self, ts_wf):
        w = ts_wf.on_grid(0)
        assert monotone_violation(w) == 0.0
        assert 0.0 <= w[0] and w[-1] <= 1.0
        assert w[-1] == pytest.approx(1.0, abs=1e-6)

    def test_laplace_of_density(self, exp_wf_long):
        lt = numeric_laplace(exp_wf_long.x, exp_wf_long.w_derivs[0], 1.0)
        assert lt == pytest.approx(0.25, rel=1e-3)

    def test_deriv_order_guard(self, exp_wf):
        with pytest.raises(DomainError):
            exp_wf.deriv(2, 1.0)

    def test_csv_header(self, exp_wf):
        text = exp_wf.to_csv(comments=["# test"])
        lines = text.splitlines()
        assert lines[0] == "# test"
        assert lines[1] == "x,W,W1"
        assert len(lines) == exp_wf.grid.M + 3

    @pytest.mark.parametrize("n", [0, 1, 2])
    def test_sign_changes(self, ts_wf, n):
        assert sign_changes(ts_wf, n) <= n


def test_derivative_order_needs_enough_mass(exp_model):
    be = BackwardExponent(exp_model, R)
    with pytest.raises(UnsupportedModelError):
        w_derivatives(be, GridSpec(), 1)


def test_infinite_log_moment_is_rejected():
    heavy = Custom(tail_fn=lambda x: 1.0 / math.log(math.e + x), log_moment=False)
    be = BackwardExponent(heavy, R)
    with pytest.raises(UnsupportedModelError):
        w_derivatives(be, GridSpec(), 0)
    with pytest.raises(UnsupportedModelError):
        finite_time_cdf(be, 1.0, GridSpec())


@pytest.mark.parametrize("gamma", [0.5, 1.0])
def test_esscher_tilt_matches_direct_inversion(ts_wf, gamma):
    base = TruncatedStable(C=1.0, A=1.0, alpha=0.5)
    be = BackwardExponent(base, R)
    tilted = esscher_tilt_density(ts_wf, gamma, be.varphi_r(gamma))
    direct = w_derivatives(BackwardExponent(Esscher(base, gamma), R), GridSpec(), 0)
    scale = float(np.max(np.abs(direct.w_derivs[0])))
    assert np.max(np.abs(tilted - direct.w_derivs[0])) <= 1e-4 * scale


def test_stable_w_matches_scaling_law(stable_wf):
    # W for the stable driver is the one-sided stable law scaled by (alpha r)^(1/alpha)
    xs = [1.0, 5.0, 20.0]
    for x in xs:
        assert stable_wf.W(x) == pytest.approx(stable_survival(0.5, R, x, math.inf), abs=1e-3)


def test_stable_finite_time_cdf_is_monotone(stable_model):
    be = BackwardExponent(stable_model, R)
    cdf = finite_time_cdf(be, 5.0, GridSpec(M=50))
    assert monotone_violation(cdf) == 0.0
    assert np.all((cdf >= 0.0) & (cdf <= 1.0))
