import math

import numpy as np
import pytest

from src.analytic_oracles import exp_case_survival, linnik_survival_series, stable_survival
from src.backward_exponent import BackwardExponent
from src.errors import DomainError
from src.levy_models import Custom, ExponentialJumps, Linnik, ProcessParams, Stable, TruncatedStable
from src.ruin import RuinEngine, RuinQuery, exp_initial_survival, finite_time_ruin, infinite_time_ruin
from src.transform_engine import GridSpec, dual_density

R = 0.2
PARAMS = ProcessParams(r=R)


@pytest.fixture(scope="module")
def exp_engine():
    return RuinEngine(BackwardExponent(ExponentialJumps(eta=0.4, delta=1.0), R), GridSpec())


@pytest.mark.parametrize("t", [1.0, 5.0, 10.0])
@pytest.mark.parametrize("x", [0.5, 1.0, 2.0, 5.0])
def test_exponential_finite_time_matches_closed_form(exp_engine, x, t):
    q = RuinQuery(ExponentialJumps(eta=0.4, delta=1.0), PARAMS, x=x, t=t)
    expected = 1.0 - exp_case_survival(0.4, 1.0, R, x, t)
    assert finite_time_ruin(q, exp_engine) == pytest.approx(expected, abs=1e-4)


def test_engine_caches_one_inversion_per_horizon(exp_engine):
    a = exp_engine.cdf(5.0)
    b = exp_engine.cdf(5.0)
    assert a is b


def test_survival_on_grid_starts_at_zero(exp_engine):
    s = exp_engine.survival_on_grid(5.0)
    assert s[0] == 0.0
    assert s.size == exp_engine.grid.M + 1
    assert np.all(np.diff(s) >= 0.0)


def test_beyond_grid_is_rejected(exp_engine):
    with pytest.raises(DomainError):
        exp_engine.survival(30.0, 5.0)


@pytest.mark.parametrize("t", [1.0, 5.0, 10.0])
@pytest.mark.parametrize("x", [0.3, 0.5, 1.1, 2.7])
def test_exponential_between_grid_nodes(exp_engine, x, t):
    expected = exp_case_survival(0.4, 1.0, R, x, t)
    assert exp_engine.survival(x, t) == pytest.approx(expected, abs=1e-4)


def test_survival_at_nodes_matches_grid_table(exp_engine):
    s = exp_engine.survival_on_grid(5.0)
    xs = exp_engine.grid.x
    np.testing.assert_allclose(exp_engine.survival(xs[1:20], 5.0), s[1:20], atol=1e-12)


@pytest.fixture(scope="module")
def stable_engine():
    return RuinEngine(BackwardExponent(Stable(alpha=0.5), R), GridSpec())


@pytest.mark.parametrize("t", [1.0, 5.0, 10.0])
@pytest.mark.parametrize("x", [0.3, 0.5, 1.0, 1.1, 5.0, 20.0])
def test_stable_finite_time_matches_scaling_law(stable_engine, x, t):
    q = RuinQuery(Stable(alpha=0.5), PARAMS, x=x, t=t)
    expected = 1.0 - stable_survival(0.5, R, x, t)
    assert finite_time_ruin(q, stable_engine) == pytest.approx(expected, abs=1e-3)


@pytest.mark.slow
@pytest.mark.parametrize("x", [1.0, 3.0])
def test_linnik_finite_time_matches_series(x):
    m = Linnik(eta=0.4, delta=1.0, alpha=0.5)
    q = RuinQuery(m, PARAMS, x=x, t=5.0)
    oracle = linnik_survival_series(0.4, 1.0, 0.5, R, x, 5.0)
    assert finite_time_ruin(q, GridSpec()) == pytest.approx(1.0 - oracle.value, abs=1e-3)


def test_nonpositive_effective_capital_is_ruined():
    m = ExponentialJumps(eta=0.4, delta=1.0)
    assert finite_time_ruin(RuinQuery(m, PARAMS, x=0.0, t=1.0), GridSpec()) == 1.0
    q = RuinQuery(m, ProcessParams(r=R, c=-0.4), x=1.0, t=1.0)
    assert q.x_eff == pytest.approx(-1.0)
    assert finite_time_ruin(q, GridSpec()) == 1.0
    assert infinite_time_ruin(RuinQuery(m, PARAMS, x=-1.0, infinite=True), None) == 1.0


def test_zero_horizon_is_never_ruined():
    m = ExponentialJumps(eta=0.4, delta=1.0)
    assert finite_time_ruin(RuinQuery(m, PARAMS, x=2.0, t=0.0), GridSpec()) == 0.0


def test_premium_rate_shifts_the_capital(exp_engine):
    m = ExponentialJumps(eta=0.4, delta=1.0)
    shifted = RuinQuery(m, ProcessParams(r=R, c=0.2), x=1.0, t=5.0)
    plain = RuinQuery(m, PARAMS, x=2.0, t=5.0)
    assert finite_time_ruin(shifted, exp_engine) == finite_time_ruin(plain, exp_engine)


def test_infinite_horizon_exponential(exp_wf):
    m = ExponentialJumps(eta=0.4, delta=1.0)
    for x in [0.5, 2.0, 6.0]:
        q = RuinQuery(m, PARAMS, x=x, infinite=True)
        expected = 1.0 - exp_case_survival(0.4, 1.0, R, x, math.inf)
        assert infinite_time_ruin(q, exp_wf) == pytest.approx(expected, abs=1e-4)


def test_long_horizon_approaches_infinite_horizon(exp_engine, exp_wf):
    m = ExponentialJumps(eta=0.4, delta=1.0)
    fin = finite_time_ruin(RuinQuery(m, PARAMS, x=3.0, t=100.0), exp_engine)
    inf = infinite_time_ruin(RuinQuery(m, PARAMS, x=3.0, infinite=True), exp_wf)
    assert fin == pytest.approx(inf, abs=2e-4)


def test_infinite_log_moment_is_certain_ruin():
    heavy = Custom(tail_fn=lambda x: 1.0 / math.log(math.e + x), log_moment=False)
    assert infinite_time_ruin(RuinQuery(heavy, PARAMS, x=10.0, infinite=True), None) == 1.0


def test_infinite_horizon_needs_table():
    m = ExponentialJumps(eta=0.4, delta=1.0)
    with pytest.raises(DomainError):
        infinite_time_ruin(RuinQuery(m, PARAMS, x=1.0, infinite=True), None)


class TestRuinQuery:
    def test_negative_horizon(self):
        with pytest.raises(DomainError):
            RuinQuery(ExponentialJumps(0.4, 1.0), PARAMS, x=1.0, t=-1.0)

    def test_infinite_horizon_needs_flag(self):
        with pytest.raises(DomainError):
            RuinQuery(ExponentialJumps(0.4, 1.0), PARAMS, x=1.0, t=math.inf)

    def test_rate_must_be_positive(self):
        with pytest.raises(DomainError):
            ProcessParams(r=0.0)


class TestExponentialInitialCapital:
    @pytest.mark.parametrize("beta", [0.5, 2.0])
    @pytest.mark.parametrize("t", [1.0, 10.0])
    def test_finite_horizon(self, beta, t):
        m = ExponentialJumps(eta=0.4, delta=1.0)
        expected = ((beta * math.exp(-R * t) + 1.0) / (beta + 1.0)) ** 2.0
        assert exp_initial_survival(m, R, beta, t) == pytest.approx(expected, rel=1e-9)

    def test_infinite_horizon(self):
        m = ExponentialJumps(eta=0.4, delta=1.0)
        assert exp_initial_survival(m, R, 1.0, infinite=True) == pytest.approx(0.25, rel=1e-12)

    def test_zero_horizon(self):
        assert exp_initial_survival(Stable(alpha=0.5), R, 1.0, 0.0) == 1.0

    def test_infinite_log_moment(self):
        heavy = Custom(tail_fn=lambda x: 1.0 / math.log(math.e + x), log_moment=False)
        assert exp_initial_survival(heavy, R, 1.0, infinite=True) == 0.0

    def test_beta_must_be_positive(self):
        with pytest.raises(DomainError):
            exp_initial_survival(Stable(alpha=0.5), R, 0.0, 1.0)


def test_rectangle_reference_adds_half_a_step_of_density():
    be = BackwardExponent(TruncatedStable(C=1.0, A=1.0, alpha=0.5), R)
    engine = RuinEngine(be, GridSpec(M=100))
    trap = engine.survival_on_grid(7.0)
    rect = engine.survival_on_grid(7.0, "rectangle")
    f = dual_density(be, 7.0, engine.grid)(engine.grid.x)
    assert rect[0] == 0.0
    np.testing.assert_allclose(rect[1:] - trap[1:], 0.5 * engine.grid.h * (f[1:] - f[0]), atol=1e-3)
    with pytest.raises(DomainError):
        engine.survival_on_grid(7.0, "simpson")
