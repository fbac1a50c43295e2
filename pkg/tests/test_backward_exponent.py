import math

import numpy as np
import pytest

from src.backward_exponent import BackwardExponent
from src.errors import DomainError, UnsupportedModelError
from src.levy_models import Custom, Esscher, ExponentialJumps, Linnik, Stable, TruncatedStable

R = 0.2
CLOSED = [
    ExponentialJumps(eta=0.4, delta=1.0),
    Linnik(eta=0.4, delta=1.0, alpha=0.5),
    Stable(alpha=0.5),
    TruncatedStable(C=1.0, A=1.0, alpha=0.5),
    TruncatedStable(C=2.0, A=0.5, alpha=0.3),
    Esscher(Stable(alpha=0.5), 1.0),
]


@pytest.mark.parametrize("model", CLOSED, ids=lambda m: m.family)
@pytest.mark.parametrize("beta", [0.5, 2.0, 10.0])
def test_closed_form_matches_quadrature(model, beta):
    be = BackwardExponent(model, R)
    assert be.closed_form is not None
    assert be.varphi_r(beta) == pytest.approx(be.varphi_r_quadrature(beta), rel=1e-7)


def test_exponential_gives_gamma_transform():
    be = BackwardExponent(ExponentialJumps(eta=0.4, delta=1.0), R)
    beta = np.array([0.0, 1.0, 3.0])
    np.testing.assert_allclose(np.exp(-be.varphi_r(beta)), (1.0 + beta) ** -2.0, rtol=1e-14)


def test_stable_closed_form():
    be = BackwardExponent(Stable(alpha=0.5), R)
    expected = 4.0 ** 0.5 / (math.cos(math.pi / 4) * 0.5 * R)
    assert be.varphi_r(4.0) == pytest.approx(expected)


@pytest.mark.parametrize("beta", [10.0, 50.0, 400.0])
def test_quadrature_resolves_stable_singularity(beta):
    be = BackwardExponent(Stable(alpha=0.5), R)
    expected = beta ** 0.5 / (math.cos(math.pi / 4) * 0.5 * R)
    assert be.varphi_r_quadrature(beta) == pytest.approx(expected, rel=1e-9)


@pytest.mark.parametrize("model", CLOSED, ids=lambda m: m.family)
@pytest.mark.parametrize("z", [0.5 + 3.0j, 5.0j])
def test_complex_closed_form_matches_segment_quadrature(model, z):
    be = BackwardExponent(model, R)
    got = be.varphi_r_complex(z)
    ref = be.segment_quadrature(z)
    assert abs(got - ref) <= 1e-7 * max(1.0, abs(ref))


@pytest.mark.parametrize("model", [ExponentialJumps(0.4, 1.0), TruncatedStable(1.0, 1.0, 0.5)],
                         ids=lambda m: m.family)
@pytest.mark.parametrize("u", [1.0, 3.0])
def test_real_part_cosine_formula(model, u):
    be = BackwardExponent(model, R)
    assert be.varphi_r_complex(1j * u).real == pytest.approx(be.real_part_check(u), rel=1e-6)


def test_custom_model_goes_through_quadrature():
    ref = BackwardExponent(ExponentialJumps(eta=0.4, delta=1.0), R)
    be = BackwardExponent(Custom(tail_fn=lambda x: 0.4 * math.exp(-x), mass=0.4), R)
    assert be.closed_form is None
    assert be.varphi_r(2.0) == pytest.approx(ref.varphi_r(2.0), rel=1e-7)
    assert abs(be.varphi_r_complex(1.0 + 2.0j) - ref.varphi_r_complex(1.0 + 2.0j)) < 1e-6


def test_taylor_coefficients_exponential():
    # phi_r(v) = 2 log(1 + v)
    be = BackwardExponent(ExponentialJumps(eta=0.4, delta=1.0), R)
    c = be.taylor_coeffs(6)
    expected = [2.0 * (-1) ** (k + 1) / k for k in range(1, 7)]
    np.testing.assert_allclose(c, expected, rtol=1e-14)


def test_taylor_coefficients_need_moments():
    with pytest.raises(UnsupportedModelError):
        BackwardExponent(Stable(alpha=0.5), R).taylor_coeffs(2)


def test_esscher_shift_is_tilted_exponent():
    be = BackwardExponent(Stable(alpha=0.5), R)
    for beta in (0.5, 3.0):
        direct = BackwardExponent(Esscher(Stable(alpha=0.5), 1.0), R).varphi_r_quadrature(beta)
        assert be.esscher_shift(1.0, beta) == pytest.approx(direct, rel=1e-7)
    assert be.tilted(1.0).varphi_r(2.0) == pytest.approx(be.esscher_shift(1.0, 2.0))


def test_infinite_log_moment():
    heavy = Custom(tail_fn=lambda x: 1.0 / math.log(math.e + x), log_moment=False)
    be = BackwardExponent(heavy, R)
    assert be.xi == 1
    with pytest.raises(UnsupportedModelError):
        be.varphi_r(1.0)


def test_derivative_existence():
    be = BackwardExponent(ExponentialJumps(eta=0.4, delta=1.0), R)
    assert be.derivative_order_ok(0)
    assert not be.derivative_order_ok(1)
    assert BackwardExponent(TruncatedStable(1.0, 1.0, 0.5), R).derivative_order_ok(20)


def test_domain_errors():
    with pytest.raises(DomainError):
        BackwardExponent(Stable(alpha=0.5), 0.0)
    be = BackwardExponent(Stable(alpha=0.5), R)
    with pytest.raises(DomainError):
        be.varphi_r(-1.0)
    with pytest.raises(DomainError):
        be.varphi_r_complex(-1.0 + 1j)
