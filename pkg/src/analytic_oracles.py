"""
Closed-form survival probabilities used as ground truth:
exponential jumps (finite and infinite horizon), the Linnik family through its
Wright-type series, and the stable / tempered stable scaling laws.
"""
import logging
import math
from dataclasses import dataclass

from scipy import integrate, special, stats

from .errors import AccuracyError, DomainError
from .special_functions import (
    DEFAULT_SERIES,
    SeriesControl,
    gamma_cdf,
    kummer_1f1,
    stable_cdf,
    stable_pdf,
    wright_1psi1,
)
from .utils import CompensatedSum

logger = logging.getLogger(__name__)

LINNIK_MAX_TERMS = 40
WRIGHT_SERIES_LIMIT = 3.0   # largest delta x^alpha evaluated by the alternating series


@dataclass(frozen=True)
class OracleResult:
    value: float
    series_terms_used: int
    truncation_bound: float

    def __post_init__(self):
        if self.truncation_bound < 0:
            raise DomainError("truncation bound must be >= 0")


# ---------------------------------------------------------------------------
# Exponential jumps
# ---------------------------------------------------------------------------

def exp_case_survival(eta: float, delta: float, r: float, x: float, t: float) -> float:
    """P_x(tau_0 > t) for compound Poisson(eta) claims with Exp(delta) sizes."""
    if not (eta > 0 and delta > 0 and r > 0):
        raise DomainError("exp_case_survival needs eta, delta, r > 0")
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    if x <= 0:
        return 0.0
    if t == 0:
        return 1.0
    if math.isinf(t):
        return float(gamma_cdf(eta / r, 1.0 / delta, x))
    e_nt = math.exp(-eta * t)
    if eta == r:
        return e_nt + (1.0 - e_nt) * (1.0 - math.exp(-delta * x))
    a = 1.0 - eta / r
    slope = delta * (1.0 - math.exp(r * t))
    body, _ = integrate.quad(lambda y: math.exp(-delta * y) * kummer_1f1(a, 2.0, slope * y),
                             0.0, x, limit=200, epsabs=1e-14, epsrel=1e-12)
    val = e_nt * (1.0 + eta * delta / r * math.expm1(r * t) * body)
    return float(min(1.0, max(0.0, val)))


# ---------------------------------------------------------------------------
# Linnik family
# ---------------------------------------------------------------------------

def _check_linnik(kappa: float, delta: float, alpha: float):
    if not (kappa > 0 and delta > 0):
        raise DomainError(f"need kappa, delta > 0 (got {kappa}, {delta})")
    if not (0 < alpha <= 1):
        raise DomainError(f"need alpha in (0,1], got {alpha}")


def _std_stable_scale(alpha: float) -> float:
    # standard one-sided law (exponent beta^alpha) = P_alpha law / cos(pi alpha/2)^(1/alpha)
    return math.cos(math.pi * alpha / 2.0) ** (-1.0 / alpha)


def _mixture_cdf(kappa: float, delta: float, alpha: float, x: float) -> float:
    """P(G^(1/alpha) S <= x), G ~ Gamma(kappa, 1/delta), S standard one-sided stable."""
    c = _std_stable_scale(alpha)
    g_law = stats.gamma(kappa, scale=1.0 / delta)
    f = lambda g: g_law.pdf(g) * stable_cdf(alpha, c * x * g ** (-1.0 / alpha)) if g > 0 else 0.0
    hi = g_law.ppf(1.0 - 1e-14)
    val, _ = integrate.quad(f, 0.0, hi, points=[g_law.mean()], limit=200, epsabs=1e-12)
    return min(1.0, max(0.0, val))


def _mixture_density(kappa: float, delta: float, alpha: float, x: float) -> float:
    c = _std_stable_scale(alpha)
    g_law = stats.gamma(kappa, scale=1.0 / delta)

    def f(g):
        if g <= 0:
            return 0.0
        s = g ** (-1.0 / alpha)
        return g_law.pdf(g) * c * s * stable_pdf(alpha, c * x * s)

    hi = g_law.ppf(1.0 - 1e-14)
    val, _ = integrate.quad(f, 0.0, hi, points=[g_law.mean()], limit=200, epsabs=1e-14)
    return max(0.0, val)


def linnik_kW_density(kappa: float, delta: float, alpha: float, x: float,
                      ctl: SeriesControl = DEFAULT_SERIES) -> float:
    """Density with Laplace transform (1 + beta^alpha/delta)^(-kappa)."""
    _check_linnik(kappa, delta, alpha)
    if x <= 0:
        return 0.0
    if alpha == 1:
        return float(stats.gamma.pdf(x, kappa, scale=1.0 / delta))
    s = delta * x ** alpha
    if s <= WRIGHT_SERIES_LIMIT:
        try:
            return delta ** kappa * x ** (alpha * kappa - 1.0) * wright_1psi1(kappa, alpha, -s, ctl)
        except AccuracyError:
            logger.debug("[ORACLE] Wright series failed at x=%g, using the gamma mixture", x)
    return _mixture_density(kappa, delta, alpha, x)


def _kW_cdf_series(kappa: float, delta: float, alpha: float, x: float, ctl: SeriesControl) -> float:
    # term-by-term integral of the density series
    s = delta * x ** alpha
    log_s = math.log(s)
    lg_k = special.gammaln(kappa)
    acc = CompensatedSum()
    biggest = 0.0
    prev = math.inf
    for n in range(ctl.max_terms):
        log_mag = (special.gammaln(kappa + n) - lg_k - special.gammaln(alpha * (n + kappa) + 1.0)
                   - special.gammaln(n + 1.0) + (n + kappa) * log_s)
        mag = math.exp(log_mag)
        biggest = max(biggest, mag)
        acc.add(mag if n % 2 == 0 else -mag)
        if n > 2 and mag < prev and mag <= ctl.abs_tol + ctl.rel_tol * abs(acc.value):
            break
        prev = mag
    else:
        raise AccuracyError("kW series did not converge", partial=acc.value)
    if biggest > 1e10 * max(abs(acc.value), 1e-300):
        raise AccuracyError("kW series cancellation", partial=acc.value)
    return acc.value


def linnik_kW_cdf(kappa: float, delta: float, alpha: float, x: float,
                  ctl: SeriesControl = DEFAULT_SERIES) -> float:
    _check_linnik(kappa, delta, alpha)
    if x <= 0:
        return 0.0
    if alpha == 1:
        return float(gamma_cdf(kappa, 1.0 / delta, x))
    if delta * x ** alpha <= WRIGHT_SERIES_LIMIT:
        try:
            return min(1.0, max(0.0, _kW_cdf_series(kappa, delta, alpha, x, ctl)))
        except AccuracyError:
            pass
    return _mixture_cdf(kappa, delta, alpha, x)


def linnik_survival_series(eta: float, delta: float, alpha: float, r: float, x: float, t: float,
                           n_terms: int = 0, tol: float = 1e-10,
                           ctl: SeriesControl = DEFAULT_SERIES) -> OracleResult:
    """exp(-eta t) (1 + sum_{n>=1} [Gamma(n+k)/(Gamma(k) n!)] v^n nW(e^{rt} x)), k = eta/(alpha r).

    v = 1 - exp(-alpha r t). n_terms = 0 picks the smallest order whose tail bound
    nW <= (N+1)W, times the remaining binomial mass, is below tol (capped at 40).
    """
    if not (eta > 0 and r > 0):
        raise DomainError("need eta, r > 0")
    _check_linnik(1.0, delta, alpha)
    if x <= 0:
        return OracleResult(0.0, 0, 0.0)
    if t == 0:
        return OracleResult(1.0, 0, 0.0)
    kappa = eta / (alpha * r)
    v = -math.expm1(-alpha * r * t)
    y = math.exp(r * t) * x
    e_nt = math.exp(-eta * t)
    full = (1.0 - v) ** (-kappa)
    cap = n_terms if n_terms else LINNIK_MAX_TERMS

    acc = CompensatedSum()
    coef_sum = 1.0
    log_coef = 0.0
    lg_k = special.gammaln(kappa)
    bound = math.inf
    used = 0
    for n in range(1, cap + 1):
        log_coef = special.gammaln(n + kappa) - lg_k - special.gammaln(n + 1.0) + n * math.log(v)
        coef = math.exp(log_coef)
        acc.add(coef * linnik_kW_cdf(float(n), delta, alpha, y, ctl))
        coef_sum += coef
        used = n
        tail_mass = max(0.0, full - coef_sum)
        bound = e_nt * tail_mass * linnik_kW_cdf(float(n + 1), delta, alpha, y, ctl)
        if not n_terms and bound <= tol:
            break
    value = e_nt * (1.0 + acc.value)
    if not n_terms and bound > tol:
        raise AccuracyError(f"Linnik series tail bound {bound:.2e} > {tol:g} after {used} terms",
                            partial=value)
    return OracleResult(float(min(1.0, max(0.0, value))), used, float(bound))


def linnik_dual_laplace(eta: float, delta: float, alpha: float, r: float, t: float, beta: float) -> float:
    """E exp(-beta X_t) for the Linnik driver: ((beta^a e^{-a r t}/delta + 1)/(beta^a/delta + 1))^(eta/(a r))."""
    if beta < 0 or t < 0:
        raise DomainError("need beta, t >= 0")
    ba = beta ** alpha / delta
    return ((ba * math.exp(-alpha * r * t) + 1.0) / (ba + 1.0)) ** (eta / (alpha * r))


# ---------------------------------------------------------------------------
# Stable and tempered stable
# ---------------------------------------------------------------------------

def stable_survival(alpha: float, r: float, x: float, t: float) -> float:
    """P_alpha(x v(t)^(-1/alpha)), v(t) = (1 - e^{-alpha r t})/(alpha r); t = inf allowed."""
    if not (0 < alpha < 1) or not r > 0:
        raise DomainError("stable_survival needs alpha in (0,1), r > 0")
    if x <= 0 or t <= 0:
        return 0.0 if x <= 0 else 1.0
    if math.isinf(t):
        return stable_cdf(alpha, (alpha * r) ** (1.0 / alpha) * x)
    v = -math.expm1(-alpha * r * t) / (alpha * r)
    return stable_cdf(alpha, x * v ** (-1.0 / alpha))


def tempered_stable_survival(alpha: float, r: float, gamma: float, x: float) -> float:
    """Infinite-horizon survival for the tail exp(-gamma x) nu_stable(x, inf)."""
    if not (0 < alpha < 1) or not r > 0 or gamma < 0:
        raise DomainError("tempered_stable_survival needs alpha in (0,1), r > 0, gamma >= 0")
    if x <= 0:
        return 0.0
    k = (alpha * r) ** (1.0 / alpha)
    shift = gamma ** alpha / (math.cos(math.pi * alpha / 2.0) * alpha * r)
    body, _ = integrate.quad(lambda y: math.exp(-gamma * y) * stable_pdf(alpha, k * y),
                             0.0, x, limit=200, epsabs=1e-13)
    return float(min(1.0, max(0.0, math.exp(shift) * k * body)))
