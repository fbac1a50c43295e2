"""
Scalar special functions behind the closed-form examples.

Stable law normalization: `stable_cdf` / `stable_pdf` describe the positive
alpha-stable variable Z with E exp(-beta Z) = exp(-beta**alpha / cos(pi*alpha/2)).
The standard one-sided variable Z0 (E exp(-beta Z0) = exp(-beta**alpha)) relates
to it by Z = c**(1/alpha) * Z0 with c = 1/cos(pi*alpha/2).
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .errors import AccuracyError, DomainError
from .utils import CompensatedSum

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SeriesControl:
    max_terms: int = 500
    abs_tol: float = 1e-15
    rel_tol: float = 1e-13

    def __post_init__(self):
        if self.max_terms < 1:
            raise DomainError(f"max_terms must be >= 1, got {self.max_terms}")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("series tolerances must be > 0")


DEFAULT_SERIES = SeriesControl()


# ---------------------------------------------------------------------------
# Mittag-Leffler
# ---------------------------------------------------------------------------

ML_SERIES_RADIUS = 2.0


def _ml_series(alpha: float, x: float, ctl: SeriesControl) -> float:
    acc = CompensatedSum()
    log_abs_x = math.log(abs(x)) if x != 0 else -math.inf
    for k in range(ctl.max_terms):
        if k == 0:
            term = 1.0
        elif x == 0:
            break
        else:
            mag = math.exp(k * log_abs_x - special.gammaln(1.0 + alpha * k))
            term = mag if (x > 0 or k % 2 == 0) else -mag
        acc.add(term)
        # terms decrease once Gamma(1+alpha*k) outgrows |x|**k
        if k > 2 and abs(term) <= ctl.abs_tol + ctl.rel_tol * abs(acc.value):
            return acc.value
    if x == 0:
        return 1.0
    raise AccuracyError(f"Mittag-Leffler series did not converge in {ctl.max_terms} terms "
                        f"(alpha={alpha}, x={x})", partial=acc.value)


def _ml_negative_integral(alpha: float, s: float) -> float:
    # E_alpha(-t**alpha) = int_0^inf exp(-r t) K(r) dr  (complete monotonicity, 0<alpha<1)
    t = s ** (1.0 / alpha)
    sa = math.sin(alpha * math.pi)
    ca = math.cos(alpha * math.pi)

    def kernel(r):
        ra = r ** alpha
        return math.exp(-r * t) * r ** (alpha - 1.0) * sa / (math.pi * (ra * ra + 2.0 * ra * ca + 1.0))

    head, _ = integrate.quad(kernel, 0.0, 1.0, limit=200)
    tail, _ = integrate.quad(kernel, 1.0, math.inf, limit=200)
    return head + tail


def mittag_leffler(alpha: float, x: float, ctl: SeriesControl = DEFAULT_SERIES) -> float:
    """E_alpha(x) = sum_k x**k / Gamma(1 + alpha k) for 0 < alpha <= 1."""
    if not (0.0 < alpha <= 1.0):
        raise DomainError(f"mittag_leffler needs alpha in (0,1], got {alpha}")
    x = float(x)
    if alpha == 1.0:
        return math.exp(x)
    if alpha == 0.5 and x <= 0.0:
        # E_{1/2}(-z) = exp(z^2) erfc(z)
        return float(special.erfcx(-x))
    if x >= -ML_SERIES_RADIUS:
        return _ml_series(alpha, x, ctl)
    return _ml_negative_integral(alpha, -x)


# ---------------------------------------------------------------------------
# Kummer 1F1
# ---------------------------------------------------------------------------

def _is_nonpos_int(v: float) -> bool:
    return v <= 0 and float(v).is_integer()


def kummer_1f1(a: float, b: float, y):
    """Confluent hypergeometric 1F1(a; b; y); vectorised over y.

    Negative arguments with b - a > 0 go through the Kummer transform
    exp(y) 1F1(b - a; b; -y), whose series has positive terms only.
    """
    if _is_nonpos_int(b):
        raise DomainError(f"1F1 undefined for b = {b}")
    y_arr = np.asarray(y, dtype=float)
    if a == b:
        out = np.exp(y_arr)
    elif _is_nonpos_int(a):
        out = special.hyp1f1(a, b, y_arr)
    else:
        direct = special.hyp1f1(a, b, y_arr)
        use_kummer = (y_arr < 0) & (y_arr > -600.0) & ((b - a) > 0)
        with np.errstate(over="ignore", invalid="ignore"):
            transformed = np.exp(y_arr) * special.hyp1f1(b - a, b, -y_arr)
        out = np.where(use_kummer, transformed, direct)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# Wright 1Psi1 factor of the Linnik densities
# ---------------------------------------------------------------------------

def wright_1psi1(kappa: float, alpha: float, x: float, ctl: SeriesControl = DEFAULT_SERIES) -> float:
    """sum_n (-1)^n Gamma(kappa+n) |x|^n / (Gamma(kappa) Gamma(alpha(n+kappa)) n!), x <= 0."""
    if kappa <= 0:
        raise DomainError(f"wright_1psi1 needs kappa > 0, got {kappa}")
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"wright_1psi1 needs alpha in (0,1), got {alpha}")
    if x > 0:
        raise DomainError(f"wright_1psi1 is used for x <= 0 only, got {x}")
    if x == 0:
        return float(special.rgamma(alpha * kappa))

    log_ax = math.log(-x)
    lg_kappa = special.gammaln(kappa)
    acc = CompensatedSum()
    biggest = 0.0
    prev = math.inf
    for n in range(ctl.max_terms):
        log_mag = (special.gammaln(kappa + n) - lg_kappa - special.gammaln(alpha * (n + kappa))
                   - special.gammaln(n + 1.0) + n * log_ax)
        if log_mag > 700:
            raise AccuracyError(f"wright_1psi1 overflow at n={n} (x={x})", partial=acc.value)
        mag = math.exp(log_mag)
        biggest = max(biggest, mag)
        acc.add(mag if n % 2 == 0 else -mag)
        if n > 2 and mag < prev and mag <= ctl.abs_tol + ctl.rel_tol * abs(acc.value):
            break
        prev = mag
    else:
        raise AccuracyError(f"wright_1psi1 did not converge in {ctl.max_terms} terms (x={x})",
                            partial=acc.value)
    s = acc.value
    if biggest > 1e13 * max(abs(s), 1e-300):
        raise AccuracyError(f"wright_1psi1 cancellation too severe at x={x}", partial=s)
    return s


# ---------------------------------------------------------------------------
# Incomplete gamma along straight segments (complex capable)
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def _gl_unit(n: int):
    nodes, weights = np.polynomial.legendre.leggauss(n)
    return 0.5 * (nodes + 1.0), 0.5 * weights


def _gl_size(scale: float, a: float) -> int:
    n = int(64 + 1.5 * scale / min(a, 1.0))
    # bucket to limit the number of distinct node sets
    return int(min(1 << 14, 1 << math.ceil(math.log2(n))))


def _lower_from_zero(a: float, z: np.ndarray) -> np.ndarray:
    """Gamma(a; 0, z) for a > 0 and complex z off the negative real axis."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape, dtype=complex)
    flat_z = z.ravel()
    flat_out = out.ravel()

    real_pos = (flat_z.imag == 0) & (flat_z.real >= 0)
    if np.any(real_pos):
        flat_out[real_pos] = special.gammainc(a, flat_z[real_pos].real) * special.gamma(a)

    rest = np.flatnonzero(~real_pos)
    if rest.size:
        sizes = np.array([_gl_size(abs(v), a) for v in flat_z[rest]])
        for n in np.unique(sizes):
            idx = rest[sizes == n]
            w, wt = _gl_unit(int(n))
            zz = flat_z[idx][:, None]
            if a < 1.0:
                # t = z w^(1/a): integrand becomes exp(-z w^(1/a)) / a, no endpoint singularity
                vals = np.exp(-zz * w[None, :] ** (1.0 / a)) @ wt
                flat_out[idx] = flat_z[idx] ** a / a * vals
            else:
                vals = (np.exp(-zz * w[None, :]) * w[None, :] ** (a - 1.0)) @ wt
                flat_out[idx] = flat_z[idx] ** a * vals
    return out


def _crosses_cut(z0: complex, z1: complex) -> bool:
    if z0.imag == z1.imag:
        return z0.imag == 0 and min(z0.real, z1.real) < 0
    s = z0.imag / (z0.imag - z1.imag)
    if not (0.0 <= s <= 1.0):
        return False
    x_cross = z0.real + s * (z1.real - z0.real)
    return x_cross < 0


def incomplete_gamma(a: float, z0, z1):
    """Gamma(a; z0, z1) = int_{z0}^{z1} exp(-t) t^(a-1) dt along the straight segment.

    z1 may be an array (z0 scalar) or math.inf. Principal branch of t^(a-1).
    """
    a = float(a)
    z0 = complex(z0)
    integer_a = a.is_integer()

    if isinstance(z1, float) and math.isinf(z1):
        if a <= 0:
            raise DomainError(f"complete gamma undefined for a = {a}")
        if z0 == 0:
            return complex(special.gamma(a))
        return complex(special.gamma(a)) - complex(_lower_from_zero(a, np.array([z0]))[0])

    z1_arr = np.asarray(z1, dtype=complex)
    scalar = z1_arr.ndim == 0
    z1_arr = np.atleast_1d(z1_arr)

    if not integer_a:
        for v in (z0, *z1_arr.tolist()):
            if v.imag == 0 and v.real < 0:
                raise DomainError(f"point {v} lies on the branch cut of t^(a-1)")
        if any(_crosses_cut(z0, v) for v in z1_arr.tolist()):
            raise DomainError("integration segment crosses the negative real axis")

    if a > 0:
        res = _lower_from_zero(a, z1_arr)
        if z0 != 0:
            res = res - _lower_from_zero(a, np.array([z0]))[0]
    else:
        if z0 == 0 or np.any(z1_arr == 0):
            raise DomainError(f"Gamma(a; 0, z) diverges for a = {a}")
        n = _gl_size(float(np.max(np.abs(z1_arr - z0))), 1.0)
        w, wt = _gl_unit(n)
        seg = z1_arr[:, None] - z0
        t = z0 + seg * w[None, :]
        res = (np.exp(-t) * t ** (a - 1.0)) @ wt * z1_arr.__sub__(z0)
    return complex(res[0]) if scalar else res


# ---------------------------------------------------------------------------
# One-sided stable law (Kanter / Zolotarev integral representation)
# ---------------------------------------------------------------------------

def _check_stable_alpha(alpha: float):
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"stable law needs alpha in (0,1), got {alpha}")


def _kanter_a(theta, alpha: float):
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return (np.sin(alpha * theta) ** (alpha / (1.0 - alpha)) * np.sin((1.0 - alpha) * theta)
                / np.sin(theta) ** (1.0 / (1.0 - alpha)))


def _stable_scale(alpha: float) -> float:
    return (1.0 / math.cos(math.pi * alpha / 2.0)) ** (1.0 / alpha)


def _std_cdf(alpha: float, x: float) -> float:
    if x <= 0:
        return 0.0
    if alpha == 0.5:
        return float(special.erfc(1.0 / (2.0 * math.sqrt(x))))
    p = alpha / (1.0 - alpha)
    xp = x ** (-p)

    def f(theta):
        return math.exp(-xp * float(_kanter_a(theta, alpha))) if theta < math.pi else 0.0

    val, _ = integrate.quad(f, 0.0, math.pi, limit=200)
    return min(1.0, max(0.0, val / math.pi))


def _std_pdf(alpha: float, x: float) -> float:
    if x <= 0:
        return 0.0
    if alpha == 0.5:
        return 0.5 / math.sqrt(math.pi) * x ** -1.5 * math.exp(-1.0 / (4.0 * x))
    p = alpha / (1.0 - alpha)
    xp = x ** (-p)

    def f(theta):
        if theta >= math.pi:
            return 0.0
        a = float(_kanter_a(theta, alpha))
        return a * math.exp(-xp * a)

    val, _ = integrate.quad(f, 0.0, math.pi, limit=200)
    return p * xp / x * val / math.pi


def stable_cdf(alpha: float, x: float) -> float:
    """P_alpha(x) for the positive stable law with exponent beta**alpha / cos(pi alpha / 2)."""
    _check_stable_alpha(alpha)
    if math.isinf(x):
        return 1.0
    return _std_cdf(alpha, x / _stable_scale(alpha))


def stable_pdf(alpha: float, x: float) -> float:
    _check_stable_alpha(alpha)
    c = _stable_scale(alpha)
    return _std_pdf(alpha, x / c) / c


# ---------------------------------------------------------------------------
# Gamma law
# ---------------------------------------------------------------------------

def gamma_cdf(shape: float, scale: float, x):
    if shape <= 0 or scale <= 0:
        raise DomainError(f"gamma_cdf needs shape, scale > 0 (got {shape}, {scale})")
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0):
        raise DomainError("gamma_cdf needs x >= 0")
    out = special.gammainc(shape, x_arr / scale)
    return float(out) if np.ndim(out) == 0 else out
