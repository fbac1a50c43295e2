"""
Backward exponent phi_r(beta) = (1/r) int_0^beta phi(u)/u du.

exp(-phi_r) is the Laplace transform of W, the law of the dual process at
infinity; equivalently r phi_r(z) = int_0^inf (1 - exp(-z x)) tail(x)/x dx.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate, special

from .errors import DomainError, UnsupportedModelError
from .levy_models import (
    Esscher,
    ExponentialJumps,
    LevyModel,
    Linnik,
    Stable,
    TruncatedStable,
)
from .special_functions import incomplete_gamma
from .utils import neumaier_sum

logger = logging.getLogger(__name__)

SMALL_U = 1e-6


def _closed_form_name(model: LevyModel) -> Optional[str]:
    if isinstance(model, (ExponentialJumps, Linnik, Stable, TruncatedStable)):
        return model.family
    if isinstance(model, Esscher) and _closed_form_name(model.base) is not None:
        return "esscher"
    return None


@dataclass(frozen=True)
class BackwardExponent:
    model: LevyModel
    r: float
    xi: int = field(init=False)
    closed_form: Optional[str] = field(init=False)

    def __post_init__(self):
        if not self.r > 0:
            raise DomainError(f"r must be > 0, got {self.r}")
        object.__setattr__(self, "xi", 0 if self.model.log_moment_finite() else 1)
        object.__setattr__(self, "closed_form", _closed_form_name(self.model))

    # ------------------------------------------------------------------

    def _require_xi0(self):
        if self.xi == 1:
            raise UnsupportedModelError(
                f"{self.model.family}: infinite log-moment (xi = 1), phi_r diverges at 0")

    def _base(self) -> "BackwardExponent":
        return BackwardExponent(self.model.base, self.r)

    def _closed(self, z):
        """Closed form at real or complex z (principal branch)."""
        m = self.model
        r = self.r
        if isinstance(m, ExponentialJumps):
            return m.eta / r * np.log1p(z / m.delta)
        if isinstance(m, Linnik):
            return m.eta / (r * m.alpha) * np.log1p(z ** m.alpha / m.delta)
        if isinstance(m, Stable):
            return m.scale * z ** m.alpha / (m.alpha * r)
        if isinstance(m, TruncatedStable):
            a = m.alpha
            if np.iscomplexobj(z):
                flat = np.atleast_1d(z)
                low = incomplete_gamma(1.0 - a, 0.0, flat * m.A).reshape(np.shape(z))
            else:
                low = special.gammainc(1.0 - a, z * m.A) * special.gamma(1.0 - a)
            return m.C / (r * a) * (z ** a * low - m.A ** (-a) * (-np.expm1(-z * m.A)))
        if isinstance(m, Esscher):
            base = self._base()
            if m.gamma == 0:
                return base._closed(z)
            return base._closed(z + m.gamma) - base._closed(m.gamma)
        raise AssertionError("no closed form")

    def _small_index(self, fn) -> float:
        """Index a with fn(s) ~ s^a near 0: the tail index, else a log2 ratio estimate."""
        a = self.model.tail_index
        if a is not None:
            return a
        hi, lo = abs(fn(1.0)), abs(fn(0.5))
        return math.log2(hi / lo) if lo > 0 and hi > lo else 1.0

    def _small_u_integral(self, eps: float) -> float:
        """int_0^eps phi(u)/u du."""
        m1 = self.model.nu_moment(1)
        if math.isfinite(m1):
            m2 = self.model.nu_moment(2)
            if math.isfinite(m2):
                return m1 * eps - m2 * eps * eps / 4.0
            return m1 * eps
        phi = lambda s: float(self.model.phi(eps * s))
        if self.model.tail_index is not None:
            return phi(1.0) / self.model.tail_index
        # u = eps s^k with k = 1/a leaves a bounded integrand k phi(eps s^k) / s
        k = 1.0 / self._small_index(phi)
        val, _ = integrate.quad(lambda s: k * phi(s ** k) / s if s > 0 else 0.0, 0.0, 1.0,
                                limit=200, epsabs=1e-16, epsrel=1e-12)
        return val

    # ------------------------------------------------------------------

    def varphi_r(self, beta):
        """phi_r at real beta >= 0; scalar or array."""
        self._require_xi0()
        b = np.asarray(beta, dtype=float)
        if np.any(b < 0):
            raise DomainError("varphi_r needs beta >= 0")
        if self.closed_form is not None:
            out = self._closed(b)
        else:
            out = np.vectorize(self.varphi_r_quadrature, otypes=[float])(b)
        return float(out) if np.ndim(out) == 0 else out

    def varphi_r_quadrature(self, beta: float) -> float:
        """(1/r) int_0^beta phi(u)/u du by adaptive quadrature."""
        self._require_xi0()
        if beta < 0:
            raise DomainError("varphi_r needs beta >= 0")
        if beta == 0:
            return 0.0
        eps = min(SMALL_U, beta)
        head = self._small_u_integral(eps)
        if beta == eps:
            return head / self.r
        f = lambda u: float(self.model.phi(u)) / u
        # one panel per decade
        edges = np.geomspace(eps, beta, max(2, math.ceil(math.log10(beta / eps)) + 1))
        body = neumaier_sum(integrate.quad(f, lo, hi, limit=200, epsabs=1e-14, epsrel=1e-12)[0]
                            for lo, hi in zip(edges[:-1], edges[1:]))
        return (head + body) / self.r

    def varphi_r_complex(self, z):
        """phi_r on Re(z) >= 0; closed form when known, segment quadrature otherwise."""
        self._require_xi0()
        z_arr = np.asarray(z, dtype=complex)
        if np.any(z_arr.real < 0):
            raise DomainError("varphi_r_complex needs Re(z) >= 0")
        if self.closed_form is not None:
            out = self._closed(z_arr)
        else:
            out = np.vectorize(self.segment_quadrature, otypes=[complex])(z_arr)
        return complex(out) if np.ndim(out) == 0 else out

    def segment_quadrature(self, z: complex) -> complex:
        """(1/r) int_0^1 phi(s z)/s ds along the straight segment [0, z]."""
        self._require_xi0()
        z = complex(z)
        if z.real < 0:
            raise DomainError("segment quadrature needs Re(z) >= 0")
        if z == 0:
            return 0j
        s0 = min(SMALL_U / abs(z), 1.0)

        def part(fn, lo=s0, hi=1.0, **kw):
            opts = dict(limit=400, epsabs=1e-12, epsrel=1e-10)
            opts.update(kw)
            val, _ = integrate.quad(fn, lo, hi, **opts)
            return val

        # phi(s z)/s ~ z * m1 near 0, or ~ phi(s z)/(alpha s) for regular variation
        m1 = self.model.nu_moment(1)
        if math.isfinite(m1):
            head = z * m1 * s0
        elif self.model.tail_index is not None:
            head = complex(self.model.phi_complex(s0 * z)) / self.model.tail_index
        else:
            small = lambda s: complex(self.model.phi_complex(s0 * s * z))
            k = 1.0 / self._small_index(small)
            g = lambda s: k * small(s ** k) / s if s > 0 else 0j
            head = complex(part(lambda s: g(s).real, 0.0, 1.0, epsabs=1e-16, epsrel=1e-12),
                           part(lambda s: g(s).imag, 0.0, 1.0, epsabs=1e-16, epsrel=1e-12))

        re = part(lambda s: complex(self.model.phi_complex(s * z)).real / s)
        im = part(lambda s: complex(self.model.phi_complex(s * z)).imag / s)
        return (head + complex(re, im)) / self.r

    def real_part_check(self, u: float) -> float:
        """Re phi_r(iu) = (1/r) int_0^inf (1 - cos(u x)) tail(x)/x dx."""
        self._require_xi0()
        if u == 0:
            return 0.0
        m = self.model
        pts = [p for p in m.breakpoints() if 0 < p < 1] or None
        f = lambda x: (1.0 - math.cos(u * x)) * float(m.tail(x)) / x
        head, _ = integrate.quad(f, 0.0, 1.0, points=pts, limit=1000, epsabs=1e-12)
        g = lambda x: float(m.tail(x)) / x
        far_pts = [p for p in m.breakpoints() if p > 1]
        top = max(far_pts) if far_pts else math.inf
        if top == math.inf:
            plain, _ = integrate.quad(g, 1.0, math.inf, limit=400)
            osc, _ = integrate.quad(g, 1.0, math.inf, weight="cos", wvar=u, limlst=200)
            far = plain - osc
        else:
            far, _ = integrate.quad(lambda x: (1.0 - math.cos(u * x)) * g(x), 1.0, top,
                                    points=far_pts[:-1] or None, limit=1000)
        return (head + far) / self.r

    def taylor_coeffs(self, n_max: int) -> np.ndarray:
        """c_1..c_{n_max} with phi_r(v) = sum c_k v^k; c_k = (-1)^(k+1) m_k / (r k k!)."""
        if n_max < 1:
            raise DomainError(f"n_max must be >= 1, got {n_max}")
        out = np.empty(n_max)
        for k in range(1, n_max + 1):
            m_k = self.model.nu_moment(k)
            if not math.isfinite(m_k):
                raise UnsupportedModelError(
                    f"{self.model.family}: moment m_{k} of the Levy measure is infinite")
            sign = 1.0 if k % 2 == 1 else -1.0
            out[k - 1] = sign * m_k / (self.r * k * math.factorial(k))
        return out

    def esscher_shift(self, gamma: float, beta):
        """phi_r(beta + gamma) - phi_r(gamma)."""
        if not gamma > 0:
            raise DomainError(f"esscher shift needs gamma > 0, got {gamma}")
        b = np.asarray(beta, dtype=float)
        if np.any(b < 0):
            raise DomainError("esscher shift needs beta >= 0")
        out = self.varphi_r(b + gamma) - self.varphi_r(gamma)
        return float(out) if np.ndim(out) == 0 else out

    def tilted(self, gamma: float) -> "BackwardExponent":
        return BackwardExponent(Esscher(self.model, gamma), self.r)

    def derivative_order_ok(self, n_max: int) -> bool:
        """W^(n_max+1) exists and is continuous iff nu(0,inf)/r > n_max + 1."""
        return self.model.total_mass() / self.r > n_max + 1
