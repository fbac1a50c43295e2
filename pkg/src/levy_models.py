"""
Driving subordinators of the risk process.

A model is known through its Levy tail nu(x, inf) and its Laplace exponent
    phi(beta) = int_0^inf (1 - exp(-beta y)) nu(dy) = beta int_0^inf exp(-beta x) tail(x) dx.
Downstream code only uses tail / phi / nu_moment / log_moment_finite.
"""
import json
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import integrate, special

from .errors import DomainError, SpecError
from .special_functions import incomplete_gamma, mittag_leffler

logger = logging.getLogger(__name__)


def _check_positive_x(x):
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr <= 0):
        raise DomainError("tail(x) needs x > 0")
    return x_arr


def _check_beta(beta):
    b = np.asarray(beta, dtype=float)
    if np.any(b < 0):
        raise DomainError("phi(beta) needs beta >= 0")
    return b


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


class LevyModel(ABC):
    family: str = "custom"

    @abstractmethod
    def tail(self, x):
        """nu(x, inf) for x > 0 (scalar or array)."""

    @abstractmethod
    def phi(self, beta):
        """Laplace exponent at real beta >= 0."""

    def phi_complex(self, z):
        """phi on Re(z) >= 0; default is the Fourier-type quadrature of the tail."""
        z_arr = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.array([self._phi_quad_complex(v) for v in z_arr])
        return complex(out[0]) if np.ndim(z) == 0 else out

    @abstractmethod
    def nu_moment(self, k: int) -> float:
        """int y^k nu(dy); math.inf when infinite."""

    @abstractmethod
    def log_moment_finite(self) -> bool:
        ...

    def total_mass(self) -> float:
        """nu(0, inf); math.inf for infinite activity."""
        return math.inf

    @property
    def tail_index(self) -> Optional[float]:
        """alpha with tail(x) ~ x^-alpha at 0, None when not regularly varying."""
        return None

    def breakpoints(self) -> Tuple[float, ...]:
        """Points where tail jumps (quadrature hints)."""
        return ()

    @property
    def heavy_tailed(self) -> bool:
        return math.isinf(self.nu_moment(1))

    def to_dict(self) -> dict:
        raise SpecError(f"{self.family} has no JSON form")

    # ---- quadrature fallbacks used by Custom and by tests ----

    def _phi_quad(self, beta: float) -> float:
        if beta == 0:
            return 0.0
        pts = [p for p in self.breakpoints() if 0 < p < 1]
        f = lambda x: math.exp(-beta * x) * float(self.tail(x))
        head, _ = integrate.quad(f, 0.0, 1.0, points=pts or None, limit=400)
        pts_far = [p for p in self.breakpoints() if p > 1]
        if pts_far:
            mid, _ = integrate.quad(f, 1.0, max(pts_far), points=pts_far[:-1] or None, limit=400)
            far, _ = integrate.quad(f, max(pts_far), math.inf, limit=400)
            return beta * (head + mid + far)
        far, _ = integrate.quad(f, 1.0, math.inf, limit=400)
        return beta * (head + far)

    def _phi_quad_complex(self, z: complex) -> complex:
        if z == 0:
            return 0j
        a, b = z.real, z.imag
        if b == 0:
            return complex(self._phi_quad(a))
        g = lambda x: math.exp(-a * x) * float(self.tail(x))
        pts = [p for p in self.breakpoints() if 0 < p < 1] or None
        c0, _ = integrate.quad(lambda x: g(x) * math.cos(b * x), 0.0, 1.0, points=pts, limit=400)
        s0, _ = integrate.quad(lambda x: g(x) * math.sin(b * x), 0.0, 1.0, points=pts, limit=400)
        c1, _ = integrate.quad(g, 1.0, math.inf, weight="cos", wvar=b, limlst=100)
        s1, _ = integrate.quad(g, 1.0, math.inf, weight="sin", wvar=b, limlst=100)
        return z * complex(c0 + c1, -(s0 + s1))

    def _moment_quad(self, k: int) -> float:
        # m_k = k int x^(k-1) tail(x) dx
        f = lambda x: k * x ** (k - 1) * float(self.tail(x))
        pts = [p for p in self.breakpoints() if 0 < p < 1] or None
        head, _ = integrate.quad(f, 0.0, 1.0, points=pts, limit=400)
        far, _ = integrate.quad(f, 1.0, math.inf, limit=400)
        return head + far


def _check_k(k: int):
    if int(k) != k or k < 1:
        raise DomainError(f"moment order must be a positive integer, got {k}")


@dataclass(frozen=True)
class ExponentialJumps(LevyModel):
    eta: float
    delta: float
    family: str = field(default="exponential", init=False)

    def __post_init__(self):
        if not (self.eta > 0 and self.delta > 0):
            raise DomainError(f"exponential jumps need eta, delta > 0 (got {self.eta}, {self.delta})")

    def tail(self, x):
        x = _check_positive_x(x)
        return _out(self.eta * np.exp(-self.delta * x))

    def phi(self, beta):
        b = _check_beta(beta)
        return _out(self.eta * b / (b + self.delta))

    def phi_complex(self, z):
        z = np.asarray(z, dtype=complex)
        out = self.eta * z / (z + self.delta)
        return complex(out) if out.ndim == 0 else out

    def nu_moment(self, k: int) -> float:
        _check_k(k)
        return self.eta * math.factorial(k) / self.delta ** k

    def log_moment_finite(self) -> bool:
        return True

    def total_mass(self) -> float:
        return self.eta

    def to_dict(self) -> dict:
        return {"family": self.family, "params": {"eta": self.eta, "delta": self.delta}}


def _ml_tail(alpha: float, s: np.ndarray) -> np.ndarray:
    """E_alpha(-s) elementwise."""
    if alpha == 1.0:
        return np.exp(-s)
    if alpha == 0.5:
        return special.erfcx(s)
    return np.vectorize(lambda v: mittag_leffler(alpha, -v), otypes=[float])(s)


@dataclass(frozen=True)
class Linnik(LevyModel):
    """Compound Poisson with Mittag-Leffler jumps: tail = eta * E_alpha(-delta x^alpha)."""
    eta: float
    delta: float
    alpha: float
    family: str = field(default="linnik", init=False)

    def __post_init__(self):
        if not (self.eta > 0 and self.delta > 0):
            raise DomainError(f"linnik needs eta, delta > 0 (got {self.eta}, {self.delta})")
        if not (0 < self.alpha <= 1):
            raise DomainError(f"linnik needs alpha in (0,1], got {self.alpha}")

    def tail(self, x):
        x = _check_positive_x(x)
        return _out(self.eta * _ml_tail(self.alpha, self.delta * x ** self.alpha))

    def phi(self, beta):
        b = _check_beta(beta)
        ba = b ** self.alpha
        return _out(self.eta * ba / (self.delta + ba))

    def phi_complex(self, z):
        z = np.asarray(z, dtype=complex)
        za = z ** self.alpha
        out = self.eta * za / (self.delta + za)
        return complex(out) if out.ndim == 0 else out

    def nu_moment(self, k: int) -> float:
        _check_k(k)
        if self.alpha < 1:
            return math.inf
        return self.eta * math.factorial(k) / self.delta ** k

    def log_moment_finite(self) -> bool:
        return True

    def total_mass(self) -> float:
        return self.eta

    def to_dict(self) -> dict:
        return {"family": self.family,
                "params": {"eta": self.eta, "delta": self.delta, "alpha": self.alpha}}


@dataclass(frozen=True)
class Stable(LevyModel):
    """phi(beta) = beta^alpha / cos(pi alpha / 2)."""
    alpha: float
    family: str = field(default="stable", init=False)

    def __post_init__(self):
        if not (0 < self.alpha < 1):
            raise DomainError(f"stable needs alpha in (0,1), got {self.alpha}")

    @property
    def scale(self) -> float:
        return 1.0 / math.cos(math.pi * self.alpha / 2.0)

    def tail(self, x):
        x = _check_positive_x(x)
        k = self.scale / special.gamma(1.0 - self.alpha)
        return _out(k * x ** (-self.alpha))

    def phi(self, beta):
        b = _check_beta(beta)
        return _out(self.scale * b ** self.alpha)

    def phi_complex(self, z):
        z = np.asarray(z, dtype=complex)
        out = self.scale * z ** self.alpha
        return complex(out) if out.ndim == 0 else out

    def nu_moment(self, k: int) -> float:
        _check_k(k)
        return math.inf

    def log_moment_finite(self) -> bool:
        return True

    @property
    def tail_index(self) -> Optional[float]:
        return self.alpha

    def to_dict(self) -> dict:
        return {"family": self.family, "params": {"alpha": self.alpha}}


@dataclass(frozen=True)
class TruncatedStable(LevyModel):
    """tail = C x^-alpha on (0, A), 0 from A on (claims bounded by A)."""
    C: float
    A: float
    alpha: float
    family: str = field(default="truncated_stable", init=False)

    def __post_init__(self):
        if not (self.C > 0 and self.A > 0):
            raise DomainError(f"truncated stable needs C, A > 0 (got {self.C}, {self.A})")
        if not (0 < self.alpha < 1):
            raise DomainError(f"truncated stable needs alpha in (0,1), got {self.alpha}")

    def tail(self, x):
        x = _check_positive_x(x)
        with np.errstate(divide="ignore"):
            out = np.where(x < self.A, self.C * x ** (-self.alpha), 0.0)
        return _out(out)

    def phi(self, beta):
        # C beta^alpha gamma(1 - alpha, beta A), lower incomplete gamma
        b = _check_beta(beta)
        a = 1.0 - self.alpha
        out = self.C * b ** self.alpha * special.gammainc(a, b * self.A) * special.gamma(a)
        return _out(out)

    def phi_complex(self, z):
        z_arr = np.asarray(z, dtype=complex)
        flat = np.atleast_1d(z_arr)
        low = incomplete_gamma(1.0 - self.alpha, 0.0, flat * self.A)
        out = self.C * flat ** self.alpha * low
        return complex(out[0]) if z_arr.ndim == 0 else out.reshape(z_arr.shape)

    def nu_moment(self, k: int) -> float:
        # k int_0^A x^(k-1) C x^-alpha dx, boundary atom included
        _check_k(k)
        return self.C * k * self.A ** (k - self.alpha) / (k - self.alpha)

    def log_moment_finite(self) -> bool:
        return True

    @property
    def tail_index(self) -> Optional[float]:
        return self.alpha

    def breakpoints(self) -> Tuple[float, ...]:
        return (self.A,)

    def to_dict(self) -> dict:
        return {"family": self.family, "params": {"C": self.C, "A": self.A, "alpha": self.alpha}}


@dataclass(frozen=True)
class Esscher(LevyModel):
    """Tail tilt: tail_gamma(x) = exp(-gamma x) tail_base(x)."""
    base: LevyModel
    gamma: float
    family: str = field(default="", init=False)

    def __post_init__(self):
        if not self.gamma >= 0:
            raise DomainError(f"esscher gamma must be >= 0, got {self.gamma}")
        object.__setattr__(self, "family", f"esscher({self.base.family})")

    def tail(self, x):
        x = _check_positive_x(x)
        return _out(np.exp(-self.gamma * x) * self.base.tail(x))

    def phi(self, beta):
        b = _check_beta(beta)
        if self.gamma == 0:
            return self.base.phi(b)
        return _out(b / (b + self.gamma) * self.base.phi(b + self.gamma))

    def phi_complex(self, z):
        z = np.asarray(z, dtype=complex)
        if self.gamma == 0:
            return self.base.phi_complex(z)
        out = z / (z + self.gamma) * np.asarray(self.base.phi_complex(z + self.gamma))
        return complex(out) if out.ndim == 0 else out

    def nu_moment(self, k: int) -> float:
        _check_k(k)
        if self.gamma == 0:
            return self.base.nu_moment(k)
        if isinstance(self.base, Stable):
            a = self.base.alpha
            kk = self.base.scale / special.gamma(1.0 - a)
            return k * kk * special.gamma(k - a) / self.gamma ** (k - a)
        return self._moment_quad(k)

    def log_moment_finite(self) -> bool:
        return True if self.gamma > 0 else self.base.log_moment_finite()

    def total_mass(self) -> float:
        return self.base.total_mass()

    @property
    def tail_index(self) -> Optional[float]:
        return self.base.tail_index

    def breakpoints(self) -> Tuple[float, ...]:
        return self.base.breakpoints()

    def to_dict(self) -> dict:
        d = self.base.to_dict()
        d["esscher_gamma"] = self.gamma
        return d


@dataclass(frozen=True)
class Custom(LevyModel):
    """User tail callable; every operation goes through quadrature."""
    tail_fn: Callable[[float], float]
    name: str = "custom"
    log_moment: bool = True
    mass: float = math.inf
    index: Optional[float] = None
    jumps_at: Tuple[float, ...] = ()
    family: str = field(default="custom", init=False)

    def __post_init__(self):
        object.__setattr__(self, "family", self.name)

    def tail(self, x):
        x = _check_positive_x(x)
        return _out(np.vectorize(lambda v: float(self.tail_fn(v)), otypes=[float])(x))

    def phi(self, beta):
        b = _check_beta(beta)
        return _out(np.vectorize(self._phi_quad, otypes=[float])(b))

    def nu_moment(self, k: int) -> float:
        _check_k(k)
        try:
            with np.errstate(all="ignore"):
                val = self._moment_quad(k)
        except (OverflowError, ZeroDivisionError):
            return math.inf
        return val if math.isfinite(val) else math.inf

    def log_moment_finite(self) -> bool:
        return self.log_moment

    def total_mass(self) -> float:
        return self.mass

    @property
    def tail_index(self) -> Optional[float]:
        return self.index

    def breakpoints(self) -> Tuple[float, ...]:
        return tuple(self.jumps_at)


@dataclass(frozen=True)
class ProcessParams:
    r: float
    c: float = 0.0

    def __post_init__(self):
        if not (self.r > 0):
            raise DomainError(f"interest rate r must be > 0, got {self.r}")


# ---------------------------------------------------------------------------
# JSON model specs
# ---------------------------------------------------------------------------

_FAMILY_PARAMS = {
    "exponential": (ExponentialJumps, ("eta", "delta")),
    "linnik": (Linnik, ("eta", "delta", "alpha")),
    "stable": (Stable, ("alpha",)),
    "truncated_stable": (TruncatedStable, ("C", "A", "alpha")),
}
_TOP_KEYS = ("family", "params", "esscher_gamma")


def _num(v, key: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SpecError(f"'{key}' must be a number, got {v!r}")
    return float(v)


def model_from_dict(spec: dict) -> LevyModel:
    if not isinstance(spec, dict):
        raise SpecError("model spec must be a JSON object")
    for key in spec:
        if key not in _TOP_KEYS:
            raise SpecError(f"unknown key '{key}' in model spec")
    family = spec.get("family")
    if family not in _FAMILY_PARAMS:
        raise SpecError(f"unknown family {family!r}; expected one of {sorted(_FAMILY_PARAMS)}")
    cls, names = _FAMILY_PARAMS[family]
    params = spec.get("params", {})
    if not isinstance(params, dict):
        raise SpecError("'params' must be an object")
    for key in params:
        if key not in names:
            raise SpecError(f"unknown key '{key}' in params for family '{family}'")
    missing = [n for n in names if n not in params]
    if missing:
        raise SpecError(f"missing parameter(s) {missing} for family '{family}'")
    try:
        model = cls(**{n: _num(params[n], n) for n in names})
        gamma = spec.get("esscher_gamma")
        if gamma is not None:
            model = Esscher(model, _num(gamma, "esscher_gamma"))
    except DomainError as e:
        raise SpecError(str(e)) from e
    return model


def load_model(path: str) -> LevyModel:
    try:
        with open(path, "r", encoding="utf-8") as f:
            spec = json.load(f)
    except json.JSONDecodeError as e:
        raise SpecError(f"{path}: invalid JSON ({e})") from e
    except OSError as e:
        raise SpecError(f"cannot read model spec {path}: {e}") from e
    return model_from_dict(spec)


def default_truncated_stable() -> TruncatedStable:
    return TruncatedStable(C=1.0, A=1.0, alpha=0.5)
