"""
Spectral expansion of the finite-time survival probability:

    P_x(tau_0 > t) = sum_n mu_n W^(n)(x) exp(-r n t),    t > t_alpha,

with exp(phi_r(v)) = sum_n mu_n v^n and t_alpha = -log(cos(pi alpha/2)) / (r alpha).
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence, Union

import numpy as np
from scipy import integrate
from scipy.special import comb

from .backward_exponent import BackwardExponent
from .errors import DomainError
from .report import render_grid
from .transform_engine import WFamily, dual_density, w_derivatives, GridSpec
from .utils import CompensatedSum, write_csv

logger = logging.getLogger(__name__)


def t_alpha(alpha: float, r: float) -> float:
    if not (0 < alpha < 1) or not r > 0:
        raise DomainError(f"t_alpha needs alpha in (0,1) and r > 0 (got {alpha}, {r})")
    return -math.log(math.cos(math.pi * alpha / 2.0)) / (r * alpha)


MU_RULES = ("expansion", "moments")


def mu_coefficients(be: BackwardExponent, N: int, rule: str = "expansion") -> np.ndarray:
    """mu_0..mu_N, Taylor coefficients of exp(+phi_r(v)).

    rule="moments" gives the coefficients of exp(-phi_r(-v)) instead, i.e.
    E[X_inf^n] / n! for the stationary dual law. The resulting series does not
    converge to the survival probability.
    """
    if N < 0:
        raise DomainError(f"N must be >= 0, got {N}")
    if rule not in MU_RULES:
        raise DomainError(f"unknown mu rule {rule!r}; use one of {MU_RULES}")
    mu = np.zeros(N + 1)
    mu[0] = 1.0
    if N == 0:
        return mu
    c = be.taylor_coeffs(N)
    if rule == "moments":
        c = c * (-1.0) ** np.arange(2, N + 2)
    for n in range(1, N + 1):
        acc = CompensatedSum()
        for k in range(1, n + 1):
            acc.add(k * c[k - 1] * mu[n - k])
        mu[n] = acc.value / n
    return mu


@dataclass
class SpectralSeries:
    mu: np.ndarray
    wf: WFamily
    r: float
    t_alpha: float
    alpha: Optional[float]

    @property
    def N(self) -> int:
        return len(self.mu) - 1

    def _check(self, t: float, N: int, force: bool):
        if N < 0 or N > self.N:
            raise DomainError(f"N={N} outside the available range 0..{self.N}")
        if N > self.wf.n_max + 1:
            raise DomainError(f"W^({N}) not tabulated (max order {self.wf.n_max + 1})")
        if t <= self.t_alpha:
            if not force:
                raise DomainError(f"t={t:g} is not above t_alpha={self.t_alpha:.4f}; "
                                  f"the series need not converge (use --force-below-talpha)")
            logger.warning("[SPECTRAL] evaluating below t_alpha=%.4f at t=%g", self.t_alpha, t)


def build_series(be: BackwardExponent, N: int, grid: Optional[GridSpec] = None,
                 wf: Optional[WFamily] = None, mu_rule: str = "expansion") -> SpectralSeries:
    """mu_0..mu_N plus a W table with derivatives up to W^(N)."""
    mu = mu_coefficients(be, N, mu_rule)
    if wf is None:
        wf = w_derivatives(be, grid or GridSpec(), max(N - 1, 0))
    alpha = be.model.tail_index
    ta = t_alpha(alpha, be.r) if alpha is not None else 0.0
    if np.any(mu < -1e-12):
        logger.warning("[SPECTRAL] negative mu_n found: %s", mu[mu < -1e-12])
    return SpectralSeries(mu=mu, wf=wf, r=be.r, t_alpha=ta, alpha=alpha)


def survival_series(s: SpectralSeries, x, t: float, N: int, force: bool = False):
    """Raw partial sum sum_{n=0}^N mu_n W^(n)(x) e^{-rnt}; not clipped."""
    s._check(t, N, force)
    x = np.asarray(x, dtype=float)
    total = np.zeros_like(x)
    for n in range(N + 1):
        total = total + s.mu[n] * s.wf.deriv(n, x) * math.exp(-s.r * n * t)
    return float(total) if total.ndim == 0 else total


def _partial_on_grid(s: SpectralSeries, t: float, N: int) -> np.ndarray:
    acc = np.zeros(s.wf.grid.M + 1)
    for n in range(N + 1):
        acc += s.mu[n] * s.wf.on_grid(n) * math.exp(-s.r * n * t)
    return acc


def survival_curve(s: SpectralSeries, t_values: Sequence[float], N: int,
                   x=None, force: bool = False) -> np.ndarray:
    """Partial sums for many t from one derivative table; rows follow t_values."""
    rows = []
    for t in t_values:
        s._check(t, N, force)
        rows.append(_partial_on_grid(s, t, N) if x is None else survival_series(s, x, t, N, force))
    return np.array(rows)


@dataclass
class TruncationErrorReport:
    N_values: list
    t_values: list
    e: np.ndarray          # e[i, j] for N_values[i], t_values[j]

    def to_csv(self, path: Optional[str] = None, comments=()) -> str:
        rows = [(N, float(t), float(self.e[i, j]))
                for i, N in enumerate(self.N_values) for j, t in enumerate(self.t_values)]
        return write_csv(path, ["N", "t", "e"], rows, comments=comments)

    def to_text(self, title: str = "TRUNCATION ERROR e_{N,t}") -> str:
        return render_grid(title, "N", self.N_values, "t", self.t_values, self.e)


Reference = Union[Callable[[float], np.ndarray], Mapping[float, np.ndarray]]


def truncation_error_table(s: SpectralSeries, reference: Reference,
                           N_values: Sequence[int], t_values: Sequence[float]) -> TruncationErrorReport:
    """e_{N,t} = max_i |reference(i h, t) - partial_sum(i h, t, N)| on {0, ..., M h}."""
    e = np.zeros((len(N_values), len(t_values)))
    for j, t in enumerate(t_values):
        ref = reference[t] if isinstance(reference, Mapping) else reference(t)
        ref = np.asarray(ref, dtype=float)
        for i, N in enumerate(N_values):
            s._check(t, N, force=True)
            e[i, j] = float(np.max(np.abs(ref - _partial_on_grid(s, t, N))))
        logger.info("[TABLE1] t=%g done", t)
    return TruncationErrorReport(N_values=list(N_values), t_values=list(t_values), e=e)


def eigenmeasure_check(s: SpectralSeries, n: int, t: float) -> float:
    """sup_y |int p_t(x, y) W^(n+1)(x) dx - e^{-rnt} W^(n+1)(y)| over {0, ..., M h}."""
    wf = s.wf
    if n < 0 or n > wf.n_max:
        raise DomainError(f"W^({n + 1}) not tabulated")
    be = wf.be or BackwardExponent(wf.model, wf.r)
    ys = wf.grid.x
    target = math.exp(-s.r * n * t) * wf.on_grid(n + 1)
    if t == 0:
        return float(np.max(np.abs(wf.deriv(n + 1, ys) - target)))

    dd = dual_density(be, t, wf.grid)
    d = math.exp(-s.r * t)
    xs = wf.fine_x
    vals = wf.fine_derivs[n]
    weights = np.full(xs.size, wf.plan.dy)
    weights[[0, -1]] *= 0.5
    kernel = dd(ys[:, None] - d * xs[None, :])
    lhs = kernel @ (vals * weights)
    if dd.atom:
        lhs = lhs + dd.atom * wf.deriv(n + 1, ys / d) / d
    return float(np.max(np.abs(lhs - target)))


def tilted_series(s: SpectralSeries, gamma: float) -> SpectralSeries:
    """Series for the Esscher-tilted model, reusing the base derivative tables.

    W^(n+1)(x; gamma) = e^{phi_r(gamma) - gamma x} sum_j C(n,j) (-gamma)^(n-j) W^(j+1)(x).
    """
    if not gamma > 0:
        raise DomainError(f"gamma must be > 0, got {gamma}")
    wf = s.wf
    be = wf.be or BackwardExponent(wf.model, wf.r)
    shift = be.varphi_r(gamma)

    def tilt(xs, table):
        damp = np.where(xs >= 0, np.exp(shift - gamma * xs), 0.0)
        out = np.empty_like(table)
        for m in range(table.shape[0]):
            acc = np.zeros(xs.size)
            for j in range(m + 1):
                acc += comb(m, j) * (-gamma) ** (m - j) * table[j]
            out[m] = damp * acc
        return out

    fine = tilt(wf.fine_x, wf.fine_derivs)
    fine_w = np.maximum.accumulate(np.clip(
        integrate.cumulative_trapezoid(fine[0], dx=wf.plan.dy, initial=0.0), 0.0, 1.0))
    coarse = tilt(wf.x, wf.w_derivs)
    idx = np.searchsorted(wf.fine_x, wf.x - 0.5 * wf.plan.dy)
    tilted_be = be.tilted(gamma)
    twf = WFamily(grid=wf.grid, plan=wf.plan, x=wf.x, w=fine_w[idx], w_derivs=coarse,
                  fine_x=wf.fine_x, fine_w=fine_w, fine_derivs=fine,
                  model=tilted_be.model, r=wf.r, be=tilted_be)
    mu = mu_coefficients(tilted_be, s.N)
    return SpectralSeries(mu=mu, wf=twf, r=s.r, t_alpha=s.t_alpha, alpha=s.alpha)
