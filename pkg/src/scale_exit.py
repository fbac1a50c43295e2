"""
q-scale functions W_q = I^q W (Riemann-Liouville integral of order q) and the
two-sided exit transform E_x[exp(-q tau_a+); tau_a+ < tau_0] = W_{q/r}(x) / W_{q/r}(a).
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate, signal, special

from .backward_exponent import BackwardExponent
from .errors import DomainError
from .transform_engine import WFamily
from .utils import write_csv

logger = logging.getLogger(__name__)


@dataclass
class ScaleFunction:
    q: float
    base: WFamily
    x: np.ndarray          # fine grid from 0
    values: np.ndarray

    @property
    def r(self) -> float:
        return self.base.r

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.interp(x, self.x, self.values, left=0.0, right=self.values[-1])
        out = np.where(x < 0, 0.0, out)
        return float(out) if out.ndim == 0 else out

    def on_grid(self) -> np.ndarray:
        return self(self.base.grid.x)

    def to_csv(self, path: Optional[str] = None, comments=()) -> str:
        head = [f"# q={self.q!r} r={self.r!r} model={self.base.model.family}"]
        xs = self.base.grid.x
        rows = zip(xs.tolist(), self.on_grid().tolist())
        return write_csv(path, ["x", "Wq"], rows, comments=list(comments) + head)


def rl_integral(f: np.ndarray, dx: float, q: float) -> np.ndarray:
    """I^q f on a uniform grid from 0: product trapezoid rule, kernel moments exact per cell."""
    f = np.asarray(f, dtype=float)
    if q == 0:
        return f.copy()
    n = f.size
    k = np.arange(n, dtype=float)
    p = q + 1.0
    b = np.zeros(n)
    b[1:] = (k[1:] + 1.0) ** p - 2.0 * k[1:] ** p + (k[1:] - 1.0) ** p
    g = f.copy()
    g[0] = 0.0
    conv = signal.fftconvolve(g, b)[:n]
    a = np.zeros(n)
    a[1:] = (k[1:] - 1.0) ** p - (k[1:] - 1.0 - q) * k[1:] ** q
    out = dx ** q / special.gamma(q + 2.0) * (a * f[0] + conv + f)
    out[0] = 0.0
    return out


def fractional_integral_W(wf: WFamily, q: float) -> ScaleFunction:
    if q < 0:
        raise DomainError(f"fractional order q must be >= 0, got {q}")
    i0 = int(np.searchsorted(wf.fine_x, -0.5 * wf.plan.dy))
    xs = wf.fine_x[i0:] - wf.fine_x[i0]
    w = wf.fine_w[i0:]
    vals = w.copy() if q == 0 else rl_integral(w, wf.plan.dy, q)
    logger.debug("[SCALE] W_q for q=%g on %d points", q, xs.size)
    return ScaleFunction(q=q, base=wf, x=xs, values=vals)


def exit_upward_lt(q: float, x: float, a: float, sf: ScaleFunction) -> float:
    """E_x[exp(-q tau_a+); tau_a+ < tau_0] with sf of order q/r."""
    if not a > 0:
        raise DomainError(f"upper level a must be > 0, got {a}")
    if x > a:
        raise DomainError(f"start x={x} must not exceed a={a}")
    if not math.isclose(sf.q, q / sf.r, rel_tol=1e-12, abs_tol=1e-15):
        raise DomainError(f"scale function has order {sf.q}, expected q/r = {q / sf.r}")
    if a > sf.x[-1] + 1e-12:
        raise DomainError(f"a={a} beyond grid extent {sf.x[-1]:g}")
    if x < 0:
        return 0.0
    if x == a:
        return 1.0
    top = sf(a)
    if top <= 0:
        raise DomainError(f"W_q(a) vanishes at a={a}")
    return float(min(1.0, max(0.0, sf(x) / top)))


def lt_identity_check(sf: ScaleFunction, be: BackwardExponent, beta: float) -> float:
    """Relative error of int exp(-beta x) W_q(x) dx against beta^(-q-1) exp(-phi_r(beta))."""
    if not beta > 0:
        raise DomainError(f"beta must be > 0, got {beta}")
    top = sf.x[-1]
    if math.exp(-beta * top) > 1e-12:
        raise DomainError(f"grid extent {top:g} too short for beta={beta}: need "
                          f"exp(-beta*M*h) <= 1e-12, i.e. M*h >= {12 * math.log(10) / beta:.1f}")
    lt = integrate.simpson(np.exp(-beta * sf.x) * sf.values, x=sf.x)
    target = beta ** (-sf.q - 1.0) * math.exp(-be.varphi_r(beta))
    return float(abs(lt - target) / target)


@dataclass(frozen=True)
class ResidualEstimate:
    residual: float
    std_error: float


def martingale_residual(sf: ScaleFunction, x: float, t: float, q: float,
                        dual_samples: np.ndarray) -> ResidualEstimate:
    """|e^{-qt} E_x W_{q/r}(X_t) - W_{q/r}(x)| with X_t = e^{rt}(x - D), D the discounted jump sum."""
    r = sf.r
    if t == 0:
        return ResidualEstimate(0.0, 0.0)
    d = np.asarray(dual_samples, dtype=float)
    if d.size < 2:
        raise DomainError("need at least two samples")
    top = math.exp(r * t) * x
    if top > sf.x[-1] + 1e-12:
        raise DomainError(f"e^(rt) x = {top:g} beyond grid extent {sf.x[-1]:g}")
    vals = math.exp(-q * t) * sf(math.exp(r * t) * (x - d))
    mean = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / math.sqrt(vals.size))
    return ResidualEstimate(abs(mean - sf(x)), se)
