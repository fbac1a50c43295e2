"""
Absolute ruin probabilities.

With c != 0 the barrier -c/r is moved to 0 by starting at x_eff = x + c/r.
Finite horizon: P_x(tau_0 <= t) = P(X_t > x_eff) for the dual process from 0.
Infinite horizon: survival is W(x_eff) when the log-moment is finite, else 0.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional, Union

import numpy as np
from scipy import integrate

from .backward_exponent import BackwardExponent
from .errors import DomainError
from .levy_models import LevyModel, ProcessParams
from .transform_engine import FineCDF, GridSpec, WFamily, dual_density, finite_time_law

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RuinQuery:
    model: LevyModel
    params: ProcessParams
    x: float
    t: float = 0.0
    infinite: bool = False

    def __post_init__(self):
        if not self.infinite:
            if math.isinf(self.t):
                raise DomainError("use infinite=True for an infinite horizon")
            if self.t < 0:
                raise DomainError(f"t must be >= 0, got {self.t}")

    @property
    def x_eff(self) -> float:
        return self.x + self.params.c / self.params.r


REFERENCE_RULES = ("trapezoid", "rectangle")


class RuinEngine:
    """Finite-time distribution functions of the dual process, one inversion per t."""

    def __init__(self, be: BackwardExponent, grid: GridSpec):
        self.be = be
        self.grid = grid
        self._law: Dict[float, FineCDF] = {}

    def law(self, t: float) -> FineCDF:
        if t not in self._law:
            self._law[t] = finite_time_law(self.be, t, self.grid)
            logger.debug("[RUIN] inverted law of X_t at t=%g", t)
        return self._law[t]

    def cdf(self, t: float) -> np.ndarray:
        return self.law(t).on_grid()

    def survival(self, x, t: float):
        """P_x(tau_0 > t) at (effective) capital x; 0 for x <= 0."""
        x = np.asarray(x, dtype=float)
        if np.any(x > self.grid.extent + 1e-12):
            raise DomainError(f"x={float(np.max(x)):g} beyond grid extent {self.grid.extent:g}; "
                              f"increase --grid-M")
        vals = self.law(t)(x)
        vals = np.where(x <= 0, 0.0, vals)
        return float(vals) if vals.ndim == 0 else vals

    def survival_on_grid(self, t: float, rule: str = "trapezoid") -> np.ndarray:
        """Survival at {0, h, ..., M h} (value 0 at x = 0).

        rule="rectangle" replaces the fine trapezoid by a right-endpoint sum of
        the density over the spatial grid; the result is not clipped.
        """
        if rule not in REFERENCE_RULES:
            raise DomainError(f"unknown reference rule {rule!r}; use one of {REFERENCE_RULES}")
        if rule == "rectangle" and t > 0:
            dd = dual_density(self.be, t, self.grid)
            f = dd(self.grid.x)
            out = self.grid.h * (np.cumsum(f) - f[0]) + dd.atom
        else:
            out = self.cdf(t)[self.grid.x_neg_steps:].copy()
        out[0] = 0.0
        return out


def finite_time_ruin(q: RuinQuery, engine: Union[RuinEngine, GridSpec]) -> float:
    if q.infinite:
        raise DomainError("finite_time_ruin needs a finite horizon")
    if q.x_eff <= 0:
        return 1.0
    if q.t == 0:
        return 0.0
    if isinstance(engine, GridSpec):
        engine = RuinEngine(BackwardExponent(q.model, q.params.r), engine)
    return float(min(1.0, max(0.0, 1.0 - engine.survival(q.x_eff, q.t))))


def infinite_time_ruin(q: RuinQuery, wf: Optional[WFamily]) -> float:
    if q.x_eff <= 0:
        return 1.0
    if not q.model.log_moment_finite():
        return 1.0
    if wf is None:
        raise DomainError("infinite_time_ruin needs the W table for log-moment-finite models")
    if q.x_eff > wf.grid.extent + 1e-12:
        raise DomainError(f"x={q.x_eff:g} beyond grid extent {wf.grid.extent:g}")
    return float(min(1.0, max(0.0, 1.0 - wf.W(q.x_eff))))


def exp_initial_survival(model: LevyModel, r: float, beta: float, t: float = 0.0,
                         infinite: bool = False) -> float:
    """Survival with Exp(beta) initial capital: exp(-int_0^t phi(beta e^{-rs}) ds)."""
    if not beta > 0:
        raise DomainError(f"beta must be > 0, got {beta}")
    if infinite:
        be = BackwardExponent(model, r)
        if be.xi == 1:
            return 0.0
        return math.exp(-be.varphi_r(beta))
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    if t == 0:
        return 1.0
    val, _ = integrate.quad(lambda s: float(model.phi(beta * math.exp(-r * s))), 0.0, t,
                            limit=200, epsabs=1e-13, epsrel=1e-11)
    return math.exp(-val)
