"""
Fourier side of the model: the dual law of X_t, FFT inversion onto the
spatial grid, and the tables of W and its derivatives.

Conventions: characteristic functions are g(u) = E exp(-i u X), densities are
recovered as f(y) = (1/2pi) int g(u) exp(i u y) du, and
    W^(n+1)(y) = (1/2pi) int (iu)^n exp(-phi_r(iu) + i u y) du.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .backward_exponent import BackwardExponent
from .errors import AccuracyError, DomainError, UnsupportedModelError
from .levy_models import LevyModel
from .utils import interp_on_grid, is_pow2, next_pow2, write_csv

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridSpec:
    h: float = 0.2
    M: int = 125
    u_max: float = 0.0          # 0 -> adaptive
    n_freq: int = 0             # 0 -> automatic power of two
    x_neg_steps: int = 5
    u_max_cap: float = 2048.0
    n_freq_cap: int = 1 << 22
    span_factor: float = 8.0
    span_factor_heavy: float = 2048.0
    decay_tol: float = 1e-2
    cf_tol: float = 1e-10

    def __post_init__(self):
        if not self.h > 0:
            raise DomainError(f"grid step h must be > 0, got {self.h}")
        if int(self.M) != self.M or self.M < 1:
            raise DomainError(f"grid size M must be a positive integer, got {self.M}")
        if self.x_neg_steps < 0:
            raise DomainError("x_neg_steps must be >= 0")
        if self.u_max < 0:
            raise DomainError("u_max must be >= 0")
        if self.n_freq:
            if not is_pow2(self.n_freq):
                raise DomainError(f"n_freq must be a power of two, got {self.n_freq}")
            if self.n_freq < 2 * (self.M + 1):
                raise DomainError(f"n_freq must be >= 2*(M+1) = {2 * (self.M + 1)}")

    @classmethod
    def from_config(cls, cfg, **overrides) -> "GridSpec":
        kw = dict(
            h=cfg.GRID_H, M=cfg.GRID_M, u_max=cfg.UMAX, n_freq=cfg.NFREQ,
            x_neg_steps=cfg.X_NEG_STEPS, u_max_cap=cfg.UMAX_CAP, n_freq_cap=cfg.NFREQ_CAP,
            span_factor=cfg.SPAN_FACTOR, span_factor_heavy=cfg.SPAN_FACTOR_HEAVY,
            decay_tol=cfg.DECAY_TOL, cf_tol=cfg.CF_TOL,
        )
        kw.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**kw)

    @property
    def x(self) -> np.ndarray:
        """{0, h, ..., M h}"""
        return np.arange(self.M + 1) * self.h

    @property
    def x_ext(self) -> np.ndarray:
        """{-x_neg_steps h, ..., M h}"""
        return np.arange(-self.x_neg_steps, self.M + 1) * self.h

    @property
    def x_neg(self) -> float:
        return self.x_neg_steps * self.h

    @property
    def extent(self) -> float:
        return self.M * self.h


@dataclass(frozen=True)
class FFTPlan:
    u_max: float
    refine: int
    dy: float
    n: int
    y_start: float

    @property
    def du(self) -> float:
        return 2.0 * math.pi / (self.n * self.dy)

    @property
    def span(self) -> float:
        return self.n * self.dy

    def u_nodes(self) -> np.ndarray:
        return np.arange(self.n // 2 + 1) * self.du

    def y_nodes(self) -> np.ndarray:
        return self.y_start + np.arange(self.n) * self.dy


def _adaptive_u_max(cf: Callable, grid: GridSpec, order: int) -> float:
    u = 4.0
    while True:
        probe = u * np.array([0.75, 0.875, 1.0])
        size = np.max(np.abs(cf(probe)) * probe ** order)
        if size <= grid.cf_tol:
            return u
        if u >= grid.u_max_cap:
            logger.warning("[FFT] adaptive u_max hit its cap %.0f (|cf| u^%d = %.2e > %.0e)",
                           grid.u_max_cap, order, size, grid.cf_tol)
            return grid.u_max_cap
        u = min(2.0 * u, grid.u_max_cap)


def plan_fft(cf: Callable, grid: GridSpec, heavy: bool = False, order: int = 0,
             two_sided: bool = False) -> FFTPlan:
    """Pick u_max, the fine step dy = h/refine and the window length n*dy."""
    u_max = grid.u_max if grid.u_max > 0 else _adaptive_u_max(cf, grid, order)

    edge = np.max(np.abs(cf(u_max * np.array([0.9, 1.0]))))
    if edge > grid.decay_tol:
        raise AccuracyError(
            f"characteristic function has not decayed at u_max={u_max:g} (|cf|={edge:.3e} > "
            f"{grid.decay_tol:g}); increase --umax")

    refine = max(1, int(math.ceil(u_max * grid.h / math.pi)))
    dy = grid.h / refine
    covered = grid.x_neg + grid.extent
    factor = grid.span_factor_heavy if heavy else grid.span_factor
    if grid.n_freq:
        n = grid.n_freq
    else:
        n = max(next_pow2(int(math.ceil(factor * covered / dy))), next_pow2(2 * (grid.M + 1)))
        if n > grid.n_freq_cap:
            logger.warning("[FFT] window of %d nodes capped at %d (span %.1f -> %.1f)",
                           n, grid.n_freq_cap, n * dy, grid.n_freq_cap * dy)
            n = grid.n_freq_cap
    if n * dy < covered + grid.h:
        raise DomainError(f"n_freq={n} with dy={dy:.3g} does not cover the spatial grid; "
                          f"increase --nfreq")

    lead = 0
    if two_sided:
        lead = int((n * dy - covered) / (2.0 * grid.h))
    y_start = -(grid.x_neg_steps + lead) * grid.h
    plan = FFTPlan(u_max=float(u_max), refine=refine, dy=dy, n=n, y_start=y_start)
    logger.debug("[FFT] u_max=%.1f refine=%d dy=%.4g n_freq=%d span=%.1f",
                 plan.u_max, plan.refine, plan.dy, plan.n, plan.span)
    return plan


def _spectrum(cf: Callable, plan: FFTPlan, atom: float = 0.0) -> np.ndarray:
    u = plan.u_nodes()
    return (np.asarray(cf(u), dtype=complex) - atom) * np.exp(1j * u * plan.y_start)


def _to_density(spectrum: np.ndarray, plan: FFTPlan) -> np.ndarray:
    # Hermitian spectrum -> real samples on the window
    return np.fft.irfft(spectrum, plan.n) * plan.n * plan.du / (2.0 * math.pi)


def _grid_index(grid: GridSpec, plan: FFTPlan) -> np.ndarray:
    """Fine-grid indices of the points of grid.x_ext."""
    first = int(round((-grid.x_neg - plan.y_start) / plan.dy))
    return first + np.arange(grid.x_neg_steps + grid.M + 1) * plan.refine


def _cdf_from_density(dens: np.ndarray, plan: FFTPlan) -> np.ndarray:
    return integrate.cumulative_trapezoid(dens, dx=plan.dy, initial=0.0)


def monotone_violation(values: np.ndarray) -> float:
    """Largest drop of a sequence that should be nondecreasing."""
    v = np.asarray(values, dtype=float)
    return float(np.max(np.maximum.accumulate(v) - v)) if v.size else 0.0


def _finish_cdf(raw: np.ndarray, monotonize: bool) -> np.ndarray:
    if not monotonize:
        return raw
    out = np.clip(raw, 0.0, 1.0)
    return np.maximum.accumulate(out)


# ---------------------------------------------------------------------------
# Dual law of X_t (started at 0)
# ---------------------------------------------------------------------------

def dual_char_function(be: BackwardExponent, t: float, u):
    """E exp(-iu X_t) = exp(phi_r(iu e^{-rt}) - phi_r(iu)); t = inf gives exp(-phi_r(iu))."""
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    u = np.asarray(u, dtype=float)
    z = 1j * u
    if math.isinf(t):
        out = np.exp(-be.varphi_r_complex(z))
    elif t == 0:
        out = np.ones_like(z)
    else:
        out = np.exp(be.varphi_r_complex(z * math.exp(-be.r * t)) - be.varphi_r_complex(z))
    return complex(out) if np.ndim(out) == 0 else out


def dual_laplace(be: BackwardExponent, t: float, beta, x: float = 0.0):
    """E_x exp(-beta X_t) = exp(-beta x e^{-rt} + phi_r(beta e^{-rt}) - phi_r(beta))."""
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    b = np.asarray(beta, dtype=float)
    if math.isinf(t):
        out = np.exp(-be.varphi_r(b))
    else:
        d = math.exp(-be.r * t)
        out = np.exp(-b * x * d + be.varphi_r(b * d) - be.varphi_r(b))
    return float(out) if np.ndim(out) == 0 else out


def atom_at_zero(model: LevyModel, t: float) -> float:
    """P(X_t = 0) = exp(-nu(0,inf) t); zero for infinite activity."""
    mass = model.total_mass()
    if math.isinf(t):
        return 0.0
    return 0.0 if math.isinf(mass) else math.exp(-mass * t)


@dataclass(frozen=True)
class FineCDF:
    """Distribution function on the fine FFT nodes that cover grid.x_ext."""
    y: np.ndarray
    values: np.ndarray
    idx: np.ndarray          # positions of grid.x_ext in y

    def __call__(self, x):
        return interp_on_grid(x, self.y, self.values, left=0.0)

    def on_grid(self) -> np.ndarray:
        return self.values[self.idx]


def invert_to_fine_cdf(cf: Callable, grid: GridSpec, atom: float = 0.0, heavy: bool = False,
                       two_sided: bool = False, monotonize: bool = True) -> FineCDF:
    """Distribution function on the fine nodes from a characteristic function.

    `cf` is sampled on the FFT frequency nodes. A point mass `atom` at 0 is
    removed before inversion and added back afterwards. Inversion is density
    first, then cumulative trapezoid; the result is clipped to [0,1] and made
    nondecreasing unless `monotonize` is False.
    """
    cont = (lambda u: np.asarray(cf(u), dtype=complex) - atom) if atom else cf
    plan = plan_fft(cont, grid, heavy=heavy, two_sided=two_sided)
    dens = _to_density(_spectrum(cf, plan, atom=atom), plan)
    idx = _grid_index(grid, plan)
    stop = idx[-1] + 1
    y = plan.y_nodes()[:stop]
    cdf = _cdf_from_density(dens, plan)[:stop]
    if atom:
        cdf = cdf + atom * (y >= -0.5 * plan.dy)
    drop = monotone_violation(cdf)
    if drop > 1e-6:
        logger.debug("[FFT] inverted cdf non-monotone by %.2e before clean-up", drop)
    return FineCDF(y=y, values=_finish_cdf(cdf, monotonize), idx=idx)


def invert_to_cdf(cf: Callable, grid: GridSpec, atom: float = 0.0, heavy: bool = False,
                  two_sided: bool = False, monotonize: bool = True) -> np.ndarray:
    """Distribution function on grid.x_ext; see invert_to_fine_cdf."""
    return invert_to_fine_cdf(cf, grid, atom=atom, heavy=heavy, two_sided=two_sided,
                              monotonize=monotonize).on_grid()


def finite_time_law(be: BackwardExponent, t: float, grid: GridSpec, monotonize: bool = True) -> FineCDF:
    """P(X_t <= y) under the dual law from 0, on the fine nodes."""
    _require_xi0(be)
    if t == 0:
        x = grid.x_ext
        return FineCDF(y=x.copy(), values=(x >= 0).astype(float), idx=np.arange(x.size))
    p0 = atom_at_zero(be.model, t)
    return invert_to_fine_cdf(lambda u: dual_char_function(be, t, u), grid, atom=p0,
                              heavy=be.model.heavy_tailed, monotonize=monotonize)


def finite_time_cdf(be: BackwardExponent, t: float, grid: GridSpec, monotonize: bool = True) -> np.ndarray:
    """P(X_t <= x) under the dual law from 0, on grid.x_ext."""
    return finite_time_law(be, t, grid, monotonize=monotonize).on_grid()


@dataclass(frozen=True)
class DualDensity:
    """Absolutely continuous part of the law of X_t on a fine grid, plus the atom at 0."""
    y: np.ndarray
    density: np.ndarray
    atom: float

    def __call__(self, y):
        return np.interp(np.asarray(y, dtype=float), self.y, self.density, left=0.0, right=0.0)


def dual_density(be: BackwardExponent, t: float, grid: GridSpec) -> DualDensity:
    _require_xi0(be)
    if t <= 0:
        return DualDensity(y=grid.x_ext.copy(), density=np.zeros_like(grid.x_ext), atom=1.0)
    p0 = atom_at_zero(be.model, t)
    cf = lambda u: dual_char_function(be, t, u)
    plan = plan_fft(lambda u: np.asarray(cf(u)) - p0, grid, heavy=be.model.heavy_tailed)
    dens = _to_density(_spectrum(cf, plan, atom=p0), plan)
    idx = _grid_index(grid, plan)
    stop = idx[-1] + 1
    return DualDensity(y=plan.y_nodes()[:stop], density=dens[:stop], atom=p0)


# ---------------------------------------------------------------------------
# W and its derivatives
# ---------------------------------------------------------------------------

@dataclass
class WFamily:
    grid: GridSpec
    plan: FFTPlan
    x: np.ndarray            # grid.x_ext
    w: np.ndarray            # W on x
    w_derivs: np.ndarray     # row n: W^(n+1) on x
    fine_x: np.ndarray
    fine_w: np.ndarray
    fine_derivs: np.ndarray
    model: LevyModel
    r: float
    be: Optional[BackwardExponent] = field(default=None, repr=False)

    @property
    def n_max(self) -> int:
        return self.w_derivs.shape[0] - 1

    def W(self, x):
        """W with W = 0 below 0, linear interpolation in between nodes."""
        x = np.asarray(x, dtype=float)
        out = interp_on_grid(x, self.fine_x, self.fine_w, left=0.0)
        out = np.where(x < 0, 0.0, out)
        return float(out) if out.ndim == 0 else out

    def deriv(self, order: int, x):
        """W^(order); order 0 is W itself."""
        if order == 0:
            return self.W(x)
        if order - 1 > self.n_max:
            raise DomainError(f"W^({order}) not tabulated (max order {self.n_max + 1})")
        x = np.asarray(x, dtype=float)
        out = np.interp(x, self.fine_x, self.fine_derivs[order - 1], left=0.0, right=0.0)
        return float(out) if out.ndim == 0 else out

    def on_grid(self, order: int) -> np.ndarray:
        """W^(order) on the spatial grid {0, ..., M h}."""
        k = self.grid.x_neg_steps
        return (self.w if order == 0 else self.w_derivs[order - 1])[k:]

    def to_csv(self, path: Optional[str] = None, comments=()) -> str:
        k = self.grid.x_neg_steps
        header = ["x", "W"] + [f"W{n + 1}" for n in range(self.n_max + 1)]
        cols = [self.x[k:], self.w[k:]] + [row[k:] for row in self.w_derivs]
        rows = zip(*[c.tolist() for c in cols])
        return write_csv(path, header, rows, comments=comments)


def _require_xi0(be: BackwardExponent):
    if be.xi == 1:
        raise UnsupportedModelError(
            f"{be.model.family}: infinite log-moment, W is not a distribution function (xi = 1)")


def w_derivatives(be: BackwardExponent, grid: GridSpec, n_max: int = 0) -> WFamily:
    """Tabulate W and W^(n+1), n = 0..n_max, by inverting (iu)^n exp(-phi_r(iu))."""
    _require_xi0(be)
    if n_max < 0:
        raise DomainError(f"n_max must be >= 0, got {n_max}")
    if not be.derivative_order_ok(n_max):
        raise UnsupportedModelError(
            f"W^({n_max + 1}) needs nu(0,inf)/r > {n_max + 1}; "
            f"got {be.model.total_mass() / be.r:g} for {be.model.family}")

    cf = lambda u: dual_char_function(be, math.inf, u)
    plan = plan_fft(cf, grid, heavy=be.model.heavy_tailed, order=n_max)
    base = _spectrum(cf, plan)
    iu = 1j * plan.u_nodes()

    idx = _grid_index(grid, plan)
    stop = idx[-1] + 1
    fine_derivs = np.empty((n_max + 1, stop))
    spec = base
    for n in range(n_max + 1):
        if n:
            spec = spec * iu
        fine_derivs[n] = _to_density(spec, plan)[:stop]

    fine_w = _finish_cdf(_cdf_from_density(fine_derivs[0], plan), True)
    wf = WFamily(
        grid=grid, plan=plan, x=grid.x_ext, w=fine_w[idx], w_derivs=fine_derivs[:, idx],
        fine_x=plan.y_nodes()[:stop], fine_w=fine_w, fine_derivs=fine_derivs,
        model=be.model, r=be.r, be=be,
    )
    logger.info("[FFT] %s r=%g: W and %d derivative(s), u_max=%.0f n_freq=%d W(Mh)=%.6f",
                be.model.family, be.r, n_max + 1, plan.u_max, plan.n, wf.w[-1])
    for n in range(1, n_max + 1):
        k = sign_changes(wf, n)
        if k > n:
            logger.debug("[FFT] W^(%d) shows %d sign changes (expected %d)", n + 1, k, n)
    return wf


def sign_changes(wf: WFamily, n: int, rel_floor: float = 1e-8) -> int:
    """Sign changes of W^(n+1) on (0, M h]; values below rel_floor * max are ignored."""
    if n < 0 or n > wf.n_max:
        raise DomainError(f"derivative W^({n + 1}) not tabulated")
    vals = wf.on_grid(n + 1)[1:]
    floor = rel_floor * float(np.max(np.abs(vals))) if vals.size else 0.0
    signs = np.sign(vals[np.abs(vals) > floor])
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def esscher_tilt_density(wf: WFamily, gamma: float, varphi_r_gamma: float) -> np.ndarray:
    """W'(x; gamma) = exp(varphi_r(gamma) - gamma x) W'(x) on wf.x (0 below 0)."""
    if gamma < 0:
        raise DomainError(f"gamma must be >= 0, got {gamma}")
    w1 = wf.w_derivs[0]
    return np.where(wf.x >= 0, np.exp(varphi_r_gamma - gamma * wf.x) * w1, 0.0)


def numeric_laplace(x: np.ndarray, values: np.ndarray, beta: float) -> float:
    """int exp(-beta x) f(x) dx over x >= 0 by Simpson's rule."""
    mask = x >= 0
    return float(integrate.simpson(np.exp(-beta * x[mask]) * values[mask], x=x[mask]))
