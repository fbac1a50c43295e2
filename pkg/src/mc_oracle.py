"""
Monte Carlo for the risk process dX = (r X + c) dt - dZ.

Between claims the surplus follows the exact flow
    y(s) = (y0 + c/r) e^{r s} - c/r,
so ruin (X < -c/r) can only happen at claim instants unless small jumps are
replaced by a compensating drift. Paths are simulated chunk by chunk, all
paths of a chunk advancing one claim at a time; chunk k draws from its own
Philox stream spawned from the seed, so results depend only on
(seed, n_paths, chunk).
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy import integrate, optimize, special

from .errors import DomainError, SpecError
from .levy_models import (
    Custom,
    Esscher,
    ExponentialJumps,
    LevyModel,
    Linnik,
    Stable,
    TruncatedStable,
)
from .utils import write_csv

logger = logging.getLogger(__name__)

EVENT_JUMP, EVENT_RUIN, EVENT_HORIZON = "jump", "ruin", "horizon"
UNRESOLVED_WARN = 0.01


@dataclass(frozen=True)
class SimConfig:
    n_paths: int = 100_000
    horizon: float = 200.0
    seed: int = 20240611
    small_jump_cutoff: float = 1e-4
    drift_compensation: bool = True
    chunk: int = 4096

    def __post_init__(self):
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise DomainError(f"n_paths must be a positive integer, got {self.n_paths}")
        if not self.horizon > 0:
            raise DomainError(f"horizon must be > 0, got {self.horizon}")
        if not self.small_jump_cutoff > 0:
            raise DomainError(f"small_jump_cutoff must be > 0, got {self.small_jump_cutoff}")
        if not (0 <= self.seed < 2 ** 64):
            raise DomainError("seed must be a 64-bit unsigned integer")
        if self.chunk < 1:
            raise DomainError("chunk must be >= 1")

    @classmethod
    def from_config(cls, cfg, **overrides) -> "SimConfig":
        kw = dict(n_paths=cfg.MC_PATHS, horizon=cfg.MC_HORIZON, seed=cfg.MC_SEED,
                  small_jump_cutoff=cfg.MC_CUTOFF, drift_compensation=cfg.MC_DRIFT_COMP,
                  chunk=cfg.MC_CHUNK)
        kw.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**kw)


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    std_error: float
    n_effective: int
    unresolved_mass: float = 0.0
    warnings: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.std_error < 0:
            raise DomainError("std_error must be >= 0")

    def within(self, value: float, n_se: float = 3.0) -> bool:
        return abs(self.mean - value) <= n_se * self.std_error + 1e-15


# ---------------------------------------------------------------------------
# Claim samplers
# ---------------------------------------------------------------------------

@dataclass
class JumpSampler:
    """Claims above the cutoff: Poisson rate `rate`, sizes from `draw`; `drift` replaces the rest."""
    rate: float
    drift: float
    draw: object
    cutoff: float = 0.0

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if n == 0:
            return np.zeros(0)
        return self.draw(rng, n)


def _small_jump_mean(model: LevyModel, eps: float) -> float:
    """int_0^eps y nu(dy) = int_0^eps (tail(y) - tail(eps)) dy."""
    if isinstance(model, Stable):
        k = model.scale / special.gamma(1.0 - model.alpha)
        return k * model.alpha * eps ** (1.0 - model.alpha) / (1.0 - model.alpha)
    if isinstance(model, TruncatedStable) and eps < model.A:
        return model.C * model.alpha * eps ** (1.0 - model.alpha) / (1.0 - model.alpha)
    body, _ = integrate.quad(lambda y: float(model.tail(y)), 0.0, eps, limit=200)
    return max(0.0, body - eps * float(model.tail(eps)))


def _ml_draw(alpha: float, delta: float):
    scale = delta ** (-1.0 / alpha)
    if alpha == 1.0:
        return lambda rng, n: rng.exponential(scale, n)

    def draw(rng, n):
        u = rng.random(n)
        v = 1.0 - rng.random(n)            # (0, 1]
        # sin(a pi)/tan(a pi v) - cos(a pi) = sin(a pi (1 - v)) / sin(a pi v)
        ratio = np.sin(alpha * math.pi * (1.0 - v)) / np.sin(alpha * math.pi * v)
        return -scale * np.log1p(-u) * ratio ** (1.0 / alpha)
    return draw


def _pareto_draw(eps: float, alpha: float, cap: float = math.inf):
    def draw(rng, n):
        u = 1.0 - rng.random(n)            # (0, 1]
        return np.minimum(eps * u ** (-1.0 / alpha), cap)
    return draw


def _inverse_tail_draw(model: LevyModel, lo: float, rate: float):
    tail = lambda y: float(model.tail(y))

    def one(target):
        hi = max(2.0 * lo, 1.0)
        while tail(hi) > target:
            hi *= 2.0
            if hi > 1e12:
                return hi
        a = lo if lo > 0 else 1e-300
        if tail(a) <= target:
            return a
        return optimize.brentq(lambda y: tail(y) - target, a, hi, xtol=1e-12)

    def draw(rng, n):
        u = 1.0 - rng.random(n)
        return np.array([one(v * rate) for v in u])
    return draw


def jump_sampler(model: LevyModel, cfg: SimConfig) -> JumpSampler:
    eps = cfg.small_jump_cutoff
    mass = model.total_mass()
    if math.isfinite(mass):
        eps = 0.0
    drift = _small_jump_mean(model, eps) if (eps > 0 and cfg.drift_compensation) else 0.0

    if isinstance(model, ExponentialJumps):
        return JumpSampler(model.eta, 0.0, lambda rng, n: rng.exponential(1.0 / model.delta, n))
    if isinstance(model, Linnik):
        return JumpSampler(model.eta, 0.0, _ml_draw(model.alpha, model.delta))
    if isinstance(model, Stable):
        rate = float(model.tail(eps))
        return JumpSampler(rate, drift, _pareto_draw(eps, model.alpha), eps)
    if isinstance(model, TruncatedStable):
        if eps >= model.A:
            return JumpSampler(0.0, drift, lambda rng, n: np.zeros(n), eps)
        rate = model.C * eps ** (-model.alpha)
        return JumpSampler(rate, drift, _pareto_draw(eps, model.alpha, model.A), eps)
    if isinstance(model, Esscher):
        # P(J > y) = e^{-g (y - eps)} tail_b(y) / tail_b(eps): min of a base claim and eps + Exp(g)
        base = jump_sampler(model.base, cfg)
        g = model.gamma
        lo = base.cutoff
        rate = base.rate * math.exp(-g * lo)
        if g == 0:
            return JumpSampler(rate, drift, base.draw, lo)

        def draw(rng, n):
            return np.minimum(base.sample(rng, n), lo + rng.exponential(1.0 / g, n))
        return JumpSampler(rate, drift, draw, lo)
    if isinstance(model, Custom):
        rate = mass if math.isfinite(mass) else float(model.tail(eps))
        if not math.isfinite(rate):
            raise SpecError(f"model '{model.family}' has infinite tail mass at cutoff {eps:g}")
        if rate == 0:
            return JumpSampler(0.0, drift, lambda rng, n: np.zeros(n), eps)
        return JumpSampler(rate, drift, _inverse_tail_draw(model, eps, rate), eps)
    raise SpecError(f"no claim sampler for family '{model.family}'")


# ---------------------------------------------------------------------------
# Path engine
# ---------------------------------------------------------------------------

def _flow(y0, s, k: float, r: float):
    return (y0 + k / r) * np.exp(r * s) - k / r


def _time_to(y0, level: float, k: float, r: float) -> np.ndarray:
    """First s >= 0 with flow(y0, s) = level, inf if the flow never gets there."""
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = (level + k / r) / (y0 + k / r)
        s = np.where((ratio >= 1.0) & np.isfinite(ratio), np.log(np.maximum(ratio, 1.0)) / r, np.inf)
    return s


@dataclass
class _Chunk:
    ruin_time: np.ndarray
    hit_time: np.ndarray
    final: np.ndarray
    events: List[tuple] = field(default_factory=list)


def _run_chunk(sampler: JumpSampler, r: float, c: float, x: float, horizon: float, n: int,
               rng: np.random.Generator, upper: Optional[float] = None,
               record: bool = False) -> _Chunk:
    k = c - sampler.drift
    barrier = -c / r
    t = np.zeros(n)
    y = np.full(n, float(x))
    ruin = np.full(n, np.inf)
    hit = np.full(n, np.inf)
    alive = np.ones(n, dtype=bool)
    events: List[tuple] = []
    if x + c / r <= 0:
        ruin[:] = 0.0
        alive[:] = False
    elif upper is not None and x >= upper:
        hit[:] = 0.0
        alive[:] = False

    while alive.any():
        idx = np.nonzero(alive)[0]
        m = idx.size
        wait = rng.exponential(1.0 / sampler.rate, m) if sampler.rate > 0 else np.full(m, np.inf)
        t0, y0 = t[idx], y[idx]
        t_next = t0 + wait
        s_end = np.minimum(t_next, horizon) - t0

        s_hit = _time_to(y0, upper, k, r) if upper is not None else np.full(m, np.inf)
        s_low = _time_to(y0, barrier, k, r) if k < c else np.full(m, np.inf)

        up = (s_hit <= s_end) & (s_hit <= s_low)
        down = ~up & (s_low <= s_end)
        stop = ~up & ~down & (t_next > horizon)
        jump = ~up & ~down & ~stop

        if upper is not None:
            hit[idx[up]] = t0[up] + s_hit[up]
            y[idx[up]] = upper
        ruin[idx[down]] = t0[down] + s_low[down]
        y[idx[down]] = barrier
        y[idx[stop]] = _flow(y0[stop], s_end[stop], k, r)
        t[idx[stop]] = horizon
        if record:
            for j in np.nonzero(down)[0]:
                events.append((int(idx[j]), float(ruin[idx[j]]), EVENT_RUIN, float(barrier)))
            for j in np.nonzero(stop)[0]:
                events.append((int(idx[j]), float(horizon), EVENT_HORIZON, float(y[idx[j]])))

        jj = np.nonzero(jump)[0]
        if jj.size:
            sizes = sampler.sample(rng, jj.size)
            after = _flow(y0[jj], wait[jj], k, r) - sizes
            gi = idx[jj]
            t[gi] = t_next[jj]
            y[gi] = after
            ruined = after < barrier
            ruin[gi[ruined]] = t_next[jj][ruined]
            if record:
                for p, tt, v, dead in zip(gi, t_next[jj], after, ruined):
                    events.append((int(p), float(tt), EVENT_JUMP, float(v)))
                    if dead:
                        events.append((int(p), float(tt), EVENT_RUIN, float(v)))
            alive[gi[ruined]] = False
        alive[idx[up | down | stop]] = False

    # ruin is absorbing: a ruined path never reaches the upper level afterwards
    if np.any(np.isfinite(ruin) & np.isfinite(hit)):
        raise RuntimeError("path recorded both ruin and an upward passage")
    return _Chunk(ruin_time=ruin, hit_time=hit, final=y, events=events)


def _streams(cfg: SimConfig):
    """(chunk index, size, generator) for each chunk of cfg.n_paths."""
    n_chunks = -(-cfg.n_paths // cfg.chunk)
    seeds = np.random.SeedSequence(cfg.seed).spawn(n_chunks)
    for i, ss in enumerate(seeds):
        size = min(cfg.chunk, cfg.n_paths - i * cfg.chunk)
        yield i, n_chunks, size, np.random.Generator(np.random.Philox(ss))


def _collect(model: LevyModel, r: float, c: float, x: float, horizon: float, cfg: SimConfig,
             upper: Optional[float] = None) -> _Chunk:
    sampler = jump_sampler(model, cfg)
    parts = []
    for i, n_chunks, size, rng in _streams(cfg):
        parts.append(_run_chunk(sampler, r, c, x, horizon, size, rng, upper=upper))
        logger.debug("[MC] chunk %d/%d done", i + 1, n_chunks)
    return _Chunk(ruin_time=np.concatenate([p.ruin_time for p in parts]),
                  hit_time=np.concatenate([p.hit_time for p in parts]),
                  final=np.concatenate([p.final for p in parts]))


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

@dataclass
class RiskPath:
    jump_times: np.ndarray
    jump_sizes: np.ndarray
    ruin_time: Optional[float]
    final_surplus: float
    horizon: float


def simulate_risk_path(model: LevyModel, r: float, c: float, x: float, cfg: SimConfig) -> RiskPath:
    """First path of the seeded stream, with its claim record."""
    if not r > 0:
        raise DomainError(f"r must be > 0, got {r}")
    sampler = jump_sampler(model, cfg)
    _, _, _, rng = next(_streams(SimConfig(n_paths=1, horizon=cfg.horizon, seed=cfg.seed,
                                           small_jump_cutoff=cfg.small_jump_cutoff,
                                           drift_compensation=cfg.drift_compensation)))
    out = _run_chunk(sampler, r, c, x, cfg.horizon, 1, rng, record=True)
    jumps = [(e[1], e[3]) for e in out.events if e[2] == EVENT_JUMP]
    k = c - sampler.drift
    times = np.array([j[0] for j in jumps])
    sizes = []
    prev_t, prev_y = 0.0, float(x)
    for tt, after in jumps:
        sizes.append(float(_flow(prev_y, tt - prev_t, k, r)) - after)
        prev_t, prev_y = tt, after
    rt = float(out.ruin_time[0])
    return RiskPath(jump_times=times, jump_sizes=np.array(sizes),
                    ruin_time=rt if math.isfinite(rt) else None,
                    final_surplus=float(out.final[0]), horizon=cfg.horizon)


def _binomial(hits: np.ndarray) -> MCEstimate:
    n = hits.size
    p = float(np.mean(hits))
    return MCEstimate(mean=p, std_error=math.sqrt(max(p * (1.0 - p), 0.0) / n), n_effective=n)


def estimate_finite_time_ruin(model: LevyModel, r: float, c: float, x: float, t: float,
                              cfg: SimConfig) -> MCEstimate:
    if t < 0 or math.isinf(t):
        raise DomainError(f"t must be finite and >= 0, got {t}")
    if x + c / r <= 0:
        return MCEstimate(1.0, 0.0, cfg.n_paths)
    if t == 0:
        return MCEstimate(0.0, 0.0, cfg.n_paths)
    res = _collect(model, r, c, x, t, cfg)
    est = _binomial(res.ruin_time <= t)
    logger.info("[MC] ruin by t=%g: %.5f +/- %.5f (%d paths)", t, est.mean, est.std_error, est.n_effective)
    return est


def sample_dual_integral(model: LevyModel, r: float, t: float, cfg: SimConfig) -> np.ndarray:
    """Samples of sum_{T_i <= t} e^{-r T_i} J_i (plus the discounted compensating drift)."""
    if t < 0 or math.isinf(t):
        raise DomainError(f"t must be finite and >= 0, got {t}")
    if t == 0:
        return np.zeros(cfg.n_paths)
    sampler = jump_sampler(model, cfg)
    shift = sampler.drift * -math.expm1(-r * t) / r
    out = []
    for i, n_chunks, size, rng in _streams(cfg):
        counts = rng.poisson(sampler.rate * t, size) if sampler.rate > 0 else np.zeros(size, dtype=int)
        total = int(counts.sum())
        times = rng.uniform(0.0, t, total)
        sizes = sampler.sample(rng, total)
        owner = np.repeat(np.arange(size), counts)
        out.append(np.bincount(owner, weights=np.exp(-r * times) * sizes, minlength=size) + shift)
        logger.debug("[MC] chunk %d/%d done", i + 1, n_chunks)
    return np.concatenate(out)


def estimate_exit_upward(model: LevyModel, r: float, x: float, a: float, q: float,
                         cfg: SimConfig, c: float = 0.0) -> MCEstimate:
    """Mean of exp(-q tau_a+) over paths reaching a before ruin and the horizon."""
    if not (0 <= x <= a):
        raise DomainError(f"need 0 <= x <= a (got x={x}, a={a})")
    if q < 0:
        raise DomainError(f"q must be >= 0, got {q}")
    if x == a:
        return MCEstimate(1.0, 0.0, cfg.n_paths)
    res = _collect(model, r, c, x, cfg.horizon, cfg, upper=a)
    reached = np.isfinite(res.hit_time)
    vals = np.where(reached, np.exp(-q * np.where(reached, res.hit_time, 0.0)), 0.0)
    n = vals.size
    unresolved = float(np.mean(~reached & ~np.isfinite(res.ruin_time)))
    se = float(np.std(vals, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    warns: Tuple[str, ...] = ()
    if unresolved > UNRESOLVED_WARN:
        msg = (f"unresolved mass {unresolved:.3%} at horizon {cfg.horizon:g}; "
               f"standard error widened")
        logger.warning("[MC] %s", msg)
        se += unresolved * math.exp(-q * cfg.horizon)
        warns = (msg,)
    est = MCEstimate(mean=float(np.mean(vals)), std_error=se, n_effective=n,
                     unresolved_mass=unresolved, warnings=warns)
    logger.info("[MC] exit x=%g a=%g q=%g: %.5f +/- %.5f", x, a, q, est.mean, est.std_error)
    return est


def dump_paths(model: LevyModel, r: float, c: float, x: float, cfg: SimConfig,
               path: Optional[str] = None, comments=()) -> str:
    """Event log of the first cfg.n_paths paths: path_id, event_time, event_type, surplus_after."""
    sampler = jump_sampler(model, cfg)
    rows = []
    for i, n_chunks, size, rng in _streams(cfg):
        out = _run_chunk(sampler, r, c, x, cfg.horizon, size, rng, record=True)
        base = i * cfg.chunk
        rows.extend((base + p, tt, kind, v) for p, tt, kind, v in out.events)
    rows.sort(key=lambda e: (e[0], e[1], e[2] != EVENT_JUMP))
    return write_csv(path, ["path_id", "event_time", "event_type", "surplus_after"], rows,
                     comments=comments)
