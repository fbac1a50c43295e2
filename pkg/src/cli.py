"""
Command-line front end.

    python ou_ruin.py <command> [flags]

Every command writes CSV (to --out or stdout) headed by a provenance line.
Exit codes: 0 ok, 1 invalid input, 2 unsupported regime, 3 accuracy failure.
"""
import argparse
import logging
import math
import sys
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

from . import analytic_oracles as oracles
from . import mc_oracle
from .backward_exponent import BackwardExponent
from .config import Config, csv_floats, csv_ints, load_config, parse_count, parse_number
from .errors import DomainError, OuRuinError, SpecError
from .levy_models import (
    Esscher,
    ExponentialJumps,
    LevyModel,
    Linnik,
    ProcessParams,
    Stable,
    default_truncated_stable,
    load_model,
)
from .ruin import REFERENCE_RULES, RuinEngine, RuinQuery, finite_time_ruin, infinite_time_ruin
from .scale_exit import exit_upward_lt, fractional_integral_W
from .special_functions import SeriesControl
from .spectral import MU_RULES, build_series, survival_curve, truncation_error_table
from .transform_engine import GridSpec, w_derivatives
from .utils import provenance_line, setup_logging, write_csv

logger = logging.getLogger(__name__)

COMMANDS = ("ruin", "survival-series", "table1", "figure1", "scale", "exit", "oracle", "mc", "w-family")
FIGURE_N_DEFAULT = [0, 1, 3, 6]
FIGURE_T_DEFAULT = 7.0


@dataclass
class RunSpec:
    command: str
    model: LevyModel
    params: ProcessParams
    grid: GridSpec
    series: SeriesControl
    sim: mc_oracle.SimConfig
    out: Optional[str] = None
    x: List[float] = field(default_factory=list)
    t: List[float] = field(default_factory=list)
    N: List[int] = field(default_factory=list)
    q: float = 0.0
    a: Optional[float] = None
    force_below_talpha: bool = False
    what: str = "ruin"
    dump: Optional[str] = None
    mu_rule: str = "expansion"
    reference: str = "trapezoid"

    def header(self) -> str:
        return provenance_line(self.command, self.model.family, self.sim.seed)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def _number(text: str) -> float:
    try:
        v = parse_number(text)
    except ValueError:
        v = math.nan
    if math.isnan(v):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    return v


def _count(text: str) -> int:
    try:
        return parse_count(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a whole number: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", help="model spec JSON file")
    common.add_argument("--r", type=_number, default=0.2)
    common.add_argument("--c", type=_number, default=0.0)
    common.add_argument("--x", help="initial capital(s), comma or semicolon separated")
    common.add_argument("--t", help="time(s); 'inf' for the infinite horizon")
    common.add_argument("--t-values", dest="t_values", help="alias of --t for table/series commands")
    common.add_argument("--q", type=_number, default=0.0)
    common.add_argument("--a", type=_number)
    common.add_argument("--N", help="series order(s)")
    common.add_argument("--grid-h", dest="grid_h", type=_number)
    common.add_argument("--grid-M", dest="grid_M", type=_count)
    common.add_argument("--umax", type=_number)
    common.add_argument("--nfreq", type=_count)
    common.add_argument("--paths", type=_count)
    common.add_argument("--seed", type=_count)
    common.add_argument("--out")
    common.add_argument("--force-below-talpha", dest="force_below_talpha", action="store_true")

    p = argparse.ArgumentParser(prog="ou_ruin", description="Absolute ruin for OU-type risk processes")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "mc":
            sp.add_argument("--what", choices=("ruin", "exit", "dual"), default="ruin")
            sp.add_argument("--dump", help="write the per-path event log here")
        if name == "table1":
            sp.add_argument("--mu-rule", dest="mu_rule", choices=MU_RULES, default="expansion",
                            help="series coefficients; 'moments' uses E[X_inf^n]/n!")
            sp.add_argument("--reference", choices=REFERENCE_RULES, default="trapezoid",
                            help="quadrature of the reference distribution function")
    return p


def _floats(text: Optional[str], default: Sequence[float]) -> List[float]:
    if text is None:
        return list(default)
    vals = csv_floats(text, [])
    if not vals:
        raise SpecError(f"cannot parse numbers from {text!r}")
    return vals


def build_spec(ns: argparse.Namespace, cfg: Config) -> RunSpec:
    model = load_model(ns.model) if ns.model else default_truncated_stable()
    grid = GridSpec.from_config(cfg, h=ns.grid_h, M=ns.grid_M, u_max=ns.umax, n_freq=ns.nfreq)
    series = SeriesControl(cfg.SERIES_MAX_TERMS, cfg.SERIES_ABS_TOL, cfg.SERIES_REL_TOL)
    sim = mc_oracle.SimConfig.from_config(cfg, n_paths=ns.paths, seed=ns.seed)

    t_text = ns.t if ns.t is not None else ns.t_values
    if ns.command == "table1":
        t_default = cfg.TABLE_T
    elif ns.command == "figure1":
        t_default = [FIGURE_T_DEFAULT]
    else:
        t_default = [math.inf] if ns.command == "ruin" else [1.0]
    if ns.N is None:
        n_default = {"table1": cfg.TABLE_N, "figure1": FIGURE_N_DEFAULT}.get(ns.command, [0])
        N = list(n_default)
    else:
        N = csv_ints(ns.N, [])
        if not N or min(N) < 0:
            raise SpecError(f"bad --N {ns.N!r}")

    return RunSpec(
        command=ns.command, model=model, params=ProcessParams(ns.r, ns.c), grid=grid,
        series=series, sim=sim, out=ns.out,
        x=_floats(ns.x, [1.0]), t=_floats(t_text, t_default), N=N,
        q=ns.q, a=ns.a, force_below_talpha=ns.force_below_talpha,
        what=getattr(ns, "what", "ruin"), dump=getattr(ns, "dump", None),
        mu_rule=getattr(ns, "mu_rule", "expansion"), reference=getattr(ns, "reference", "trapezoid"),
    )


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _emit(spec: RunSpec, header: Sequence[str], rows) -> str:
    text = write_csv(spec.out, header, rows, comments=[spec.header()])
    if not spec.out:
        sys.stdout.write(text)
    return text


def _be(spec: RunSpec) -> BackwardExponent:
    return BackwardExponent(spec.model, spec.params.r)


def cmd_ruin(spec: RunSpec) -> str:
    rows = []
    engine = None
    wf = None
    for t in spec.t:
        for x in spec.x:
            if math.isinf(t):
                q = RuinQuery(spec.model, spec.params, x, infinite=True)
                if wf is None and q.x_eff > 0 and spec.model.log_moment_finite():
                    wf = w_derivatives(_be(spec), spec.grid)
                val = infinite_time_ruin(q, wf)
            else:
                q = RuinQuery(spec.model, spec.params, x, t=t)
                if engine is None and q.x_eff > 0 and t > 0:
                    engine = RuinEngine(_be(spec), spec.grid)
                val = finite_time_ruin(q, engine or spec.grid)
            rows.append((float(x), float(t), float(val)))
    return _emit(spec, ["x", "t", "ruin_probability"], rows)


def cmd_survival_series(spec: RunSpec) -> str:
    n_top = max(spec.N)
    s = build_series(_be(spec), n_top, spec.grid)
    rows = []
    for N in spec.N:
        curve = survival_curve(s, spec.t, N, force=spec.force_below_talpha)
        for j, t in enumerate(spec.t):
            for x, v in zip(spec.grid.x.tolist(), curve[j].tolist()):
                rows.append((N, float(t), x, v))
    return _emit(spec, ["N", "t", "x", "partial_sum_raw"], rows)


def run_table1(spec: RunSpec):
    be = _be(spec)
    s = build_series(be, max(spec.N), spec.grid, mu_rule=spec.mu_rule)
    engine = RuinEngine(be, spec.grid)
    logger.info("[TABLE1] t_alpha=%.4f, N=%s, t=%s, mu=%s, reference=%s",
                s.t_alpha, spec.N, spec.t, spec.mu_rule, spec.reference)
    return truncation_error_table(s, lambda t: engine.survival_on_grid(t, spec.reference), spec.N, spec.t)


def cmd_table1(spec: RunSpec) -> str:
    report = run_table1(spec)
    text = report.to_csv(spec.out, comments=[spec.header()])
    if not spec.out:
        sys.stdout.write(text)
    sys.stderr.write(report.to_text() + "\n")
    return text


def cmd_figure1(spec: RunSpec) -> str:
    if len(spec.t) != 1:
        raise SpecError("figure1 takes a single --t")
    t = spec.t[0]
    be = _be(spec)
    s = build_series(be, max(spec.N), spec.grid)
    xs = spec.grid.x.tolist()
    rows = []
    for N in spec.N:
        curve = survival_curve(s, [t], N, force=spec.force_below_talpha)[0]
        rows.extend((str(N), x, v) for x, v in zip(xs, curve.tolist()))
    ref = RuinEngine(be, spec.grid).survival_on_grid(t)
    rows.extend(("inf", x, v) for x, v in zip(xs, ref.tolist()))
    return _emit(spec, ["N", "x", "value"], rows)


def cmd_scale(spec: RunSpec) -> str:
    if spec.q < 0:
        raise DomainError(f"q must be >= 0, got {spec.q}")
    wf = w_derivatives(_be(spec), spec.grid)
    sf = fractional_integral_W(wf, spec.q / spec.params.r)
    text = sf.to_csv(spec.out, comments=[spec.header()])
    if not spec.out:
        sys.stdout.write(text)
    return text


def cmd_exit(spec: RunSpec) -> str:
    if spec.a is None:
        raise SpecError("exit needs --a")
    wf = w_derivatives(_be(spec), spec.grid)
    sf = fractional_integral_W(wf, spec.q / spec.params.r)
    rows = [(float(x), float(spec.a), float(spec.q), exit_upward_lt(spec.q, x, spec.a, sf))
            for x in spec.x]
    return _emit(spec, ["x", "a", "q", "value"], rows)


def _oracle_value(model: LevyModel, r: float, x: float, t: float, series: SeriesControl):
    if isinstance(model, ExponentialJumps):
        return oracles.exp_case_survival(model.eta, model.delta, r, x, t), ""
    if isinstance(model, Linnik):
        if math.isinf(t):
            raise DomainError("linnik oracle needs a finite t")
        res = oracles.linnik_survival_series(model.eta, model.delta, model.alpha, r, x, t, ctl=series)
        return res.value, f"terms={res.series_terms_used} bound={res.truncation_bound:.2e}"
    if isinstance(model, Stable):
        return oracles.stable_survival(model.alpha, r, x, t), ""
    if isinstance(model, Esscher) and isinstance(model.base, Stable) and math.isinf(t):
        return oracles.tempered_stable_survival(model.base.alpha, r, model.gamma, x), ""
    raise DomainError(f"no closed form for {model.family} at t={t:g}")


def cmd_oracle(spec: RunSpec) -> str:
    rows = []
    for t in spec.t:
        for x in spec.x:
            v, note = _oracle_value(spec.model, spec.params.r, x, t, spec.series)
            rows.append((float(x), float(t), float(v), note))
    return _emit(spec, ["x", "t", "survival", "note"], rows)


def cmd_mc(spec: RunSpec) -> str:
    r, c = spec.params.r, spec.params.c
    rows = []
    if spec.what == "exit":
        if spec.a is None:
            raise SpecError("mc --what exit needs --a")
        for x in spec.x:
            est = mc_oracle.estimate_exit_upward(spec.model, r, x, spec.a, spec.q, spec.sim, c=c)
            rows.append((float(x), float(spec.a), est.mean, est.std_error, est.n_effective))
        header = ["x", "a", "mean", "std_error", "n_effective"]
    elif spec.what == "dual":
        for t in spec.t:
            d = mc_oracle.sample_dual_integral(spec.model, r, t, spec.sim)
            for x in spec.x:
                hit = (d > x).astype(float)
                p = float(hit.mean())
                rows.append((float(x), float(t), p, math.sqrt(p * (1 - p) / d.size), d.size))
        header = ["x", "t", "mean", "std_error", "n_effective"]
    else:
        for t in spec.t:
            for x in spec.x:
                est = mc_oracle.estimate_finite_time_ruin(spec.model, r, c, x, t, spec.sim)
                rows.append((float(x), float(t), est.mean, est.std_error, est.n_effective))
        header = ["x", "t", "mean", "std_error", "n_effective"]
    if spec.dump:
        mc_oracle.dump_paths(spec.model, r, c, spec.x[0], spec.sim, path=spec.dump,
                             comments=[spec.header()])
    return _emit(spec, header, rows)


def cmd_w_family(spec: RunSpec) -> str:
    wf = w_derivatives(_be(spec), spec.grid, max(spec.N))
    text = wf.to_csv(spec.out, comments=[spec.header()])
    if not spec.out:
        sys.stdout.write(text)
    return text


HANDLERS = {
    "ruin": cmd_ruin,
    "survival-series": cmd_survival_series,
    "table1": cmd_table1,
    "figure1": cmd_figure1,
    "scale": cmd_scale,
    "exit": cmd_exit,
    "oracle": cmd_oracle,
    "mc": cmd_mc,
    "w-family": cmd_w_family,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    cfg = load_config()
    setup_logging(cfg.LOG_LEVEL)
    try:
        ns = build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0) and 1
    try:
        spec = build_spec(ns, cfg)
        HANDLERS[spec.command](spec)
    except OuRuinError as e:
        print(f"[ERROR] {e}", file=sys.stderr)
        return e.exit_code
    return 0
