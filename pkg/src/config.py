import logging
import math
import os
from dataclasses import dataclass, field
from typing import Callable, List, Optional, TypeVar

from dotenv import load_dotenv

logger = logging.getLogger(__name__)

T = TypeVar("T")

_FLAG_ON = frozenset({"1", "true", "yes", "y", "on"})
_FLAG_OFF = frozenset({"0", "false", "no", "n", "off", ""})


def parse_number(text: str) -> float:
    """Float from user text; a lone decimal comma is accepted ("0,2")."""
    s = str(text).strip()
    if s.count(",") == 1 and "." not in s:
        s = s.replace(",", ".")
    return float(s)


def parse_count(text: str) -> int:
    """Integer from user text, decimal notation allowed ("1e5", "2000.0")."""
    s = str(text).strip()
    try:
        return int(s)
    except ValueError:
        v = parse_number(s)
    if not math.isfinite(v) or v != int(v):
        raise ValueError(f"not a whole number: {text!r}")
    return int(v)


def parse_flag(text: str) -> bool:
    s = str(text).strip().lower()
    if s in _FLAG_ON:
        return True
    if s in _FLAG_OFF:
        return False
    raise ValueError(f"not a flag: {text!r}")


def _csv(text: Optional[str], cast: Callable[[str], T], default: List[T], seps: str = ",") -> List[T]:
    if not text:
        return list(default)
    sep = next((c for c in seps if c in text), seps[0])
    out = []
    for part in text.split(sep):
        try:
            v = cast(part)
        except ValueError:
            continue
        if v == v:
            out.append(v)
    return out or list(default)


def csv_floats(text: Optional[str], default: List[float]) -> List[float]:
    return _csv(text, parse_number, default, seps=";,")


def csv_ints(text: Optional[str], default: List[int]) -> List[int]:
    return _csv(text, parse_count, default)


def _env(name: str, default: T, cast: Optional[Callable[[str], T]] = None) -> T:
    """OU_<name> from the environment, cast like `default`; bad text keeps the default."""
    raw = os.getenv(f"OU_{name}")
    if raw is None or not raw.strip():
        return default
    if cast is None:
        cast = {bool: parse_flag, int: parse_count, float: parse_number}.get(type(default), str)
    try:
        return cast(raw)
    except ValueError:
        logger.warning("[CONFIG] ignoring OU_%s=%r, using %r", name, raw, default)
        return default


TABLE_N_DEFAULT = [0, 1, 2, 3, 4, 6, 9, 12, 16]
TABLE_T_DEFAULT = [3.0, 5.0, 7.0, 10.0, 15.0]


@dataclass
class Config:
    # spatial grid
    GRID_H: float = 0.2
    GRID_M: int = 125
    X_NEG_STEPS: int = 5

    # frequency grid (0 = choose automatically)
    UMAX: float = 0.0
    UMAX_CAP: float = 2048.0
    NFREQ: int = 0
    NFREQ_CAP: int = 1 << 22
    SPAN_FACTOR: float = 8.0
    SPAN_FACTOR_HEAVY: float = 2048.0
    DECAY_TOL: float = 1e-2
    CF_TOL: float = 1e-10

    # series evaluation
    SERIES_MAX_TERMS: int = 500
    SERIES_ABS_TOL: float = 1e-15
    SERIES_REL_TOL: float = 1e-13

    # monte carlo
    MC_PATHS: int = 100_000
    MC_HORIZON: float = 200.0
    MC_SEED: int = 20240611
    MC_CUTOFF: float = 1e-4
    MC_DRIFT_COMP: bool = True
    MC_CHUNK: int = 4096

    # truncation-error table
    TABLE_N: List[int] = field(default_factory=lambda: list(TABLE_N_DEFAULT))
    TABLE_T: List[float] = field(default_factory=lambda: list(TABLE_T_DEFAULT))

    LOG_LEVEL: str = "INFO"


def load_config() -> Config:
    """Config from OU_<FIELD> environment variables (and .env), defaults otherwise."""
    load_dotenv()
    base = Config()
    values = {}
    for name, value in vars(base).items():
        if name == "TABLE_N":
            values[name] = csv_ints(os.getenv("OU_TABLE_N"), value)
        elif name == "TABLE_T":
            values[name] = csv_floats(os.getenv("OU_TABLE_T"), value)
        elif name == "LOG_LEVEL":
            values[name] = _env(name, value).strip().upper()
        else:
            values[name] = _env(name, value)
    return Config(**values)
