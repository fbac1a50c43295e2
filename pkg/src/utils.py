import csv
import io
import logging
import math
import os
from typing import Iterable, Sequence

import numpy as np

VERSION = "0.3.0"


def setup_logging(level: str = "INFO") -> None:
    logging.basicConfig(
        level=getattr(logging, str(level).upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
    )


def neumaier_sum(values: Iterable[float]) -> float:
    """Compensated sum; keeps the digits an alternating series would lose."""
    s = 0.0
    comp = 0.0
    for v in values:
        t = s + v
        if abs(s) >= abs(v):
            comp += (s - t) + v
        else:
            comp += (v - t) + s
        s = t
    return s + comp


class CompensatedSum:
    """Running Neumaier accumulator, for loops that also need the partial value."""

    def __init__(self):
        self.s = 0.0
        self.comp = 0.0

    def add(self, v: float) -> None:
        t = self.s + v
        if abs(self.s) >= abs(v):
            self.comp += (self.s - t) + v
        else:
            self.comp += (v - t) + self.s
        self.s = t

    @property
    def value(self) -> float:
        return self.s + self.comp


def interp_on_grid(x, grid_x: np.ndarray, values: np.ndarray, left: float = 0.0, right=None):
    """Linear interpolation; below the grid -> `left`, above -> last value unless `right` given."""
    right = values[-1] if right is None else right
    return np.interp(np.asarray(x, dtype=float), grid_x, values, left=left, right=right)


def is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def next_pow2(n: int) -> int:
    return 1 << max(0, int(math.ceil(math.log2(max(1, n)))))


def provenance_line(command: str, family: str, seed) -> str:
    return f"# ou-ruin {VERSION} cmd={command} model={family} seed={seed}"


def fmt_float(x: float) -> str:
    # repr keeps the output byte-stable across runs
    return repr(float(x))


def write_csv(path: str | None, header: Sequence[str], rows: Iterable[Sequence], comments: Sequence[str] = ()) -> str:
    """Write comment lines, the header and rows. path None -> return the text only."""
    buf = io.StringIO()
    for c in comments:
        buf.write(c.rstrip("\n") + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(header))
    for row in rows:
        w.writerow([fmt_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
    text = buf.getvalue()
    if path:
        folder = os.path.dirname(path)
        if folder:
            os.makedirs(folder, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as f:
            f.write(text)
    return text
