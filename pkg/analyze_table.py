import csv
import os
import sys
from collections import defaultdict

from src.report import render_grid
from src.spectral import t_alpha

STABLE_T = 15.0
STABLE_LEVEL = 0.021    # rectangle reference; about 0 with the trapezoid one


def load_table(path: str):
    """Long-format N,t,e rows -> (N values, t values, e[N][t])."""
    cells = defaultdict(dict)
    with open(path, "r", encoding="utf-8", newline="") as f:
        lines = [ln for ln in f if not ln.startswith("#")]
    for row in csv.DictReader(lines):
        try:
            n = int(row["N"])
            t = float(row["t"])
            e = float(row["e"])
        except (KeyError, TypeError, ValueError):
            continue
        cells[n][t] = e
    n_values = sorted(cells)
    t_values = sorted({t for v in cells.values() for t in v})
    return n_values, t_values, cells


def analyze(n_values, t_values, cells, alpha: float = 0.5, r: float = 0.2, level: float = STABLE_LEVEL):
    ta = t_alpha(alpha, r)
    checks = []

    # nonincreasing in t above t_alpha, N <= 12
    bad = []
    for n in n_values:
        if n > 12:
            continue
        row = [cells[n][t] for t in t_values if t > ta and t in cells[n]]
        if any(b > a + 1e-12 for a, b in zip(row, row[1:])):
            bad.append(n)
    checks.append(("monotone in t", not bad, f"violations at N={bad}" if bad else "ok"))

    # last column settles
    if STABLE_T in t_values:
        tail = [cells[n][STABLE_T] for n in n_values if n >= 6 and STABLE_T in cells[n]]
        ok = bool(tail) and max(abs(v - level) for v in tail) <= 0.01
        checks.append((f"e(N,{STABLE_T:g}) ~ {level}", ok,
                       ", ".join(f"{v:.3f}" for v in tail)))

    # below t_alpha the error grows with N beyond N = 2
    below = [t for t in t_values if t <= ta]
    for t in below:
        col = [cells[n][t] for n in n_values if n >= 2 and t in cells[n]]
        ok = len(col) >= 2 and col[-1] > col[0]
        checks.append((f"divergence at t={t:g}", ok, " -> ".join(f"{v:.3g}" for v in col)))

    return {"t_alpha": ta, "checks": checks}


def print_report(n_values, t_values, cells, stats):
    values = [[cells[n].get(t, float("nan")) for t in t_values] for n in n_values]
    notes = [f"t_alpha = {stats['t_alpha']:.4f}"]
    for name, ok, detail in stats["checks"]:
        notes.append(f"{'PASS' if ok else 'FAIL':4s}  {name:24s} {detail}")
    print(render_grid("TRUNCATION ERROR e_{N,t}", "N", n_values, "t", t_values, values, notes))


def main():
    if len(sys.argv) >= 2:
        path = sys.argv[1]
    else:
        path = os.getenv("OU_TABLE_PATH", "data/table1.csv")

    if not os.path.exists(path):
        print(f"File not found: {path}")
        print("Pass the path as an argument, for example:")
        print("  python analyze_table.py data/table1.csv")
        sys.exit(1)

    n_values, t_values, cells = load_table(path)
    level = float(sys.argv[2]) if len(sys.argv) >= 3 else STABLE_LEVEL
    stats = analyze(n_values, t_values, cells, level=level)
    print_report(n_values, t_values, cells, stats)


if __name__ == "__main__":
    main()
