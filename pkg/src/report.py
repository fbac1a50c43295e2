from typing import Iterable, List, Sequence

WIDTH = 72


def cell(v: float) -> str:
    av = abs(v)
    if av >= 1e4 or (0 < av < 1e-3):
        return f"{v:.3e}"
    return f"{v:.3f}"


def render_grid(title: str, row_name: str, rows: Sequence, col_name: str, cols: Sequence,
                values, notes: Iterable[str] = ()) -> str:
    """Aligned text table: one line per row value, one column per column value."""
    out: List[str] = []
    out.append("=" * WIDTH)
    out.append(title)
    out.append("=" * WIDTH)
    head = f"{row_name:>6s} " + " ".join(f"{col_name + '=' + format(c, 'g'):>10s}" for c in cols)
    out.append(head)
    out.append("-" * WIDTH)
    for i, rv in enumerate(rows):
        line = f"{str(rv):>6s} " + " ".join(f"{cell(values[i][j]):>10s}" for j in range(len(cols)))
        out.append(line)
    notes = list(notes)
    if notes:
        out.append("-" * WIDTH)
        out.extend(notes)
    out.append("=" * WIDTH)
    return "\n".join(out)


def render_pairs(title: str, pairs: Sequence) -> str:
    """Key/value block, keys padded like the rest of the reports."""
    out = ["=" * WIDTH, title, "=" * WIDTH]
    for k, v in pairs:
        out.append(f"{k + ':':16s}{v}")
    out.append("=" * WIDTH)
    return "\n".join(out)
