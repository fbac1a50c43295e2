import math

import numpy as np
import pytest

from src.config import TABLE_N_DEFAULT, csv_floats, csv_ints, load_config, parse_count, parse_flag, parse_number
from src.report import render_grid, render_pairs
from src.utils import (
    CompensatedSum,
    fmt_float,
    interp_on_grid,
    is_pow2,
    neumaier_sum,
    next_pow2,
    provenance_line,
    write_csv,
)


class TestParsing:
    def test_count(self):
        assert parse_count(" 125 ") == 125
        assert parse_count("1e5") == 100_000
        assert parse_count("2000.0") == 2000
        for bad in ("125pts", "2.5", "inf", ""):
            with pytest.raises(ValueError):
                parse_count(bad)

    def test_number(self):
        assert parse_number("0,2") == pytest.approx(0.2)
        assert parse_number(" 1e-3 ") == pytest.approx(1e-3)
        assert math.isinf(parse_number("inf"))
        with pytest.raises(ValueError):
            parse_number("oops")

    def test_flag(self):
        assert parse_flag("yes") and parse_flag("1") and parse_flag(" On ")
        assert not parse_flag("0") and not parse_flag("false")
        with pytest.raises(ValueError):
            parse_flag("maybe")

    def test_lists(self):
        assert csv_floats("3;5;7", []) == [3.0, 5.0, 7.0]
        assert csv_floats("3,5", []) == [3.0, 5.0]
        assert csv_floats("", [1.0]) == [1.0]
        assert csv_floats("1,nan,x", []) == [1.0]
        assert csv_ints("0, 1,2", []) == [0, 1, 2]
        assert csv_ints("1e1", []) == [10]


def test_load_config_reads_environment(monkeypatch):
    monkeypatch.setenv("OU_GRID_M", "60")
    monkeypatch.setenv("OU_MC_PATHS", "2e4")
    monkeypatch.setenv("OU_MC_DRIFT_COMP", "false")
    monkeypatch.setenv("OU_TABLE_T", "7;10")
    monkeypatch.delenv("OU_TABLE_N", raising=False)
    cfg = load_config()
    assert cfg.GRID_M == 60
    assert cfg.MC_PATHS == 20_000
    assert cfg.MC_DRIFT_COMP is False
    assert cfg.TABLE_T == [7.0, 10.0]
    assert cfg.TABLE_N == TABLE_N_DEFAULT


def test_bad_environment_value_keeps_default(monkeypatch, caplog):
    monkeypatch.setenv("OU_GRID_M", "125pts")
    monkeypatch.setenv("OU_GRID_H", "oops")
    with caplog.at_level("WARNING", logger="src.config"):
        cfg = load_config()
    assert cfg.GRID_M == 125
    assert cfg.GRID_H == pytest.approx(0.2)
    assert "[CONFIG] ignoring OU_GRID_M" in caplog.text


def test_compensated_sums():
    vals = [1e16, 1.0, -1e16]
    assert neumaier_sum(vals) == 1.0
    acc = CompensatedSum()
    for v in vals:
        acc.add(v)
    assert acc.value == 1.0


def test_powers_of_two():
    assert is_pow2(1024) and not is_pow2(1000) and not is_pow2(0)
    assert next_pow2(1000) == 1024
    assert next_pow2(1024) == 1024
    assert next_pow2(0) == 1


def test_interp_on_grid():
    xs = np.array([0.0, 1.0, 2.0])
    ys = np.array([0.0, 0.5, 1.0])
    out = interp_on_grid([-1.0, 0.5, 5.0], xs, ys)
    np.testing.assert_allclose(out, [0.0, 0.25, 1.0])


def test_csv_text_is_stable(tmp_path):
    path = tmp_path / "a" / "b.csv"
    text = write_csv(str(path), ["x", "v"], [(1, 0.1), (2, np.float64(1 / 3))], comments=["# c"])
    assert text == "# c\nx,v\n1,0.1\n2,0.3333333333333333\n"
    assert path.read_text(encoding="utf-8") == text
    assert fmt_float(1e-20) == "1e-20"


def test_provenance_line():
    line = provenance_line("ruin", "stable", 5)
    assert line.startswith("# ou-ruin ") and line.endswith("cmd=ruin model=stable seed=5")


def test_render_grid():
    text = render_grid("T", "N", [0, 1], "t", [3.0, 5.0], [[0.9, 0.5], [12340.0, 1e-5]], notes=["note"])
    lines = text.splitlines()
    assert lines[1] == "T"
    assert "t=3" in lines[3]
    assert "1.234e+04" in text and "1.000e-05" in text
    assert "note" in text
    assert "k:" in render_pairs("P", [("k", "v")])
