"""Rendering: schema checks, point/series counts, byte determinism.

The panel CSVs come only from the polarslice CLI (the package's one data
interface); synthetic files below follow the same documented schema.
"""

import subprocess
import sys

import numpy as np
import pytest

from figplot import FigureSpec, SchemaError, load_panel, render
from figplot.render import LEFT_COLUMNS, RIGHT_COLUMNS, build_figure


def write_left_csv(path, m_values):
    lines = ["# synthetic", "m,empirical_gap,theory_bound"]
    for m in m_values:
        bound = m / (1.0 + m)
        lines.append(f"{m},{bound * 1.05},{bound}")
    path.write_text("\n".join(lines) + "\n")
    return str(path)


def write_right_csv(path, m_values, d_values):
    lines = ["# synthetic", "d,m,empirical_gap,theory_bound"]
    for m in m_values:
        for d in d_values:
            bound = m / (d + m)
            lines.append(f"{d},{m},{bound * 0.97},{bound}")
    path.write_text("\n".join(lines) + "\n")
    return str(path)


def dashed_lines(ax):
    return [ln for ln in ax.lines if ln.get_linestyle() == "--"]


class TestLoadPanel:
    def test_missing_column_raises(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("m,empirical_gap\n0.5,0.3\n")
        with pytest.raises(SchemaError):
            load_panel(p, LEFT_COLUMNS)

    def test_no_header_raises(self, tmp_path):
        p = tmp_path / "empty.csv"
        p.write_text("")
        with pytest.raises(SchemaError):
            load_panel(p, LEFT_COLUMNS)

    def test_comments_are_skipped(self, tmp_path):
        p = write_left_csv(tmp_path / "l.csv", [0.5, 0.25])
        panel = load_panel(p, LEFT_COLUMNS)
        assert panel["m"].shape == (2,)


class TestCounts:
    def test_empty_csvs_render_empty_axes(self, tmp_path):
        left = write_left_csv(tmp_path / "l.csv", [])
        right = write_right_csv(tmp_path / "r.csv", [], [])
        out = render(FigureSpec(left, right, str(tmp_path / "fig.png")))
        assert (tmp_path / "fig.png").exists() and out.endswith("fig.png")

    def test_left_panel_points_and_levels(self, tmp_path):
        m_grid = [2.0 ** (-e) for e in range(8)]  # 8 exponents
        left = write_left_csv(tmp_path / "l.csv", m_grid)
        right = write_right_csv(tmp_path / "r.csv", [2.0], [4.0])
        fig = build_figure(load_panel(left, LEFT_COLUMNS),
                           load_panel(right, RIGHT_COLUMNS))
        ax = fig.axes[0]
        assert len(ax.collections) == 1
        assert len(ax.collections[0].get_offsets()) == 8
        assert len(dashed_lines(ax)) == 8

    def test_right_panel_series(self, tmp_path):
        m_grid = [2.0**e for e in range(5)]
        d_grid = [2.0**e for e in range(1, 11)]
        left = write_left_csv(tmp_path / "l.csv", [0.5])
        right = write_right_csv(tmp_path / "r.csv", m_grid, d_grid)
        fig = build_figure(load_panel(left, LEFT_COLUMNS),
                           load_panel(right, RIGHT_COLUMNS))
        ax = fig.axes[1]
        assert len(ax.collections) == 5  # one series per m
        for coll in ax.collections:
            assert len(coll.get_offsets()) == 10  # one point per d
        assert len(dashed_lines(ax)) == 5
        # every (m, d) cell lands in exactly one series
        total = sum(len(c.get_offsets()) for c in ax.collections)
        assert total == len(m_grid) * len(d_grid)

    def test_byte_determinism(self, tmp_path):
        left = write_left_csv(tmp_path / "l.csv", [0.5, 0.25, 0.125])
        right = write_right_csv(tmp_path / "r.csv", [1.0, 2.0], [2.0, 4.0])
        a = render(FigureSpec(left, right, str(tmp_path / "a.png")))
        b = render(FigureSpec(left, right, str(tmp_path / "b.png")))
        assert open(a, "rb").read() == open(b, "rb").read()


def run_polarslice(args):
    proc = subprocess.run(["polarslice", *args], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="module")
def experiment_csvs(tmp_path_factory):
    """Short-chain runs of the two figure experiments via the CLI."""
    root = tmp_path_factory.mktemp("csv")
    left, right = root / "left.csv", root / "right.csv"
    cfg = root / "chain.ini"
    cfg.write_text("[chain]\nn_steps = 20000\nburn_in = 500\n")
    extra = root / "grids.ini"
    extra.write_text(
        "[chain]\nn_steps = 20000\nburn_in = 500\n\n"
        "[params]\nm_exponents = -3,-5,-7\n"
    )
    run_polarslice(["figure-appB-left", "--config", str(extra), "--seed", "21",
                    "--out", str(left)])
    extra2 = root / "grids2.ini"
    extra2.write_text(
        "[chain]\nn_steps = 20000\nburn_in = 500\n\n"
        "[params]\nm_exponents = 1,2\nd_exponents = 6,8\n"
    )
    run_polarslice(["figure-appB-right", "--config", str(extra2), "--seed", "22",
                    "--out", str(right)])
    return left, right


class TestAcceptanceSecondary:
    def test_criterion_11_render_experiment_output(self, experiment_csvs, tmp_path):
        left, right = experiment_csvs
        panel_l = load_panel(left, LEFT_COLUMNS)
        panel_r = load_panel(right, RIGHT_COLUMNS)
        fig = build_figure(panel_l, panel_r)

        ax_l, ax_r = fig.axes[:2]
        assert len(ax_l.collections[0].get_offsets()) == panel_l["m"].size == 3
        assert len(dashed_lines(ax_l)) == 3
        n_series = np.unique(panel_r["m"]).size
        assert len(ax_r.collections) == n_series == 2
        assert sum(len(c.get_offsets()) for c in ax_r.collections) == panel_r["d"].size

        out1 = render(FigureSpec(str(left), str(right), str(tmp_path / "f1.png")))
        out2 = render(FigureSpec(str(left), str(right), str(tmp_path / "f2.png")))
        assert open(out1, "rb").read() == open(out2, "rb").read()
        print("\ncriterion 11: PASS - both panels render from experiment CSVs "
              "with matching counts; output byte-identical across runs")

    def test_cli_round_trip(self, experiment_csvs, tmp_path):
        left, right = experiment_csvs
        out = tmp_path / "panels.png"
        proc = subprocess.run(
            [sys.executable, "-m", "figplot.cli", "render", "--left", str(left),
             "--right", str(right), "--out", str(out)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        assert out.exists()

    def test_cli_schema_error_exit_code(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n")
        proc = subprocess.run(
            [sys.executable, "-m", "figplot.cli", "render", "--left", str(bad),
             "--right", str(bad), "--out", str(tmp_path / "x.png")],
            capture_output=True, text=True,
        )
        assert proc.returncode == 1
        assert "missing column" in proc.stderr
