"""Two-panel figure: empirical gaps (points) vs theoretical bounds (dashed).

Reads only the documented CSV schemas produced by the polarslice runner and
never recomputes a statistic: the CSV is the single source of numerical
truth. Rendering is a pure function of the inputs; a fixed style, the Agg
backend and stripped PNG metadata make repeated runs byte-identical.

Left panel: one empirical-gap point per decay exponent m (log-log), with a
short dashed level at the bound m/(1+m) beside each. Right panel: one series
per m over the dimension grid, with the dashed bound curve m/(d+m).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

LEFT_COLUMNS = ("m", "empirical_gap", "theory_bound")
RIGHT_COLUMNS = ("d", "m", "empirical_gap", "theory_bound")

_POINT_STYLE = dict(s=28, zorder=3)
_DASH_STYLE = dict(linestyle="--", linewidth=1.2, zorder=2)


class SchemaError(Exception):
    """The CSV does not carry the documented columns."""


@dataclass(frozen=True)
class FigureSpec:
    """Inputs and output of one two-panel render."""

    left_csv: str
    right_csv: str
    out_path: str
    dpi: int = 150


def load_panel(path, required) -> dict:
    """Read one CSV into column arrays, checking the documented schema."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(line for line in fh if not line.startswith("#"))
        try:
            header = next(reader)
        except StopIteration as exc:
            raise SchemaError(f"{path}: no header row") from exc
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing column(s) {missing}")
        idx = [header.index(c) for c in required]
        for row in reader:
            if row:
                rows.append([float(row[i]) for i in idx])
    data = np.array(rows, dtype=float) if rows else np.empty((0, len(required)))
    return {name: data[:, j] for j, name in enumerate(required)}


def _draw_left(ax, panel):
    m = panel["m"]
    ax.scatter(m, panel["empirical_gap"], **_POINT_STYLE, label="empirical")
    for mi, bound in zip(m, panel["theory_bound"]):
        ax.plot([mi / 1.35, mi * 1.35], [bound, bound], color="C3", **_DASH_STYLE)
    ax.set_xlabel("decay exponent m")
    ax.set_ylabel("spectral gap")
    ax.set_title("radial-weight chain, bound m/(1+m)")
    if m.size:
        ax.set_xscale("log", base=2)
        ax.set_yscale("log")


def _draw_right(ax, panel):
    m_values = np.unique(panel["m"])
    for j, mv in enumerate(m_values):
        sel = panel["m"] == mv
        order = np.argsort(panel["d"][sel])
        d = panel["d"][sel][order]
        ax.scatter(d, panel["empirical_gap"][sel][order], color=f"C{j}",
                   **_POINT_STYLE, label=f"m = {mv:g}")
        ax.plot(d, panel["theory_bound"][sel][order], color=f"C{j}", **_DASH_STYLE)
    ax.set_xlabel("dimension d")
    ax.set_ylabel("spectral gap")
    ax.set_title("uniform-slice chain, bound m/(d+m)")
    if m_values.size:
        ax.set_xscale("log", base=2)
        ax.set_yscale("log")
        ax.legend(loc="lower left", fontsize=8)


def build_figure(left_panel: dict, right_panel: dict):
    """The 1x2 figure; separated from file IO so tests can introspect it."""
    fig, (ax_left, ax_right) = plt.subplots(1, 2, figsize=(9.6, 3.8))
    _draw_left(ax_left, left_panel)
    _draw_right(ax_right, right_panel)
    fig.tight_layout()
    return fig


def render(spec: FigureSpec) -> str:
    """Render both panels to ``spec.out_path`` and return that path."""
    left = load_panel(spec.left_csv, LEFT_COLUMNS)
    right = load_panel(spec.right_csv, RIGHT_COLUMNS)
    fig = build_figure(left, right)
    out = Path(spec.out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    try:
        # strip the writer tag so identical inputs give identical bytes
        fig.savefig(out, dpi=spec.dpi, metadata={"Software": None})
    finally:
        plt.close(fig)
    return str(out)
