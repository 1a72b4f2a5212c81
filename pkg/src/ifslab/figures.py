"""Matplotlib renderings of sweep reports and operator reports.

Figures are rendered headlessly to PNG next to the CSV/PGM artifacts.
Rendering is byte-deterministic: the Agg backend is forced and the PNG
date metadata is stripped, so identical reports produce identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .sw_family import SweepReport

_VERDICT_COLOR = {
    "disconnected": "#1f1f1f",
    "undecided": "#808080",
    "connected": "#f5f5f5",
    "error": "#b22222",
}
_VERDICT_LEVEL = {"disconnected": 0, "undecided": 1, "connected": 2, "error": 3}


def _savefig(fig, path):
    fig.savefig(path, dpi=120, metadata={"Date": None})
    plt.close(fig)


def render_sweep_figure(report: SweepReport, path):
    """Verdict map plus exceptional-distance map for a sweep."""
    grid = report.grid
    if grid.ndim == 2:
        ni, nj = grid.steps
        verdict_img = np.zeros((nj, ni))
        dist_img = np.full((nj, ni), np.nan)
        for cell in report.cells:
            i, j = cell.index
            kind = cell.verdict.kind if cell.verdict is not None else "error"
            verdict_img[j, i] = _VERDICT_LEVEL[kind]
            if cell.exceptional_distance is not None:
                dist_img[j, i] = cell.exceptional_distance
        extent = (*grid.ranges[0], *grid.ranges[1])
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4.2))
        im1 = ax1.imshow(verdict_img, origin="lower", extent=extent, aspect="auto",
                         cmap="gray", vmin=0, vmax=3, interpolation="nearest")
        ax1.set_title("verdict (0=disconnected, 1=undecided, 2=connected)")
        ax1.set_xlabel("t1")
        ax1.set_ylabel("t2")
        fig.colorbar(im1, ax=ax1, shrink=0.85)
        im2 = ax2.imshow(dist_img, origin="lower", extent=extent, aspect="auto",
                         cmap="viridis", interpolation="nearest")
        ax2.set_title(f"distance to exceptional union (n_max={report.n_max})")
        ax2.set_xlabel("t1")
        ax2.set_ylabel("t2")
        fig.colorbar(im2, ax=ax2, shrink=0.85)
        fig.tight_layout()
        _savefig(fig, path)
        return
    t_vals = [cell.params[0] for cell in report.cells]
    dists = [np.nan if cell.exceptional_distance is None else cell.exceptional_distance
             for cell in report.cells]
    colors = [_VERDICT_COLOR[cell.verdict.kind if cell.verdict is not None else "error"]
              for cell in report.cells]
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.plot(t_vals, dists, color="#4477aa", lw=1, zorder=1)
    ax.scatter(t_vals, dists, c=colors, edgecolors="black", linewidths=0.4, zorder=2)
    ax.set_xlabel("t1")
    ax.set_ylabel(f"distance to exceptional union (n_max={report.n_max})")
    ax.set_title("sweep verdicts (dark=disconnected, gray=undecided, light=connected)")
    fig.tight_layout()
    _savefig(fig, path)


def render_spectrum_figure(eigenvalues, eps_values, path):
    """Defect spectrum with the selection bands at 1 -/+ eps marked."""
    w = np.asarray(eigenvalues, dtype=float)
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.stem(np.arange(1, w.size + 1), w, basefmt=" ")
    ax.axhline(1.0, color="#888888", lw=0.8, ls="--", label="1")
    for eps in eps_values:
        ax.axhline(1.0 - eps, color="#4477aa", lw=0.8, ls=":")
        ax.axhline(1.0 + eps, color="#aa4444", lw=0.8, ls=":")
    ax.set_xlabel("eigenvalue index (ascending)")
    ax.set_ylabel("defect eigenvalue")
    ax.set_title("defect operator spectrum with selection thresholds")
    ax.legend(loc="upper left")
    fig.tight_layout()
    _savefig(fig, path)
