"""Render result tables to figure files next to the delimited output."""

from __future__ import annotations

import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .experiments import POWER_FLOOR_DB, ResultTable
from .lc import TWO_PI

logger = logging.getLogger(__name__)


def _finish(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    logger.info("wrote figure %s", path)
    return path


def render_lc_curve(table: ResultTable, path: str | Path) -> Path:
    t = table.column("T_celsius")
    omega = table.column("omega_max_rad")
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.plot(t, omega, color="tab:blue", lw=1.8)
    ax.axhline(TWO_PI, color="0.5", ls="--", lw=0.9, label=r"$2\pi$")
    ax.axhline(np.pi, color="tab:red", ls=":", lw=0.9, label=r"$\pi$ (unsupported below)")
    ax.set_xlabel("temperature (°C)")
    ax.set_ylabel("max phase shift (rad)")
    ax.legend(frameon=False, fontsize=8)
    ax.grid(alpha=0.3)
    return _finish(fig, path)


def render_convergence(table: ResultTable, path: str | Path) -> Path:
    gap = table.column("gap")
    n_false = table.column("n_false")
    it = np.arange(1, len(gap) + 1)
    fig, ax1 = plt.subplots(figsize=(5.0, 3.4))
    ax1.semilogy(it, np.maximum(gap, 1e-12), "o-", color="tab:blue", ms=4,
                 label="nuclear - spectral gap")
    ax1.set_xlabel("inner iteration")
    ax1.set_ylabel("gap", color="tab:blue")
    ax2 = ax1.twinx()
    ax2.plot(it, n_false, "s--", color="tab:red", ms=4, label="phases over budget")
    ax2.set_ylabel("count over budget", color="tab:red")
    ax1.grid(alpha=0.3)
    return _finish(fig, path)


def render_heatmap(table: ResultTable, path: str | Path,
                   boxes: list[tuple[float, float, float, float]] | None = None,
                   floor_db: float | None = None) -> Path:
    """Power map with optional (x0, x1, y0, y1) box outlines."""
    x = table.column("x")
    y = table.column("y")
    p = table.column("power_dB")
    xs = np.unique(x)
    ys = np.unique(y)
    grid = p.reshape(len(xs), len(ys))
    if floor_db is None:
        visible = grid[grid > POWER_FLOOR_DB]
        floor_db = float(visible.min()) if visible.size else POWER_FLOOR_DB
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    mesh = ax.pcolormesh(ys, xs, np.maximum(grid, floor_db), shading="nearest",
                         cmap="viridis")
    fig.colorbar(mesh, ax=ax, label="received power (dB)")
    for (x0, x1, y0, y1), color in zip(boxes or [], ("w", "r", "y")):
        ax.plot([y0, y1, y1, y0, y0], [x0, x0, x1, x1, x0], color=color, lw=1.2)
    ax.set_xlabel("y (m)")
    ax.set_ylabel("x (m)")
    return _finish(fig, path)


def render_sweep(table: ResultTable, path: str | Path) -> Path:
    d = table.column("distance")
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.plot(d, table.column("sr_optimized_bits"), "o-", color="tab:green",
            label="temperature-aware")
    ax.plot(d, table.column("sr_neglect_bits"), "s--", color="tab:orange",
            label="neglect baseline")
    ax.set_xlabel("user-eavesdropper separation (m)")
    ax.set_ylabel("worst-case secrecy rate (bits/s/Hz)")
    ax.legend(frameon=False, fontsize=8)
    ax.grid(alpha=0.3)
    return _finish(fig, path)


_RENDERERS = {
    "lc_curve": render_lc_curve,
    "convergence": render_convergence,
    "heatmap": render_heatmap,
    "distance_sweep": render_sweep,
}


def render(table: ResultTable, path: str | Path, **kwargs) -> Path:
    kind = table.metadata.get("table")
    if kind not in _RENDERERS:
        raise ValueError(f"no renderer for table kind {kind!r}")
    return _RENDERERS[kind](table, path, **kwargs)
