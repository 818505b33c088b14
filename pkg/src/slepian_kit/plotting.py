"""SVG figure rendering for spectra and eigenvector grids.

Figures are self-contained SVG files; 1-d vectors are line plots with the
space mask shaded in gray, 2-d vectors are heatmaps with the mask boundary
overlaid as a gray contour.  Saving with ``timestamp=False`` strips the
date metadata so repeated runs produce identical bytes.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "slepian-kit"  # deterministic element ids

import matplotlib.pyplot as plt
import numpy as np

from .geometry import Grid


def _save(fig, path, timestamp: bool):
    metadata = None if timestamp else {"Date": None}
    fig.savefig(path, format="svg", metadata=metadata)
    plt.close(fig)


def plot_spectrum(values: np.ndarray, path, timestamp: bool = True, title: str = "spectrum") -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    idx = np.arange(1, len(values) + 1)
    ax.plot(idx, values, ".", ms=3)
    ax.set_xlabel("index")
    ax.set_ylabel("eigenvalue")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    _save(fig, path, timestamp)


def plot_vector_1d(grid: Grid, vector: np.ndarray, mask: np.ndarray, path,
                   timestamp: bool = True, title: str = "") -> None:
    x = grid.space_axis()
    v = np.asarray(vector).reshape(-1)
    fig, ax = plt.subplots(figsize=(6, 3.2))
    inside = np.asarray(mask).reshape(-1) > 0.5
    if inside.any():
        ax.axvspan(x[inside].min(), x[inside].max(), color="0.85", zorder=0)
    ax.plot(x, v.real, lw=1.2)
    if np.max(np.abs(v.imag)) > 1e-12:
        ax.plot(x, v.imag, lw=1.0, ls="--")
    ax.axhline(0.0, color="k", lw=0.5)
    ax.set_xlabel("x")
    ax.set_title(title)
    fig.tight_layout()
    _save(fig, path, timestamp)


def plot_vector_2d(grid: Grid, vector: np.ndarray, mask: np.ndarray, path,
                   timestamp: bool = True, title: str = "") -> None:
    N = grid.N
    x = grid.space_axis()
    field = np.asarray(vector).reshape(N, N).real
    fig, ax = plt.subplots(figsize=(4.6, 4.2))
    extent = (-1.0, 1.0, -1.0, 1.0)
    im = ax.imshow(field.T, origin="lower", extent=extent, cmap="RdBu_r",
                   vmin=-np.max(np.abs(field)), vmax=np.max(np.abs(field)))
    mgrid = np.asarray(mask).reshape(N, N)
    if mgrid.min() < 0.5 < mgrid.max():
        ax.contour(x, x, mgrid.T, levels=[0.5], colors="0.5", linewidths=1.0)
    fig.colorbar(im, ax=ax, shrink=0.85)
    ax.set_title(title)
    fig.tight_layout()
    _save(fig, path, timestamp)


def plot_vector(grid: Grid, vector: np.ndarray, mask: np.ndarray, path,
                timestamp: bool = True, title: str = "") -> None:
    if grid.d == 1:
        plot_vector_1d(grid, vector, mask, path, timestamp, title)
    elif grid.d == 2:
        plot_vector_2d(grid, vector, mask, path, timestamp, title)
    else:
        raise ValueError("plotting supports d in {1, 2}")
