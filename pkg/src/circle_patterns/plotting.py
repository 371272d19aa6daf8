"""Figures for pattern reports, rendered off-screen to image files."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.collections import PolyCollection  # noqa: E402

from . import holonomy as ho  # noqa: E402


def plot_developed(P: ho.DevelopedPattern, path: str, neighbours: bool = True) -> str:
    """Developed fundamental domain, with its images under each generator in grey."""
    T = P.triangulation
    fig, ax = plt.subplots(figsize=(6, 6))
    words = [()]
    if neighbours:
        words += [(s,) for r in range(P.domain.n_generators) for s in (r + 1, -(r + 1))]
    for word in words:
        polys = []
        for f in range(T.n_faces):
            try:
                z = P.face_points(word, f)
            except ho.InfinitePoint:
                continue
            polys.append(np.column_stack([z.real, z.imag]))
        base = not word
        ax.add_collection(PolyCollection(
            polys, facecolors="tab:blue" if base else "none", alpha=0.35 if base else 0.6,
            edgecolors="k" if base else "0.6", linewidths=1.0 if base else 0.5))
    z = P.z
    for f in range(T.n_faces):
        c = z[f].mean()
        ax.annotate(str(f), (c.real, c.imag), ha="center", va="center", fontsize=8)
    ax.autoscale()
    ax.set_aspect("equal")
    ax.set_title("developed fundamental domain")
    return _save(fig, path)


def plot_spectra(spectra: dict, tol: float, path: str) -> str:
    """Singular values of the constraint matrices on a log scale."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, s in spectra.items():
        s = np.asarray(s, dtype=float)
        ax.semilogy(np.arange(len(s)), np.maximum(s, 1e-18), "o-", label=label)
        if len(s):
            ax.axhline(tol * s[0], ls="--", lw=0.8, color=ax.lines[-1].get_color())
    ax.set_xlabel("index")
    ax.set_ylabel("singular value")
    ax.legend()
    ax.set_title("constraint spectra (dashed: rank cutoff)")
    return _save(fig, path)


def plot_gram(matrices: dict, path: str) -> str:
    """Heatmaps of Gram matrices, real and imaginary parts side by side."""
    names = [k for k, M in matrices.items() if np.size(M)]
    fig, axes = plt.subplots(len(names) or 1, 2, figsize=(7, 3.2 * max(len(names), 1)), squeeze=False)
    for row, name in enumerate(names):
        M = np.asarray(matrices[name], dtype=complex)
        vmax = max(float(np.abs(M).max()), 1e-300)
        for col, (part, data) in enumerate((("Re", M.real), ("Im", M.imag))):
            ax = axes[row, col]
            im = ax.imshow(data, cmap="RdBu_r", vmin=-vmax, vmax=vmax)
            ax.set_title(f"{part} {name}")
            fig.colorbar(im, ax=ax, shrink=0.8)
    return _save(fig, path)


def _save(fig, path: str) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
