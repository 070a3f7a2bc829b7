"""Figure rendering for experiment reports.

Every figure is written as SVG with a fixed hash salt and no date metadata so
repeated runs produce byte-identical files.  Axes are chosen so the fitted
decay model appears as a straight line.
"""

from __future__ import annotations

from typing import Optional

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .analysis import DecayFit, DecaySeries, EntropySeries  # noqa: E402
from .steady_state import Density, SpectrumReport  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "subfp"


def _save(fig, path: str) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def decay_figure(series: DecaySeries, fit: Optional[DecayFit],
                 path: str) -> None:
    """Distance series in linearizing coordinates, with the fitted line."""
    stretched = fit is not None and fit.kind == "stretched"
    ok = series.distances > 0.0
    t, d = series.times[ok], series.distances[ok]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if stretched:
        x = t ** fit.sigma
        ax.set_xlabel(f"t^{fit.sigma:g}")
    else:
        x = np.log1p(t)
        ax.set_xlabel("log(1 + t)")
    ax.plot(x, np.log(d), "o", ms=3.0, color="#1f77b4",
            label=series.label or "distance")
    ax.set_ylabel("log d(t)")
    if fit is not None:
        xw = np.linspace(x.min(), x.max(), 200)
        yw = np.log(fit.amplitude) - fit.exponent * xw
        lbl = (f"slope -{fit.exponent:.4g}"
               + (f", sigma={fit.sigma:g}" if stretched else ""))
        ax.plot(xw, yw, "-", color="#d62728", lw=1.2, label=lbl)
        for tb in fit.window:
            xb = tb ** fit.sigma if stretched else np.log1p(tb)
            ax.axvline(xb, color="0.7", lw=0.8, ls=":")
    ax.legend(loc="best", fontsize=8)
    ax.set_title("decay toward equilibrium")
    fig.tight_layout()
    _save(fig, path)


def steady_figure(G: Density, path: str) -> None:
    grid = G.grid
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if grid.dim == 1:
        ax.semilogy(grid.centers[:, 0], G.values, color="#1f77b4", lw=1.0)
        ax.set_xlabel("x")
        ax.set_ylabel("G(x)")
    else:
        n = grid.n
        img = np.log(np.maximum(G.values.reshape(n, n), 1e-300))
        L = -float(grid.centers[0, 0]) + 0.5 * grid.h
        im = ax.imshow(img.T, origin="lower", extent=(-L, L, -L, L),
                       cmap="viridis")
        fig.colorbar(im, ax=ax, label="log G")
        ax.set_xlabel("x1")
        ax.set_ylabel("x2")
    ax.set_title("steady state")
    fig.tight_layout()
    _save(fig, path)


def spectrum_figure(report: SpectrumReport, path: str) -> None:
    vals = report.eigenvalues
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    ax.plot(vals.real, vals.imag, "x", color="#d62728", ms=7.0)
    ax.axvline(0.0, color="0.7", lw=0.8)
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_title("rightmost generator spectrum")
    ax.grid(True, lw=0.3, alpha=0.5)
    fig.tight_layout()
    _save(fig, path)


def entropy_figure(series: EntropySeries, path: str) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(series.times, series.values, "o-", ms=3.0, lw=0.8,
            color="#2ca02c")
    ax.set_xlabel("t")
    ax.set_ylabel("H(t)")
    ax.set_title("relative entropy along the flow")
    fig.tight_layout()
    _save(fig, path)
