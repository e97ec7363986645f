"""Figure rendering for the report-style CSV artifacts.

Each sweep/report command can drop a PNG next to its CSV; these helpers keep
the styling in one place.  The Agg backend is forced so rendering works
headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["plot_ber_vs_snr", "plot_series_vs_x", "plot_surface"]

_BER_FLOOR = 1e-12


def _finish(fig, path: str | Path) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_ber_vs_snr(path: str | Path, rho_db, series: dict[str, np.ndarray], title: str = "") -> None:
    """Semilog BER curves against total SNR in dB."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    rho_db = np.asarray(rho_db, dtype=float)
    for label, values in series.items():
        values = np.asarray(values, dtype=float)
        ok = np.isfinite(values) & (values > _BER_FLOOR)
        if not np.any(ok):
            continue
        ax.semilogy(rho_db[ok], values[ok], marker="o", ms=3, label=label)
    ax.set_xlabel(r"$\rho_T$ (dB)")
    ax.set_ylabel("BER")
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", alpha=0.4)
    ax.legend()
    _finish(fig, path)


def plot_series_vs_x(path: str | Path, x, series: dict[str, np.ndarray], xlabel: str, ylabel: str, title: str = "") -> None:
    """Linear-axis comparison curves (e.g. optimum coefficients vs geometry)."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for label, values in series.items():
        style = "--" if "predicted" in label else "-"
        ax.plot(np.asarray(x, dtype=float), np.asarray(values, dtype=float), style, marker="o", ms=3, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.4)
    ax.legend()
    _finish(fig, path)


def plot_surface(path: str | Path, alphas, betas, ber: np.ndarray, title: str = "") -> None:
    """log10(BER) heat map over the power-coefficient plane, minimum marked."""
    fig, ax = plt.subplots(figsize=(6, 4.8))
    alphas = np.asarray(alphas, dtype=float)
    betas = np.asarray(betas, dtype=float)
    z = np.log10(np.maximum(np.asarray(ber, dtype=float), _BER_FLOOR))
    mesh = ax.pcolormesh(betas, alphas, z, shading="nearest", cmap="viridis")
    i, j = np.unravel_index(np.argmin(z), z.shape)
    ax.plot(betas[j], alphas[i], "r*", ms=12, label=rf"min at $\alpha$={alphas[i]:.3f}, $\beta$={betas[j]:.3f}")
    ax.set_xlabel(r"power-sharing coefficient $\beta$")
    ax.set_ylabel(r"power-allocation coefficient $\alpha$")
    if title:
        ax.set_title(title)
    fig.colorbar(mesh, ax=ax, label=r"$\log_{10}$ BER")
    ax.legend(loc="lower left")
    _finish(fig, path)
