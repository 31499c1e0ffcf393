"""Figure rendering for the CLI report path.

Each command writes a PNG next to its delimited output.  The Agg backend is
forced so rendering works headless and byte-identically across runs.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .analytics import SweepPoint  # noqa: E402
from .montecarlo import MCResult  # noqa: E402


_CONTROL_LABEL = {"power": "above-band power (nW)", "field": "bias voltage (V)"}


def plot_sweep(points: Sequence[SweepPoint], path: str | Path, mode: str) -> None:
    """Linewidth and center-wavelength panels for an analytic sweep."""
    x = [p.control for p in points]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6.0, 6.0), sharex=True)
    ax1.plot(x, [p.fwhm_voigt_mev for p in points], "-", color="tab:blue")
    ax1.set_ylabel("Voigt FWHM (meV)")
    ax2.plot(x, [p.center_nm for p in points], "-", color="tab:red")
    ax2.set_ylabel("center wavelength (nm)")
    ax2.set_xlabel(_CONTROL_LABEL.get(mode, "control"))
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_mc_overlay(result: MCResult, path: str | Path, mode: str) -> None:
    """Monte Carlo points with error bars over the dashed analytic curves."""
    x = result.controls
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6.0, 6.0), sharex=True)
    ax1.errorbar(x, result.std_shift_mev, yerr=result.stderr_std, fmt="o",
                 ms=4, color="tab:blue", label="Monte Carlo")
    ax1.plot(x, result.analytic_std_mev, "--", color="k", label="analytic")
    ax1.set_ylabel("shift std (meV)")
    ax1.legend(frameon=False)
    ax2.errorbar(x, result.mean_shift_mev, yerr=result.stderr_mean, fmt="o",
                 ms=4, color="tab:red", label="Monte Carlo")
    ax2.plot(x, result.analytic_mean_mev, "--", color="k", label="analytic")
    ax2.set_ylabel("mean shift (meV)")
    ax2.set_xlabel(_CONTROL_LABEL.get(mode, "control"))
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_series_fit(x, y, model_x, model_y, path: str | Path,
                    xlabel: str = "x", ylabel: str = "y") -> None:
    """Data points with the fitted model curve."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(x, y, "o", ms=4, color="tab:blue", label="data")
    ax.plot(model_x, model_y, "-", color="k", label="fit")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
