"""Spectral kernels: Lorentzian, Gaussian, Voigt via the Faddeeva function.

Profiles are area-normalized internally; the amplitude is an explicit
multiplier so fitted areas are directly comparable across spectra.  Spectra
are stored energy-native (meV); wavelength axes are first-order views.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import wofz

from .constants import CONSTANTS, GAUSSIAN_FWHM_FACTOR
from .errors import DataParseError

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)


def faddeeva(z: complex | np.ndarray) -> complex | np.ndarray:
    """Scaled complex complementary error function w(z) = exp(-z^2) erfc(-iz).

    Only the closed upper half-plane Im(z) >= 0 is accepted; that is the
    region the Voigt profile evaluates in, and accuracy there is better
    than 1e-6 relative for |z| <= 20.
    """
    zz = np.asarray(z, dtype=complex)
    if np.any(zz.imag < 0.0):
        raise ValueError("faddeeva requires Im(z) >= 0")
    w = wofz(zz)
    return complex(w) if np.isscalar(z) else w


@dataclass(frozen=True)
class VoigtParams:
    """Voigt line parameters: center, Gaussian sigma, Lorentzian HWHM, area."""

    center_mev: float
    sigma_g_mev: float
    gamma_lorentz_mev: float
    amplitude: float = 1.0

    def __post_init__(self) -> None:
        if self.sigma_g_mev < 0.0 or self.gamma_lorentz_mev < 0.0:
            raise ValueError("widths must be non-negative")
        if self.sigma_g_mev == 0.0 and self.gamma_lorentz_mev == 0.0:
            raise ValueError("sigma_g and gamma_lorentz cannot both be zero")
        if self.amplitude <= 0.0:
            raise ValueError("amplitude must be positive")

    @property
    def fwhm_mev(self) -> float:
        return voigt_fwhm_approx(GAUSSIAN_FWHM_FACTOR * self.sigma_g_mev,
                                 2.0 * self.gamma_lorentz_mev)


def gaussian_profile(x_mev: np.ndarray, center_mev: float, sigma_mev: float) -> np.ndarray:
    """Unit-area Gaussian kernel."""
    if sigma_mev <= 0.0:
        raise ValueError("sigma must be positive")
    x = np.asarray(x_mev, dtype=float)
    return np.exp(-((x - center_mev) ** 2) / (2.0 * sigma_mev**2)) / (sigma_mev * _SQRT2PI)


def lorentzian_profile(x_mev: np.ndarray, center_mev: float, gamma_mev: float) -> np.ndarray:
    """Unit-area Lorentzian kernel with half-width gamma."""
    if gamma_mev <= 0.0:
        raise ValueError("gamma must be positive")
    x = np.asarray(x_mev, dtype=float)
    return gamma_mev / math.pi / ((x - center_mev) ** 2 + gamma_mev**2)


def voigt_profile(grid_mev: np.ndarray, params: VoigtParams) -> np.ndarray:
    """Voigt line on an energy grid, area equal to ``params.amplitude``.

    Evaluates Re w((x - center + i gamma) / (sigma sqrt 2)) / (sigma sqrt(2 pi));
    the degenerate limits sigma -> 0 and gamma -> 0 return the pure
    Lorentzian and Gaussian kernels.
    """
    x = np.asarray(grid_mev, dtype=float)
    if params.sigma_g_mev == 0.0:
        return params.amplitude * lorentzian_profile(x, params.center_mev,
                                                     params.gamma_lorentz_mev)
    if params.gamma_lorentz_mev == 0.0:
        return params.amplitude * gaussian_profile(x, params.center_mev, params.sigma_g_mev)
    z = (x - params.center_mev + 1j * params.gamma_lorentz_mev) / (params.sigma_g_mev * _SQRT2)
    return params.amplitude * wofz(z).real / (params.sigma_g_mev * _SQRT2PI)


def voigt_fwhm_approx(fwhm_g_mev: float, fwhm_l_mev: float) -> float:
    """Empirical Voigt FWHM, 0.5346 L + sqrt(0.2166 L^2 + G^2)."""
    if fwhm_g_mev < 0.0 or fwhm_l_mev < 0.0:
        raise ValueError("widths must be non-negative")
    if fwhm_g_mev == 0.0 and fwhm_l_mev == 0.0:
        raise ValueError("widths cannot both be zero")
    return 0.5346 * fwhm_l_mev + math.sqrt(0.2166 * fwhm_l_mev**2 + fwhm_g_mev**2)


_AXES = ("energy_mev", "wavelength_nm")


@dataclass(frozen=True)
class SpectrumRecord:
    """A sampled spectrum: strictly monotone grid, intensities, noise metadata."""

    axis: str
    x: np.ndarray
    intensity: np.ndarray
    noise_model: dict | None = None

    def __post_init__(self) -> None:
        if self.axis not in _AXES:
            raise ValueError(f"axis must be one of {_AXES}")
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.intensity, dtype=float)
        if x.ndim != 1 or x.shape != y.shape or x.size < 2:
            raise ValueError("grid and intensities must be equal-length 1-D arrays")
        dx = np.diff(x)
        if not (np.all(dx > 0.0) or np.all(dx < 0.0)):
            raise ValueError("grid must be strictly monotone")
        if self.noise_model is None and np.any(y < 0.0):
            raise ValueError("noise-free intensities must be non-negative")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "intensity", y)

    def to_csv(self, path: str | Path) -> None:
        with Path(path).open("w") as fh:
            fh.write(f"# axis={self.axis}\n")
            fh.write("x,intensity\n")
            for xv, yv in zip(self.x, self.intensity):
                fh.write(f"{float(xv):.12g},{float(yv):.12g}\n")

    @classmethod
    def from_csv(cls, path: str | Path) -> "SpectrumRecord":
        lines = Path(path).read_text().splitlines()
        if not lines or not lines[0].startswith("# axis="):
            raise DataParseError("missing '# axis=' header", line=1)
        axis = lines[0].split("=", 1)[1].strip()
        xs, ys = [], []
        for i, line in enumerate(lines[1:], start=2):
            if not line.strip() or line.strip() == "x,intensity":
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise DataParseError(f"expected 'x,intensity', got {line!r}", line=i)
            try:
                xs.append(float(parts[0]))
                ys.append(float(parts[1]))
            except ValueError as exc:
                raise DataParseError(str(exc), line=i) from exc
        if len(xs) < 2:
            raise DataParseError("spectrum needs at least two samples")
        return cls(axis=axis, x=np.array(xs), intensity=np.array(ys),
                   noise_model={"type": "unknown"})

    def to_json_dict(self) -> dict:
        return {
            "axis": self.axis,
            "x": [float(v) for v in self.x],
            "intensity": [float(v) for v in self.intensity],
            "noise_model": self.noise_model,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "SpectrumRecord":
        return cls(axis=data["axis"], x=np.array(data["x"], dtype=float),
                   intensity=np.array(data["intensity"], dtype=float),
                   noise_model=data.get("noise_model"))


def wavelength_view(record: SpectrumRecord, lambda0_nm: float) -> SpectrumRecord:
    """First-order wavelength-axis view of an energy-native spectrum."""
    if record.axis != "energy_mev":
        raise ValueError("wavelength_view requires an energy-native spectrum")
    e0 = CONSTANTS.hc_mev_nm / lambda0_nm
    lam = lambda0_nm - lambda0_nm**2 * (record.x - e0) / CONSTANTS.hc_mev_nm
    return SpectrumRecord(axis="wavelength_nm", x=lam, intensity=record.intensity,
                          noise_model=record.noise_model)


def synthesize_spectrum(
    stats,
    gamma_lorentz_mev: float,
    lambda0_nm: float,
    grid_mev: np.ndarray | None = None,
    n_points: int = 801,
    span_widths: float = 8.0,
    amplitude: float = 1.0,
    noise_model: dict | None = None,
    noise_seed: int | None = None,
) -> SpectrumRecord:
    """Synthesize the Voigt line implied by trap-shift statistics.

    The line is centered at hc/lambda0 plus the mean shift, with Gaussian
    sigma from the shift variance and the given Lorentzian half-width.  A
    supplied grid must cover at least +-5 Voigt FWHM around the center.
    ``noise_model`` is ``{"type": "poisson"}`` (intensities as expected
    counts) or ``{"type": "gaussian", "scale": s}``; noise is deterministic
    for a given seed.

    ``stats`` is any object with ``mu_mev`` and ``sigma2_mev2`` attributes.
    """
    sigma_g = math.sqrt(stats.sigma2_mev2)
    center = CONSTANTS.hc_mev_nm / lambda0_nm + stats.mu_mev
    fwhm = voigt_fwhm_approx(GAUSSIAN_FWHM_FACTOR * sigma_g, 2.0 * gamma_lorentz_mev)
    if grid_mev is None:
        grid_mev = np.linspace(center - span_widths * fwhm, center + span_widths * fwhm,
                               n_points)
    else:
        grid_mev = np.asarray(grid_mev, dtype=float)
        required = 5.0 * fwhm
        if grid_mev.min() > center - required or grid_mev.max() < center + required:
            raise ValueError(
                "grid too narrow: must cover "
                f"[{center - required:.6g}, {center + required:.6g}] meV "
                f"(+-5 FWHM = +-{required:.6g} meV around the center)"
            )
    params = VoigtParams(center_mev=center, sigma_g_mev=sigma_g,
                         gamma_lorentz_mev=gamma_lorentz_mev, amplitude=amplitude)
    intensity = voigt_profile(grid_mev, params)
    if noise_model is not None:
        rng = np.random.default_rng(np.random.SeedSequence(noise_seed))
        kind = noise_model.get("type")
        if kind == "poisson":
            intensity = rng.poisson(intensity).astype(float)
        elif kind == "gaussian":
            intensity = intensity + rng.normal(0.0, noise_model["scale"], intensity.shape)
        else:
            raise ValueError(f"unknown noise model {kind!r}")
        noise_model = dict(noise_model, seed=noise_seed)
    return SpectrumRecord(axis="energy_mev", x=grid_mev, intensity=intensity,
                          noise_model=noise_model)
