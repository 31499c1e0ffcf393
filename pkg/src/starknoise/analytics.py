"""Closed-form mean and variance of the trap-shifted transition, and the
sweep curves they generate for optical-power and bias-field control.

For occupancy p, bias field E0 and moments S2, S4 of the trap fields, the
mean shift is beta (E0^2 + p S2) and the shift variance is
beta^2 [p(1-p)(S4 + 2 E0^2 S2) + p^2(1-p^2)(S2^2 - S4)].
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .constants import CONSTANTS, GAUSSIAN_FWHM_FACTOR
from .lineshape import voigt_fwhm_approx
from .stark import FieldConversion, StarkResponse, local_field_from_voltage
from .suppression import (
    ElectricalSuppressionParams,
    OpticalSuppressionParams,
    occupancy_vs_field,
    occupancy_vs_power,
)

# Lorentzian HWHM equivalent to the 0.128 meV spectrometer-resolution FWHM,
# the default homogeneous floor for Voigt composition.
DEFAULT_GAMMA_LORENTZ_MEV = 0.064


@dataclass(frozen=True)
class ShiftStatistics:
    """Mean (meV) and variance (meV^2) of the quasi-static shift distribution."""

    mu_mev: float
    sigma2_mev2: float

    def __post_init__(self) -> None:
        if self.sigma2_mev2 < 0.0:
            raise ValueError("variance must be non-negative")

    @property
    def gaussian_fwhm_mev(self) -> float:
        return GAUSSIAN_FWHM_FACTOR * math.sqrt(self.sigma2_mev2)


def mean_shift(e0_kv_cm: float, p: float, s2: float, beta: float) -> float:
    """Mean line shift beta (E0^2 + p S2) in meV."""
    _check_p(p)
    return beta * (e0_kv_cm**2 + p * s2)


def variance_shift(e0_kv_cm: float, p: float, s2: float, s4: float, beta: float) -> float:
    """Shift variance in meV^2; vanishes at the frozen limits p = 0 and p = 1."""
    _check_p(p)
    linear = p * (1.0 - p) * (s4 + 2.0 * e0_kv_cm**2 * s2)
    pair = p**2 * (1.0 - p**2) * (s2**2 - s4)
    return beta**2 * (linear + pair)


def variance_shift_factored(
    p: float | np.ndarray, beta_s2: float, kappa_hat: float
) -> float | np.ndarray:
    """Zero-bias variance in the fit-friendly factored form.

    (beta S2)^2 [kappa p(1-p) + (1-kappa) p^2(1-p^2)]; equal to
    ``variance_shift`` at E0 = 0 with kappa = S4/S2^2.
    """
    if not (0.0 <= kappa_hat <= 1.0):
        raise ValueError("kappa_hat must lie in [0, 1]")
    pp = np.asarray(p, dtype=float)
    _check_p(pp)
    var = beta_s2**2 * (kappa_hat * pp * (1.0 - pp)
                        + (1.0 - kappa_hat) * pp**2 * (1.0 - pp**2))
    return float(var) if np.isscalar(p) else var


def _check_p(p) -> None:
    if np.any(np.asarray(p) < 0.0) or np.any(np.asarray(p) > 1.0):
        raise ValueError("occupancy p must lie in [0, 1]")


def energy_to_wavelength_shift(delta_e_mev: float, lambda0_nm: float) -> float:
    """First-order wavelength shift for an energy shift near lambda0.

    Returns -lambda0^2 dE / hc in nm: an energy increase is a blue shift
    (negative wavelength shift).
    """
    if lambda0_nm <= 0.0:
        raise ValueError("lambda0 must be positive")
    return -(lambda0_nm**2) * delta_e_mev / CONSTANTS.hc_mev_nm


def center_wavelength(mu_mev: float, lambda0_nm: float) -> float:
    """Line center in nm for a mean shift mu relative to lambda0."""
    return lambda0_nm + energy_to_wavelength_shift(mu_mev, lambda0_nm)


@dataclass(frozen=True)
class SweepPoint:
    """One row of a control sweep; field names match the CSV columns."""

    control: float
    e0_kv_cm: float
    p: float
    mu_mev: float
    sigma2_mev2: float
    fwhm_voigt_mev: float
    center_nm: float


SWEEP_CSV_COLUMNS = ("control", "e0_kv_cm", "p", "mu_mev", "sigma2_mev2",
                     "fwhm_voigt_mev", "center_nm")


def power_sweep(
    powers_nw: Sequence[float],
    optical: OpticalSuppressionParams,
    beta_s2: float,
    kappa_hat: float,
    gamma_lorentz_mev: float = DEFAULT_GAMMA_LORENTZ_MEV,
    lambda0_nm: float = 440.0,
) -> list[SweepPoint]:
    """Sweep the above-band power at zero bias field.

    ``beta_s2`` is the product beta * S2 in meV; the variance uses the
    kappa-factored form, so only the scale and the moment ratio enter.
    """
    points = []
    for power in powers_nw:
        p = float(occupancy_vs_power(float(power), optical))
        mu = beta_s2 * p
        sigma2 = float(variance_shift_factored(p, beta_s2, kappa_hat))
        fwhm_g = GAUSSIAN_FWHM_FACTOR * math.sqrt(sigma2)
        fwhm = voigt_fwhm_approx(fwhm_g, 2.0 * gamma_lorentz_mev)
        points.append(SweepPoint(
            control=float(power), e0_kv_cm=0.0, p=p, mu_mev=mu, sigma2_mev2=sigma2,
            fwhm_voigt_mev=fwhm, center_nm=center_wavelength(mu, lambda0_nm),
        ))
    return points


def field_sweep(
    voltages: Sequence[float],
    conv: FieldConversion | float,
    electrical: ElectricalSuppressionParams,
    s2: float,
    s4: float,
    resp: StarkResponse,
    gamma_lorentz_mev: float = DEFAULT_GAMMA_LORENTZ_MEV,
    lambda0_nm: float = 440.0,
) -> list[SweepPoint]:
    """Sweep the electrode bias.

    ``conv`` is either a ``FieldConversion`` or a plain local-field factor
    in kV/cm per volt.  The occupancy responds to the field magnitude; the
    reported e0 keeps the sign of the bias.  The heating term
    ``resp.heating_c * E0^2`` is added to the Gaussian FWHM before Voigt
    composition.
    """
    points = []
    for v in voltages:
        if isinstance(conv, FieldConversion):
            e0 = local_field_from_voltage(float(v), conv).f_loc_kv_cm
        else:
            e0 = float(conv) * float(v)
        p = float(occupancy_vs_field(abs(e0), electrical))
        mu = mean_shift(e0, p, s2, resp.beta)
        sigma2 = variance_shift(e0, p, s2, s4, resp.beta)
        fwhm_g = GAUSSIAN_FWHM_FACTOR * math.sqrt(sigma2) + resp.heating_c * e0**2
        fwhm = voigt_fwhm_approx(fwhm_g, 2.0 * gamma_lorentz_mev)
        points.append(SweepPoint(
            control=float(v), e0_kv_cm=e0, p=p, mu_mev=mu, sigma2_mev2=sigma2,
            fwhm_voigt_mev=fwhm, center_nm=center_wavelength(mu, lambda0_nm),
        ))
    return points


def write_sweep_csv(points: Iterable[SweepPoint], path: str | Path) -> None:
    with Path(path).open("w") as fh:
        fh.write(",".join(SWEEP_CSV_COLUMNS) + "\n")
        for pt in points:
            row = asdict(pt)
            fh.write(",".join(f"{float(row[c]):.12g}" for c in SWEEP_CSV_COLUMNS) + "\n")


def write_sweep_json(points: Iterable[SweepPoint], path: str | Path) -> None:
    Path(path).write_text(json.dumps([asdict(pt) for pt in points], indent=2,
                                     sort_keys=True))
