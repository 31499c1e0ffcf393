"""Occupancy-control models.

Optical suppression: above-band pumping adds a linear-in-power component to
the capture (and weakly, the release) rate, driving the steady occupancy
toward 1 in a saturating form.  Electrical suppression: a static field opens
a field-assisted tunneling channel out of the trap with a generalized
Fowler-Nordheim rate, driving the occupancy toward 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import CONSTANTS, PhysicalConstants


@dataclass(frozen=True)
class OpticalSuppressionParams:
    """Saturating occupancy-versus-power model p0 + (p_inf - p0) P/(P + P_sat)."""

    p0: float
    p_inf: float
    p_sat_nw: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.p0 <= 1.0 and 0.0 <= self.p_inf <= 1.0):
            raise ValueError("occupancies must lie in [0, 1]")
        if self.p_sat_nw <= 0.0:
            raise ValueError("saturation power must be positive")


def occupancy_vs_power(
    power_nw: float | np.ndarray, params: OpticalSuppressionParams
) -> float | np.ndarray:
    """Steady trap occupancy under an above-band pump of the given power."""
    power = np.asarray(power_nw, dtype=float)
    if np.any(power < 0.0):
        raise ValueError("power must be non-negative")
    p = params.p0 + (params.p_inf - params.p0) * power / (power + params.p_sat_nw)
    return float(p) if np.isscalar(power_nw) else p


@dataclass(frozen=True)
class MicroscopicOpticalRates:
    """Dark rates k0+- and the linear-in-power coefficients alpha_c, alpha_r.

    The microscopic cross sections and carrier factors are accepted only
    pre-multiplied into alpha_c and alpha_r; ``capture_coefficient`` composes
    alpha_c from its factors when all are known.
    """

    k0_plus: float
    k0_minus: float
    alpha_c: float  # 1 / (time nW)
    alpha_r: float

    def __post_init__(self) -> None:
        for name in ("k0_plus", "k0_minus", "alpha_c", "alpha_r"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative")
        if self.k0_plus + self.k0_minus <= 0.0:
            raise ValueError("k0_plus + k0_minus must be positive")
        if self.alpha_c + self.alpha_r <= 0.0:
            raise ValueError("alpha_c + alpha_r must be positive")


def capture_coefficient(sigma_c: float, v_th: float, kappa: float) -> float:
    """Compose alpha_c = sigma_c * v_th * kappa from its microscopic factors."""
    return sigma_c * v_th * kappa


def effective_from_microscopic(rates: MicroscopicOpticalRates) -> OpticalSuppressionParams:
    """Map microscopic linear rates onto the saturating occupancy form.

    p0 = k0+/(k0+ + k0-), p_inf = alpha_c/(alpha_c + alpha_r) and
    P_sat = (k0+ + k0-)/(alpha_c + alpha_r); the resulting saturating curve
    reproduces the rate-equation occupancy at every power.
    """
    dark = rates.k0_plus + rates.k0_minus
    slope = rates.alpha_c + rates.alpha_r
    return OpticalSuppressionParams(
        p0=rates.k0_plus / dark,
        p_inf=rates.alpha_c / slope,
        p_sat_nw=dark / slope,
    )


def occupancy_from_rates(
    power_nw: float | np.ndarray, rates: MicroscopicOpticalRates
) -> float | np.ndarray:
    """Occupancy from the rate equation, (k0+ + alpha_c P)/(sum of all rates)."""
    power = np.asarray(power_nw, dtype=float)
    if np.any(power < 0.0):
        raise ValueError("power must be non-negative")
    p = (rates.k0_plus + rates.alpha_c * power) / (
        rates.k0_plus + rates.k0_minus + (rates.alpha_c + rates.alpha_r) * power
    )
    return float(p) if np.isscalar(power_nw) else p


def switching_time_from_rates(
    power_nw: float | np.ndarray, rates: MicroscopicOpticalRates
) -> float | np.ndarray:
    """Trap switching time 1/(k0+ + k0- + (alpha_c + alpha_r) P)."""
    power = np.asarray(power_nw, dtype=float)
    if np.any(power < 0.0):
        raise ValueError("power must be non-negative")
    tau = 1.0 / (rates.k0_plus + rates.k0_minus + (rates.alpha_c + rates.alpha_r) * power)
    return float(tau) if np.isscalar(power_nw) else tau


@dataclass(frozen=True)
class CarrierGeneration:
    """Geometry and yield factors for the photo-generated carrier density."""

    eta_yield: float
    photon_energy_mev: float
    area_nm2: float
    thickness_nm: float
    tau_r: float  # recombination time, s

    def __post_init__(self) -> None:
        for name in ("eta_yield", "photon_energy_mev", "area_nm2", "thickness_nm", "tau_r"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")


def generation_coefficient(
    gen: CarrierGeneration, constants: PhysicalConstants = CONSTANTS
) -> float:
    """Carrier density per unit power, nm^-3 per nW.

    n(P) = eta tau_r P / (hbar_omega A d); the photon energy is converted
    from meV to joules and the power from nW to watts.
    """
    photon_energy_j = gen.photon_energy_mev * 1e-3 * constants.elementary_charge_c
    return gen.eta_yield * gen.tau_r * 1e-9 / (photon_energy_j * gen.area_nm2 * gen.thickness_nm)


def carrier_density(
    power_nw: float | np.ndarray,
    gen: CarrierGeneration,
    constants: PhysicalConstants = CONSTANTS,
) -> float | np.ndarray:
    """Steady-state free-carrier density kappa * P, linear in the pump power."""
    power = np.asarray(power_nw, dtype=float)
    if np.any(power < 0.0):
        raise ValueError("power must be non-negative")
    n = generation_coefficient(gen, constants) * power
    return float(n) if np.isscalar(power_nw) else n


def characteristic_field(
    trap_depth_ev: float,
    effective_mass_ratio: float,
    constants: PhysicalConstants = CONSTANTS,
) -> float:
    """Characteristic tunneling field E* = 4 sqrt(2 m*) Phi^(3/2) / (3 hbar q).

    Evaluated in SI units and returned in kV/cm.  Scales exactly as
    Phi^(3/2).  Note: direct evaluation gives ~9.7e3 kV/cm for a 0.5 eV
    trap with m*/m_e = 0.16, an order of magnitude above values quoted in
    parts of the literature for the same inputs; treat E* as a free model
    parameter when fitting.
    """
    if trap_depth_ev <= 0.0:
        raise ValueError("trap depth must be positive")
    if effective_mass_ratio <= 0.0:
        raise ValueError("effective mass ratio must be positive")
    m_star = effective_mass_ratio * constants.electron_mass_kg
    phi_j = trap_depth_ev * constants.elementary_charge_c
    e_star_v_m = (
        4.0 * math.sqrt(2.0 * m_star) * phi_j**1.5
        / (3.0 * constants.hbar_j_s * constants.elementary_charge_c)
    )
    return e_star_v_m / 1e5  # V/m -> kV/cm


def tunneling_factor(
    e0: np.ndarray, alpha: float, gamma_stretch: float, e_star: float
) -> np.ndarray:
    """E0^alpha * exp(-(E*/E0)^gamma) with the E0 = 0 limit handled as 0."""
    out = np.zeros_like(e0)
    pos = e0 > 0.0
    out[pos] = e0[pos] ** alpha * np.exp(-((e_star / e0[pos]) ** gamma_stretch))
    return out


def release_rate_field(
    e0_kv_cm: float | np.ndarray,
    k0_minus: float,
    b0: float,
    alpha: float,
    gamma_stretch: float,
    e_star_kv_cm: float,
) -> float | np.ndarray:
    """Field-dependent release rate k0- + B0 E0^alpha exp(-(E*/E0)^gamma)."""
    e0 = np.atleast_1d(np.asarray(e0_kv_cm, dtype=float))
    if np.any(e0 < 0.0):
        raise ValueError("field magnitude must be non-negative")
    k = k0_minus + b0 * tunneling_factor(e0, alpha, gamma_stretch, e_star_kv_cm)
    return float(k[0]) if np.isscalar(e0_kv_cm) else k.reshape(np.shape(e0_kv_cm))


@dataclass(frozen=True)
class ElectricalSuppressionParams:
    """Occupancy-versus-field model p0 / (1 + B E0^alpha exp(-(E*/E0)^gamma)).

    ``b`` is the fitted relative rate B = B0 / p0 absorbing the attempt
    frequency; it is treated as dimensionless against E0 in kV/cm.
    ``gamma_stretch`` is the tunneling stretching exponent (the Lorentzian
    half-width elsewhere is named gamma_lorentz).
    """

    p0: float
    b: float
    alpha: float
    gamma_stretch: float
    e_star_kv_cm: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.p0 <= 1.0):
            raise ValueError("p0 must lie in [0, 1]")
        if self.b < 0.0:
            raise ValueError("b must be non-negative")
        if self.gamma_stretch <= 0.0:
            raise ValueError("gamma_stretch must be positive")
        if self.e_star_kv_cm <= 0.0:
            raise ValueError("characteristic field must be positive")


def occupancy_vs_field(
    e0_kv_cm: float | np.ndarray, params: ElectricalSuppressionParams
) -> float | np.ndarray:
    """Steady trap occupancy under a static bias field of magnitude E0."""
    e0 = np.atleast_1d(np.asarray(e0_kv_cm, dtype=float))
    if np.any(e0 < 0.0):
        raise ValueError("field magnitude must be non-negative")
    p = params.p0 / (
        1.0 + params.b * tunneling_factor(e0, params.alpha, params.gamma_stretch,
                                           params.e_star_kv_cm)
    )
    return float(p[0]) if np.isscalar(e0_kv_cm) else p.reshape(np.shape(e0_kv_cm))
