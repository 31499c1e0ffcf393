"""Physical constants and the package's unit conventions.

Canonical units everywhere: electric fields in kV/cm, energies in meV,
trap-geometry lengths in nm, electrode gaps in um, optical powers in nW,
magnetic fields in T.  All unit conversions are centralized here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA-level constants expressed in the canonical units."""

    coulomb_v_nm: float = 1.43996  # e / (4 pi eps0), in V nm per elementary charge
    hc_mev_nm: float = 1.2398419e6  # h c, in meV nm
    bohr_radius_h_nm: float = 0.0529177  # hydrogen Bohr radius, nm
    bohr_magneton_mev_t: float = 0.0578838  # Bohr magneton, meV / T
    electron_mass_kg: float = 9.1093837015e-31
    hbar_j_s: float = 1.054571817e-34
    elementary_charge_c: float = 1.602176634e-19

    def __post_init__(self) -> None:
        for f in fields(self):
            if not getattr(self, f.name) > 0.0:
                raise ValueError(f"constant {f.name} must be strictly positive")


CONSTANTS = PhysicalConstants()

# Unit conversions between the canonical units.
V_PER_NM_TO_KV_PER_CM = 1.0e4
KV_PER_CM_TO_V_PER_M = 1.0e5
VOLT_PER_UM_TO_KV_PER_CM = 10.0

# FWHM of a Gaussian with unit standard deviation, 2 sqrt(2 ln 2).
GAUSSIAN_FWHM_FACTOR = 2.0 * math.sqrt(2.0 * math.log(2.0))


def effective_bohr_radius(
    epsilon_r: float,
    mass_ratio: float,
    constants: PhysicalConstants = CONSTANTS,
) -> float:
    """Effective Bohr radius a_H * eps_r / (m*/m_e), in nm.

    ``mass_ratio`` is the effective-to-free electron mass ratio m*/m_e.
    """
    if epsilon_r < 1.0:
        raise ValueError("epsilon_r must be >= 1")
    if mass_ratio <= 0.0:
        raise ValueError("mass_ratio must be positive")
    return constants.bohr_radius_h_nm * epsilon_r / mass_ratio
