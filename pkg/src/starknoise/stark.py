"""Stark response of the emitter, voltage-to-field conversion, and the
two-mirror polarization visibility model."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .constants import VOLT_PER_UM_TO_KV_PER_CM


@dataclass(frozen=True)
class StarkResponse:
    """Polynomial Stark coefficients and the empirical heating coefficient.

    Units: ``beta`` in meV (cm/kV)^2, ``dipole_d`` in meV cm/kV, ``c3`` in
    meV (cm/kV)^3, ``c4`` in meV (cm/kV)^4.  ``heating_c`` (meV (cm/kV)^2)
    is an additive high-field broadening term applied to the Gaussian FWHM
    in field sweeps, not part of the line-shift polynomial.
    """

    beta: float
    dipole_d: float = 0.0
    c3: float = 0.0
    c4: float = 0.0
    heating_c: float = 0.0

    def __post_init__(self) -> None:
        for name in ("beta", "dipole_d", "c3", "c4", "heating_c"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.heating_c < 0.0:
            raise ValueError("heating_c must be >= 0")


def stark_shift(f_kv_cm: float | np.ndarray, resp: StarkResponse) -> float | np.ndarray:
    """Line shift d f + beta f^2 + c3 f^3 + c4 f^4 in meV."""
    f = np.asarray(f_kv_cm, dtype=float)
    shift = f * (resp.dipole_d + f * (resp.beta + f * (resp.c3 + f * resp.c4)))
    return float(shift) if np.isscalar(f_kv_cm) else shift


@dataclass(frozen=True)
class FieldConversion:
    """Analytic conversion from electrode voltage to the local field.

    The external in-gap field is eta * V / L; the microscopic field at the
    emitter adds the Lorentz virtual-cavity factor (eps_r + 2) / 3.
    """

    gap_length_um: float
    geometry_factor_eta: float
    epsilon_r: float

    def __post_init__(self) -> None:
        if self.gap_length_um <= 0.0:
            raise ValueError("gap length must be positive")
        if not (0.0 < self.geometry_factor_eta <= 1.0):
            raise ValueError("geometry factor eta must be in (0, 1]")
        if self.epsilon_r < 1.0:
            raise ValueError("epsilon_r must be >= 1")

    @property
    def kv_cm_per_volt_local(self) -> float:
        """Local field per volt, kV/cm."""
        lorentz = (self.epsilon_r + 2.0) / 3.0
        return lorentz * self.geometry_factor_eta / self.gap_length_um * VOLT_PER_UM_TO_KV_PER_CM


@dataclass(frozen=True)
class LocalField:
    f_ext_kv_cm: float
    f_loc_kv_cm: float


def local_field_from_voltage(v_volts: float, conv: FieldConversion) -> LocalField:
    """External and local fields for an applied bias, sign preserved."""
    f_ext = conv.geometry_factor_eta * v_volts / conv.gap_length_um * VOLT_PER_UM_TO_KV_PER_CM
    f_loc = (conv.epsilon_r + 2.0) / 3.0 * f_ext
    return LocalField(f_ext_kv_cm=f_ext, f_loc_kv_cm=f_loc)


def mirror_visibility(lambda0_nm: float, gap_l_nm: float, n: float, k: float) -> float:
    """Polarization visibility of a dipole centered between two mirror faces.

    With complex index N = n + i k the face reflectivity is
    r = (N - 1) / (N + 1) = |r| e^{i delta}, the single-pass phase is
    phi = 2 pi L / lambda0, and the visibility is
    2 |r| cos(phi + delta) / (1 + |r|^2), bounded in [-1, 1].
    """
    if lambda0_nm <= 0.0 or gap_l_nm <= 0.0:
        raise ValueError("wavelength and gap must be positive")
    refl = (complex(n, k) - 1.0) / (complex(n, k) + 1.0)
    mod_r = abs(refl)
    delta = cmath.phase(refl)
    phi = 2.0 * math.pi * gap_l_nm / lambda0_nm
    return 2.0 * mod_r * math.cos(phi + delta) / (1.0 + mod_r**2)
