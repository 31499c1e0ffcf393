"""Trap-ensemble geometry: annulus sampling, Coulomb fields, field moments.

A trap ensemble is a set of point charges in the plane of the emitter.  Each
occupied trap contributes a Coulomb field at the emitter site whose magnitude
falls off as 1/r^2.  The geometric moments S2 = sum f_i^2 and S4 = sum f_i^4
of the per-trap field magnitudes, and their ratio kappa_hat = S4 / S2^2,
control the mean and variance of the trap-induced line shift.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .constants import CONSTANTS, PhysicalConstants, V_PER_NM_TO_KV_PER_CM


def trap_field_magnitude(
    r_nm: float | np.ndarray,
    epsilon_r: float,
    constants: PhysicalConstants = CONSTANTS,
) -> float | np.ndarray:
    """Coulomb field magnitude of a single charged trap at distance r.

    Parameters
    ----------
    r_nm:
        Distance from the emitter, nm.  Must be strictly positive.
    epsilon_r:
        Relative permittivity of the host (>= 1).

    Returns
    -------
    Field magnitude in kV/cm, e / (4 pi eps0 eps_r r^2).
    """
    r = np.asarray(r_nm, dtype=float)
    if np.any(r <= 0.0):
        raise ValueError("trap distance r must be strictly positive")
    if epsilon_r < 1.0:
        raise ValueError("epsilon_r must be >= 1")
    f = constants.coulomb_v_nm / (epsilon_r * r**2) * V_PER_NM_TO_KV_PER_CM
    return float(f) if np.isscalar(r_nm) else f


@dataclass(frozen=True)
class TrapGeometry:
    """Fixed realization of a planar trap ensemble around the emitter.

    Fields are stored as signed 2-D vectors (magnitude plus polar angle) so
    that simulation code can form vector sums; the closed-form statistics
    consume only the magnitudes.
    """

    n_traps: int
    r_min_nm: float
    r_max_nm: float
    epsilon_r: float
    radii_nm: np.ndarray
    angles_rad: np.ndarray
    field_magnitudes_kv_cm: np.ndarray

    def __post_init__(self) -> None:
        if self.n_traps < 1:
            raise ValueError("n_traps must be >= 1")
        if not (0.0 < self.r_min_nm < self.r_max_nm):
            raise ValueError("annulus bounds must satisfy 0 < r_min < r_max")
        if self.epsilon_r < 1.0:
            raise ValueError("epsilon_r must be >= 1")
        radii = np.asarray(self.radii_nm, dtype=float)
        angles = np.asarray(self.angles_rad, dtype=float)
        fields = np.asarray(self.field_magnitudes_kv_cm, dtype=float)
        if not (radii.shape == angles.shape == fields.shape == (self.n_traps,)):
            raise ValueError("radii, angles and field magnitudes must have shape (n_traps,)")
        # 1e-9 slack admits radii serialized at finite precision
        if np.any(radii < self.r_min_nm - 1e-9) or np.any(radii > self.r_max_nm + 1e-9):
            raise ValueError("all radii must lie within [r_min, r_max]")
        if np.any(angles < 0.0) or np.any(angles >= 2.0 * np.pi):
            raise ValueError("angles must lie in [0, 2*pi)")
        for name, arr in (("radii_nm", radii), ("angles_rad", angles),
                          ("field_magnitudes_kv_cm", fields)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def field_vectors_kv_cm(self) -> tuple[np.ndarray, np.ndarray]:
        """Cartesian (x, y) components of the per-trap field vectors."""
        f = self.field_magnitudes_kv_cm
        return f * np.cos(self.angles_rad), f * np.sin(self.angles_rad)

    def to_json_dict(self) -> dict:
        return {
            "n_traps": self.n_traps,
            "r_min_nm": self.r_min_nm,
            "r_max_nm": self.r_max_nm,
            "epsilon_r": self.epsilon_r,
            "traps": [
                {"r_nm": float(r), "theta_rad": float(t), "f_kv_cm": float(f)}
                for r, t, f in zip(self.radii_nm, self.angles_rad,
                                   self.field_magnitudes_kv_cm)
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "TrapGeometry":
        traps = data["traps"]
        return cls(
            n_traps=int(data["n_traps"]),
            r_min_nm=float(data["r_min_nm"]),
            r_max_nm=float(data["r_max_nm"]),
            epsilon_r=float(data["epsilon_r"]),
            radii_nm=np.array([t["r_nm"] for t in traps], dtype=float),
            angles_rad=np.array([t["theta_rad"] for t in traps], dtype=float),
            field_magnitudes_kv_cm=np.array([t["f_kv_cm"] for t in traps], dtype=float),
        )

    def save_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2, sort_keys=True))

    @classmethod
    def load_json(cls, path: str | Path) -> "TrapGeometry":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class FieldMoments:
    """Geometric moments S2, S4 of the trap field magnitudes and their ratio."""

    s2: float  # (kV/cm)^2
    s4: float  # (kV/cm)^4
    kappa_hat: float

    def __post_init__(self) -> None:
        if self.s2 < 0.0 or self.s4 < 0.0:
            raise ValueError("moments must be non-negative")
        if self.s2 > 0.0 and abs(self.kappa_hat - self.s4 / self.s2**2) > 1e-12 * max(1.0, self.kappa_hat):
            raise ValueError("kappa_hat must equal s4 / s2^2")


def sample_trap_geometry(
    n_traps: int,
    r_min_nm: float,
    r_max_nm: float,
    epsilon_r: float,
    seed: int,
    constants: PhysicalConstants = CONSTANTS,
) -> TrapGeometry:
    """Draw one trap-geometry realization, uniform in area over the annulus.

    Radii follow r = sqrt(r_min^2 + u (r_max^2 - r_min^2)) with u uniform,
    i.e. density proportional to r dr; angles are uniform on [0, 2*pi).
    Deterministic for a given seed.
    """
    if n_traps < 1:
        raise ValueError("n_traps must be >= 1")
    if not (0.0 < r_min_nm < r_max_nm):
        raise ValueError("annulus bounds must satisfy 0 < r_min < r_max")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    u = rng.random(n_traps)
    radii = np.sqrt(r_min_nm**2 + u * (r_max_nm**2 - r_min_nm**2))
    angles = rng.random(n_traps) * 2.0 * np.pi
    fields = trap_field_magnitude(radii, epsilon_r, constants)
    return TrapGeometry(
        n_traps=n_traps,
        r_min_nm=r_min_nm,
        r_max_nm=r_max_nm,
        epsilon_r=epsilon_r,
        radii_nm=radii,
        angles_rad=angles,
        field_magnitudes_kv_cm=np.asarray(fields, dtype=float),
    )


def field_moments(geometry: TrapGeometry) -> FieldMoments:
    """S2 = sum f_i^2, S4 = sum f_i^4 and kappa_hat = S4 / S2^2."""
    f2 = geometry.field_magnitudes_kv_cm**2
    s2 = float(f2.sum())
    s4 = float((f2**2).sum())
    return FieldMoments(s2=s2, s4=s4, kappa_hat=s4 / s2**2)


def kappa_hat_annulus(a: float, n_traps: int) -> float:
    """Closed-form kappa_hat for traps uniform in area over an annulus.

    ``a`` is the radius ratio r_max / r_min.  Returns
    (a^2 + 1 + a^-2) / (3 N); the degenerate shell a = 1 is well defined
    and returns the lower bound 1/N.
    """
    if n_traps < 1:
        raise ValueError("n_traps must be >= 1")
    if a < 1.0:
        raise ValueError("radius ratio a must be >= 1")
    if a == 1.0:
        return 1.0 / n_traps
    return (a**2 + 1.0 + a**-2) / (3.0 * n_traps)


def expected_annulus_moments(
    n_traps: int,
    r_min_nm: float,
    r_max_nm: float,
    epsilon_r: float,
    constants: PhysicalConstants = CONSTANTS,
) -> FieldMoments:
    """Ensemble-expected S2 and S4 for area-uniform traps in an annulus.

    E[f^2] = c^2 / (r_min^2 r_max^2) and
    E[f^4] = c^4 (r_min^-6 - r_max^-6) / (3 (r_max^2 - r_min^2)) with
    c = e / (4 pi eps0 eps_r).  The ratio of the expected moments equals
    ``kappa_hat_annulus`` exactly.
    """
    if n_traps < 1:
        raise ValueError("n_traps must be >= 1")
    if not (0.0 < r_min_nm < r_max_nm):
        raise ValueError("annulus bounds must satisfy 0 < r_min < r_max")
    if epsilon_r < 1.0:
        raise ValueError("epsilon_r must be >= 1")
    c = constants.coulomb_v_nm / epsilon_r * V_PER_NM_TO_KV_PER_CM  # kV/cm nm^2
    mean_f2 = c**2 / (r_min_nm**2 * r_max_nm**2)
    mean_f4 = c**4 * (r_min_nm**-6 - r_max_nm**-6) / (3.0 * (r_max_nm**2 - r_min_nm**2))
    s2 = n_traps * mean_f2
    s4 = n_traps * mean_f4
    return FieldMoments(s2=s2, s4=s4, kappa_hat=s4 / s2**2)
