"""Stochastic verification engine for the closed-form shift statistics.

Protocol: draw independent trap geometries, and for each geometry and each
sweep point draw stationary Bernoulli occupancy snapshots; form the total
vector field (bias plus occupied-trap fields), apply the Stark response,
and pool per-geometry means and variances.  The per-geometry closed-form
predictions (which use that geometry's S2 and S4) are averaged alongside,
so the agreement report isolates the isotropic-averaging step.

Child RNG streams derive from (master_seed, stream, indices) through
``numpy.random.SeedSequence`` spawn keys, so results are independent of
parallelization degree.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analytics import (
    SweepPoint,
    center_wavelength,
    mean_shift,
    variance_shift,
)
from .constants import GAUSSIAN_FWHM_FACTOR
from .errors import ConfigError
from .geometry import TrapGeometry, field_moments, trap_field_magnitude
from .lineshape import voigt_fwhm_approx
from .stark import FieldConversion, StarkResponse, local_field_from_voltage, stark_shift
from .suppression import (
    ElectricalSuppressionParams,
    OpticalSuppressionParams,
    occupancy_vs_field,
    occupancy_vs_power,
)

_GEOMETRY_STREAM = 0
_SNAPSHOT_STREAM = 1


@dataclass(frozen=True)
class GeometrySpec:
    n_traps: int
    r_min_nm: float
    r_max_nm: float
    epsilon_r: float


@dataclass(frozen=True)
class MCConfig:
    """Full specification of one Monte Carlo run.

    ``mode`` selects the suppression model driving the occupancy along the
    control sweep: "power" uses ``optical`` on a grid of powers (nW);
    "field" uses ``electrical`` with ``conversion`` (a ``FieldConversion``
    or a kV/cm-per-volt factor) on a grid of voltages.
    """

    n_geometries: int
    n_snapshots: int
    geometry: GeometrySpec
    mode: str
    controls: tuple[float, ...]
    stark: StarkResponse
    master_seed: int
    lambda0_nm: float = 440.0
    optical: OpticalSuppressionParams | None = None
    electrical: ElectricalSuppressionParams | None = None
    conversion: FieldConversion | float | None = None

    def validate(self) -> None:
        bad: list[str] = []
        if self.n_geometries < 1:
            bad.append("n_geometries (must be >= 1)")
        if self.n_snapshots < 2:
            bad.append("n_snapshots (must be >= 2)")
        if self.geometry.n_traps < 1:
            bad.append("geometry.n_traps (must be >= 1)")
        if not (0.0 < self.geometry.r_min_nm < self.geometry.r_max_nm):
            bad.append("geometry.r_min_nm/r_max_nm (need 0 < r_min < r_max)")
        if self.geometry.epsilon_r < 1.0:
            bad.append("geometry.epsilon_r (must be >= 1)")
        if self.mode not in ("power", "field"):
            bad.append("mode (must be 'power' or 'field')")
        if len(self.controls) == 0:
            bad.append("controls (sweep grid is empty)")
        if self.mode == "power":
            if self.optical is None:
                bad.append("optical (required for mode 'power')")
            if any(c < 0 for c in self.controls):
                bad.append("controls (powers must be non-negative)")
        if self.mode == "field":
            if self.electrical is None:
                bad.append("electrical (required for mode 'field')")
            if self.conversion is None:
                bad.append("conversion (required for mode 'field')")
        if self.lambda0_nm <= 0.0:
            bad.append("lambda0_nm (must be positive)")
        if bad:
            raise ConfigError("invalid Monte Carlo config: " + "; ".join(bad))

    def sweep_fields(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-point (occupancy, bias-field magnitude in kV/cm)."""
        controls = np.asarray(self.controls, dtype=float)
        if self.mode == "power":
            p = np.asarray(occupancy_vs_power(controls, self.optical), dtype=float)
            e0 = np.zeros_like(controls)
        else:
            if isinstance(self.conversion, FieldConversion):
                e0 = np.array([local_field_from_voltage(v, self.conversion).f_loc_kv_cm
                               for v in controls])
            else:
                e0 = float(self.conversion) * controls
            e0 = np.abs(e0)
            p = np.asarray(occupancy_vs_field(e0, self.electrical), dtype=float)
        return p, e0


@dataclass(frozen=True)
class MCResult:
    """Pooled statistics per sweep point plus per-geometry raw moments.

    ``mean_shift_mev[j]`` averages the per-geometry snapshot means at sweep
    point j; ``var_shift_mev2[j]`` averages the per-geometry snapshot
    variances.  ``analytic_*`` are the closed-form predictions evaluated
    per geometry (quadratic response) and averaged the same way, and
    ``z_mean``/``z_var`` are the agreement ratios |MC - analytic| / stderr
    of the per-geometry differences.
    """

    controls: np.ndarray
    occupancies: np.ndarray
    e0_kv_cm: np.ndarray
    mean_shift_mev: np.ndarray
    std_shift_mev: np.ndarray
    stderr_mean: np.ndarray
    stderr_std: np.ndarray
    center_wavelength_nm: np.ndarray
    gaussian_fwhm_mev: np.ndarray
    analytic_mean_mev: np.ndarray
    analytic_std_mev: np.ndarray
    z_mean: np.ndarray
    z_var: np.ndarray
    per_geometry_means: np.ndarray  # shape (n_geometries, n_points)
    per_geometry_vars: np.ndarray
    lambda0_nm: float = 440.0
    n_snapshots: int = 0

    @property
    def n_points(self) -> int:
        return self.controls.size


def _geometry_for_index(config: MCConfig, g: int) -> TrapGeometry:
    seed = np.random.SeedSequence(config.master_seed, spawn_key=(_GEOMETRY_STREAM, g))
    rng = np.random.default_rng(seed)
    spec = config.geometry
    u = rng.random(spec.n_traps)
    radii = np.sqrt(spec.r_min_nm**2 + u * (spec.r_max_nm**2 - spec.r_min_nm**2))
    angles = rng.random(spec.n_traps) * 2.0 * np.pi
    return TrapGeometry(
        n_traps=spec.n_traps, r_min_nm=spec.r_min_nm, r_max_nm=spec.r_max_nm,
        epsilon_r=spec.epsilon_r, radii_nm=radii, angles_rad=angles,
        field_magnitudes_kv_cm=np.asarray(trap_field_magnitude(radii, spec.epsilon_r)),
    )


def _geometry_rows(config: MCConfig, g: int, p_grid: np.ndarray, e0_grid: np.ndarray):
    """Per-point snapshot mean/variance and closed-form mean/variance for one geometry."""
    geom = _geometry_for_index(config, g)
    fx, fy = geom.field_vectors_kv_cm
    moments = field_moments(geom)
    n_pts = p_grid.size
    mc_mean = np.empty(n_pts)
    mc_var = np.empty(n_pts)
    an_mean = np.empty(n_pts)
    an_var = np.empty(n_pts)
    for j in range(n_pts):
        seed = np.random.SeedSequence(config.master_seed, spawn_key=(_SNAPSHOT_STREAM, g, j))
        rng = np.random.default_rng(seed)
        snaps = rng.random((config.n_snapshots, geom.n_traps)) < p_grid[j]
        ex = e0_grid[j] + snaps @ fx  # bias along x; trap angles are isotropic
        ey = snaps @ fy
        dw = stark_shift(np.hypot(ex, ey), config.stark)
        mc_mean[j] = dw.mean()
        mc_var[j] = dw.var(ddof=1)
        an_mean[j] = mean_shift(e0_grid[j], p_grid[j], moments.s2, config.stark.beta)
        an_var[j] = variance_shift(e0_grid[j], p_grid[j], moments.s2, moments.s4,
                                   config.stark.beta)
    return mc_mean, mc_var, an_mean, an_var


def run_mc(config: MCConfig, threads: int = 1) -> MCResult:
    """Run the sampling protocol; deterministic for a given master seed,
    independent of the thread count."""
    config.validate()
    p_grid, e0_grid = config.sweep_fields()
    n_geom = config.n_geometries

    def worker(g: int):
        return _geometry_rows(config, g, p_grid, e0_grid)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(worker, range(n_geom)))
    else:
        rows = [worker(g) for g in range(n_geom)]

    mc_means = np.stack([r[0] for r in rows])   # (n_geom, n_points)
    mc_vars = np.stack([r[1] for r in rows])
    an_means = np.stack([r[2] for r in rows])
    an_vars = np.stack([r[3] for r in rows])

    mean = mc_means.mean(axis=0)
    var = mc_vars.mean(axis=0)
    std = np.sqrt(var)
    if n_geom > 1:
        stderr_mean = mc_means.std(axis=0, ddof=1) / math.sqrt(n_geom)
        stderr_var = mc_vars.std(axis=0, ddof=1) / math.sqrt(n_geom)
        d_mean = mc_means - an_means
        d_var = mc_vars - an_vars
        se_dm = d_mean.std(axis=0, ddof=1) / math.sqrt(n_geom)
        se_dv = d_var.std(axis=0, ddof=1) / math.sqrt(n_geom)
        with np.errstate(divide="ignore", invalid="ignore"):
            z_mean = np.where(se_dm > 0, np.abs(d_mean.mean(axis=0)) / se_dm, 0.0)
            z_var = np.where(se_dv > 0, np.abs(d_var.mean(axis=0)) / se_dv, 0.0)
    else:
        stderr_mean = np.full_like(mean, np.nan)
        stderr_var = np.full_like(mean, np.nan)
        z_mean = np.full_like(mean, np.nan)
        z_var = np.full_like(mean, np.nan)
    with np.errstate(divide="ignore", invalid="ignore"):
        stderr_std = np.where(std > 0, stderr_var / (2.0 * std), 0.0)

    centers = np.array([center_wavelength(m, config.lambda0_nm) for m in mean])
    return MCResult(
        controls=np.asarray(config.controls, dtype=float),
        occupancies=p_grid,
        e0_kv_cm=e0_grid,
        mean_shift_mev=mean,
        std_shift_mev=std,
        stderr_mean=stderr_mean,
        stderr_std=stderr_std,
        center_wavelength_nm=centers,
        gaussian_fwhm_mev=GAUSSIAN_FWHM_FACTOR * std,
        analytic_mean_mev=an_means.mean(axis=0),
        analytic_std_mev=np.sqrt(an_vars.mean(axis=0)),
        z_mean=z_mean,
        z_var=z_var,
        per_geometry_means=mc_means,
        per_geometry_vars=mc_vars,
        lambda0_nm=config.lambda0_nm,
        n_snapshots=config.n_snapshots,
    )


@dataclass(frozen=True)
class ExactMoments:
    mean_mev: float
    variance_mev2: float


def brute_force_moments(
    geometry: TrapGeometry,
    p: float,
    e0_vector: tuple[float, float],
    beta: float,
) -> ExactMoments:
    """Exact shift moments by enumerating all 2^N occupancy configurations.

    ``e0_vector`` is the bias field as (magnitude kV/cm, angle rad).  The
    quadratic response beta |E|^2 is used with full vector fields, so the
    result is exact for a fixed geometry before any angle averaging.
    Refuses N > 20.
    """
    n = geometry.n_traps
    if n > 20:
        raise ValueError(f"enumeration over 2^{n} states refused; use N <= 20")
    if not (0.0 <= p <= 1.0):
        raise ValueError("p must lie in [0, 1]")
    e0_mag, e0_ang = e0_vector
    fx, fy = geometry.field_vectors_kv_cm
    codes = np.arange(2**n, dtype=np.int64)
    bits = (codes[:, None] >> np.arange(n)[None, :]) & 1  # (2^N, N)
    k = bits.sum(axis=1)
    if p in (0.0, 1.0):
        weights = np.where(k == (n if p == 1.0 else 0), 1.0, 0.0)
    else:
        weights = np.exp(k * math.log(p) + (n - k) * math.log(1.0 - p))
    ex = e0_mag * math.cos(e0_ang) + bits @ fx
    ey = e0_mag * math.sin(e0_ang) + bits @ fy
    dw = beta * (ex**2 + ey**2)
    mean = float(weights @ dw)
    second = float(weights @ dw**2)
    return ExactMoments(mean_mev=mean, variance_mev2=second - mean**2)


def brute_force_reference(config: MCConfig, result: MCResult):
    """Exact-vs-MC agreement via enumeration, for small trap counts.

    Re-derives the run's geometries, computes exact per-geometry moments by
    enumeration at every sweep point, and returns per-point
    (exact_mean, exact_std, z_mean, z_var) where the z values compare the
    Monte Carlo snapshot statistics against the exact references.  Only the
    quadratic response term is enumerated, matching the closed-form model.
    """
    if config.geometry.n_traps > 10:
        raise ValueError("brute-force reference is limited to N <= 10 traps")
    p_grid, e0_grid = config.sweep_fields()
    n_geom, n_pts = config.n_geometries, p_grid.size
    exact_mean = np.empty((n_geom, n_pts))
    exact_var = np.empty((n_geom, n_pts))
    for g in range(n_geom):
        geom = _geometry_for_index(config, g)
        for j in range(n_pts):
            moments = brute_force_moments(geom, p_grid[j], (e0_grid[j], 0.0),
                                          config.stark.beta)
            exact_mean[g, j] = moments.mean_mev
            exact_var[g, j] = moments.variance_mev2
    d_mean = result.per_geometry_means - exact_mean
    d_var = result.per_geometry_vars - exact_var
    se_m = d_mean.std(axis=0, ddof=1) / math.sqrt(n_geom)
    se_v = d_var.std(axis=0, ddof=1) / math.sqrt(n_geom)
    with np.errstate(divide="ignore", invalid="ignore"):
        z_mean = np.where(se_m > 0, np.abs(d_mean.mean(axis=0)) / se_m, 0.0)
        z_var = np.where(se_v > 0, np.abs(d_var.mean(axis=0)) / se_v, 0.0)
    return exact_mean.mean(axis=0), np.sqrt(exact_var.mean(axis=0)), z_mean, z_var


def write_exact_reference_csv(config: MCConfig, result: MCResult,
                              path: str | Path) -> None:
    """Exact-vs-MC report (enumeration oracle), available for N <= 10."""
    exact_mean, exact_std, z_mean, z_var = brute_force_reference(config, result)
    with Path(path).open("w") as fh:
        fh.write("control,p,mc_mean_mev,exact_mean_mev,z_mean,"
                 "mc_std_mev,exact_std_mev,z_var\n")
        for j in range(result.n_points):
            values = (result.controls[j], result.occupancies[j],
                      result.mean_shift_mev[j], exact_mean[j], z_mean[j],
                      result.std_shift_mev[j], exact_std[j], z_var[j])
            fh.write(",".join(f"{float(v):.12g}" for v in values) + "\n")


def mc_to_sweep_table(result: MCResult, gamma_lorentz_mev: float = 0.0) -> list[SweepPoint]:
    """Align Monte Carlo output with the analytic sweep schema.

    With the default gamma the FWHM column is the pure Gaussian FWHM
    2 sqrt(2 ln 2) std; pass the Lorentzian half-width used by an analytic
    sweep to make the columns directly comparable.
    """
    points = []
    for j in range(result.n_points):
        fwhm_g = result.gaussian_fwhm_mev[j]
        if gamma_lorentz_mev > 0.0:
            fwhm = voigt_fwhm_approx(fwhm_g, 2.0 * gamma_lorentz_mev)
        else:
            fwhm = fwhm_g
        points.append(SweepPoint(
            control=float(result.controls[j]),
            e0_kv_cm=float(result.e0_kv_cm[j]),
            p=float(result.occupancies[j]),
            mu_mev=float(result.mean_shift_mev[j]),
            sigma2_mev2=float(result.std_shift_mev[j] ** 2),
            fwhm_voigt_mev=float(fwhm),
            center_nm=float(result.center_wavelength_nm[j]),
        ))
    return points


_MC_CSV_COLUMNS = ("control", "e0_kv_cm", "p", "mu_mev", "sigma2_mev2",
                   "fwhm_voigt_mev", "center_nm", "std_mev",
                   "stderr_mean_mev", "stderr_std_mev")


def write_mc_csv(result: MCResult, path: str | Path,
                 gamma_lorentz_mev: float = 0.0) -> None:
    """MC table in the analytics sweep schema plus stderr columns."""
    points = mc_to_sweep_table(result, gamma_lorentz_mev)
    with Path(path).open("w") as fh:
        fh.write(",".join(_MC_CSV_COLUMNS) + "\n")
        for j, pt in enumerate(points):
            values = (pt.control, pt.e0_kv_cm, pt.p, pt.mu_mev, pt.sigma2_mev2,
                      pt.fwhm_voigt_mev, pt.center_nm, result.std_shift_mev[j],
                      result.stderr_mean[j], result.stderr_std[j])
            fh.write(",".join(f"{float(v):.12g}" for v in values) + "\n")


def write_agreement_csv(result: MCResult, path: str | Path) -> None:
    """Per-point |MC - analytic| / stderr report for mean and variance."""
    with Path(path).open("w") as fh:
        fh.write("control,p,mc_mean_mev,analytic_mean_mev,z_mean,"
                 "mc_std_mev,analytic_std_mev,z_var\n")
        for j in range(result.n_points):
            values = (result.controls[j], result.occupancies[j],
                      result.mean_shift_mev[j], result.analytic_mean_mev[j],
                      result.z_mean[j], result.std_shift_mev[j],
                      result.analytic_std_mev[j], result.z_var[j])
            fh.write(",".join(f"{float(v):.12g}" for v in values) + "\n")


def mc_result_to_json_dict(result: MCResult) -> dict:
    arrays = {
        "controls": result.controls, "occupancies": result.occupancies,
        "e0_kv_cm": result.e0_kv_cm, "mean_shift_mev": result.mean_shift_mev,
        "std_shift_mev": result.std_shift_mev, "stderr_mean": result.stderr_mean,
        "stderr_std": result.stderr_std,
        "center_wavelength_nm": result.center_wavelength_nm,
        "gaussian_fwhm_mev": result.gaussian_fwhm_mev,
        "analytic_mean_mev": result.analytic_mean_mev,
        "analytic_std_mev": result.analytic_std_mev,
        "z_mean": result.z_mean, "z_var": result.z_var,
    }
    out = {k: [float(v) for v in arr] for k, arr in arrays.items()}
    out["lambda0_nm"] = result.lambda0_nm
    out["n_snapshots"] = result.n_snapshots
    return out


def write_mc_json(result: MCResult, path: str | Path) -> None:
    Path(path).write_text(json.dumps(mc_result_to_json_dict(result), indent=2,
                                     sort_keys=True))
