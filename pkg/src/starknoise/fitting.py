"""Nonlinear least-squares extraction of spectral and suppression-model
parameters: Voigt peaks, Zeeman splittings, the Stark polynomial, saturation
and polarization curves, and the optical/electrical suppression models.

All fits run a bounded trust-region least-squares core (max 500 iterations,
gradient tolerance 1e-10) and are deterministic given the data and the seed;
the two suppression fits add seeded Latin-hypercube multi-start because
their models are multimodal.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import least_squares
from scipy.signal import find_peaks
from scipy.stats import qmc

from .analytics import energy_to_wavelength_shift, variance_shift_factored
from .constants import CONSTANTS, GAUSSIAN_FWHM_FACTOR
from .errors import DataParseError, DegenerateDataError
from .lineshape import SpectrumRecord, VoigtParams, voigt_fwhm_approx, voigt_profile
from .stark import FieldConversion, local_field_from_voltage
from .suppression import tunneling_factor

_RELATIVE_RESIDUAL_FLAG = 0.05  # flag fits whose residual exceeds 5% of the data norm


@dataclass
class FitResult:
    """Fitted parameters with 1-sigma uncertainties and diagnostics."""

    parameters: dict[str, float]
    uncertainties: dict[str, float]
    residual_norm: float
    n_iterations: int
    converged: bool
    provenance: dict
    flags: list[str] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "parameters": self.parameters,
            "uncertainties": self.uncertainties,
            "residual_norm": self.residual_norm,
            "n_iterations": self.n_iterations,
            "converged": self.converged,
            "provenance": self.provenance,
            "flags": self.flags,
        }

    def save_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2, sort_keys=True))


@dataclass(frozen=True)
class MeasurementSeries:
    """Paired control/observable samples with optional 1-sigma errors."""

    x: np.ndarray
    y: np.ndarray
    y_err: np.ndarray | None = None

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 1 or x.shape != y.shape:
            raise ValueError("x and y must be equal-length 1-D arrays")
        err = None
        if self.y_err is not None:
            err = np.asarray(self.y_err, dtype=float)
            if err.shape != x.shape:
                raise ValueError("y_err must match x in length")
            if np.any(err <= 0.0):
                raise ValueError("y_err must be strictly positive")
            err.setflags(write=False)
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "y_err", err)

    @classmethod
    def from_csv(cls, path: str | Path) -> "MeasurementSeries":
        """Read 'x,y[,y_err]' rows; a single header row is permitted."""
        xs, ys, es = [], [], []
        lines = Path(path).read_text().splitlines()
        for i, line in enumerate(lines, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split(",")
            if len(parts) not in (2, 3):
                raise DataParseError(f"expected 2 or 3 columns, got {len(parts)}", line=i)
            try:
                row = [float(p) for p in parts]
            except ValueError:
                if i == 1:
                    continue  # header row
                raise DataParseError(f"non-numeric row {stripped!r}", line=i) from None
            xs.append(row[0])
            ys.append(row[1])
            if len(row) == 3:
                es.append(row[2])
        if not xs:
            raise DataParseError("no data rows found")
        if es and len(es) != len(xs):
            raise DataParseError("y_err present in some rows but not all")
        return cls(x=np.array(xs), y=np.array(ys),
                   y_err=np.array(es) if es else None)


def _covariance(jac: np.ndarray, ssr: float, n_params: int) -> np.ndarray:
    """Parameter covariance s^2 (J^T J)^-1 via SVD, robust to rank deficiency."""
    m = jac.shape[0]
    dof = max(m - n_params, 1)
    s2 = ssr / dof
    _, sv, vt = np.linalg.svd(jac, full_matrices=False)
    threshold = np.finfo(float).eps * max(jac.shape) * (sv[0] if sv.size else 0.0)
    inv_sv2 = np.zeros_like(sv)
    good = sv > threshold
    inv_sv2[good] = 1.0 / sv[good] ** 2
    return (vt.T * inv_sv2) @ vt * s2


def _run_least_squares(
    residual_fn: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    bounds: tuple[np.ndarray, np.ndarray],
    names: Sequence[str],
    provenance: dict,
    data_norm: float,
) -> FitResult:
    x0 = np.clip(x0, bounds[0], bounds[1])
    res = least_squares(
        residual_fn, x0, bounds=bounds, method="trf",
        gtol=1e-10, ftol=1e-14, xtol=1e-14,
        max_nfev=500 * (len(x0) + 1),
    )
    cov = _covariance(res.jac, 2.0 * res.cost, len(x0))
    sigmas = np.sqrt(np.maximum(np.diag(cov), 0.0))
    residual_norm = float(np.linalg.norm(res.fun))
    flags = []
    if data_norm > 0 and residual_norm > _RELATIVE_RESIDUAL_FLAG * data_norm:
        flags.append("high_residual")
    result = FitResult(
        parameters={n: float(v) for n, v in zip(names, res.x)},
        uncertainties={n: float(s) for n, s in zip(names, sigmas)},
        residual_norm=residual_norm,
        n_iterations=int(res.nfev),
        converged=bool(res.success),
        provenance=dict(provenance, optimizer_status=int(res.status),
                        initial_guess=[float(v) for v in x0]),
        flags=flags,
    )
    result.provenance["covariance"] = [[float(v) for v in row] for row in cov]
    return result


def _multistart_least_squares(
    residual_fn, bounds, start_box, names, provenance, data_norm,
    n_starts: int = 8, seed: int = 0, x0: np.ndarray | None = None,
) -> FitResult:
    """Run seeded Latin-hypercube starts plus an optional heuristic start."""
    lo, hi = np.asarray(start_box[0], dtype=float), np.asarray(start_box[1], dtype=float)
    sampler = qmc.LatinHypercube(d=lo.size, seed=seed)
    starts = [lo + sample * (hi - lo) for sample in sampler.random(n_starts)]
    if x0 is not None:
        starts.insert(0, np.asarray(x0, dtype=float))
    best: FitResult | None = None
    best_cost = np.inf
    for start in starts:
        fit = _run_least_squares(residual_fn, start, bounds, names, provenance, data_norm)
        cost = fit.residual_norm if fit.converged else np.inf
        if cost < best_cost:
            best, best_cost = fit, cost
    if best is None or not math.isfinite(best_cost):
        # keep the best-so-far parameters even on failure
        best = _run_least_squares(residual_fn, starts[0], bounds, names, provenance,
                                  data_norm)
        best.converged = False
        best.flags.append("multistart_no_convergence")
    best.provenance["n_starts"] = len(starts)
    best.provenance["multistart_seed"] = seed
    return best


class _ParamSpace:
    """Named parameter box with optional pin/narrow constraints.

    A constraint may be a number (parameter pinned, removed from the free
    set) or a (lo, hi) pair narrowing both the bounds and the multi-start
    box.
    """

    def __init__(self, names, lo, hi, start_lo, start_hi, x0, constraints=None):
        constraints = dict(constraints or {})
        unknown = set(constraints) - set(names)
        if unknown:
            raise ValueError(f"unknown constrained parameters: {sorted(unknown)}")
        self.names = list(names)
        self.fixed: dict[str, float] = {}
        free = []
        arrays = [np.asarray(a, dtype=float).copy()
                  for a in (lo, hi, start_lo, start_hi, x0)]
        for i, name in enumerate(self.names):
            spec = constraints.get(name)
            if spec is None:
                free.append(i)
            elif np.isscalar(spec):
                self.fixed[name] = float(spec)
            else:
                c_lo, c_hi = float(spec[0]), float(spec[1])
                arrays[0][i], arrays[1][i] = c_lo, c_hi
                arrays[2][i] = max(arrays[2][i], c_lo)
                arrays[3][i] = min(arrays[3][i], c_hi)
                if arrays[3][i] <= arrays[2][i]:
                    arrays[2][i], arrays[3][i] = c_lo, c_hi
                arrays[4][i] = float(np.clip(arrays[4][i], c_lo, c_hi))
                free.append(i)
        self._free = free
        self._lo, self._hi, self._slo, self._shi, self._x0 = arrays

    @property
    def free_names(self):
        return [self.names[i] for i in self._free]

    @property
    def bounds(self):
        return self._lo[self._free], self._hi[self._free]

    @property
    def start_box(self):
        return self._slo[self._free], self._shi[self._free]

    @property
    def x0(self):
        return self._x0[self._free]

    def full(self, theta_free) -> dict[str, float]:
        values = dict(self.fixed)
        for name, value in zip(self.free_names, theta_free):
            values[name] = float(value)
        return values

    def finalize(self, fit: FitResult) -> FitResult:
        for name, value in self.fixed.items():
            fit.parameters[name] = value
            fit.uncertainties[name] = 0.0
        return fit


# ---------------------------------------------------------------------------
# Voigt peak fits
# ---------------------------------------------------------------------------

def _estimate_voigt_init(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float, float]:
    """Moment-style initial guess (center, sigma, gamma, area) for one peak."""
    i_max = int(np.argmax(y))
    center = float(x[i_max])
    baseline = float(np.percentile(y, 5))
    half = baseline + (y[i_max] - baseline) / 2.0
    above = y > half
    span = float(x.max() - x.min())
    if above.sum() >= 2:
        fwhm = float(x[above].max() - x[above].min())
    else:
        fwhm = span / 10.0
    fwhm = min(max(fwhm, span / max(len(x), 10)), span)
    # split the width evenly between the two components
    fwhm0 = 2.0 / (math.sqrt(5.0) + 1.0) * fwhm
    sigma = fwhm0 / GAUSSIAN_FWHM_FACTOR
    gamma = fwhm0 / 2.0
    area = float(np.trapezoid(np.clip(y - baseline, 0.0, None), x))
    if area <= 0.0:
        area = float((y.max() - baseline) * fwhm)
    return center, sigma, gamma, max(area, 1e-12)


def fit_voigt(
    spectrum: SpectrumRecord,
    init: VoigtParams | None = None,
    fix_gamma_mev: float | None = None,
) -> FitResult:
    """Least-squares single-Voigt fit of a spectrum.

    Reports center, sigma_g, gamma_lorentz, amplitude and the derived FWHM.
    ``fix_gamma_mev`` pins the Lorentzian half-width, for
    spectrometer-limited data.
    """
    x, y = spectrum.x, spectrum.intensity
    if x.size < 8:
        raise DegenerateDataError("need at least 8 samples spanning the peak")
    if np.ptp(y) <= 0.0:
        raise DegenerateDataError("flat spectrum: no peak to fit")
    if init is not None:
        c0, s0, g0, a0 = (init.center_mev, init.sigma_g_mev,
                          init.gamma_lorentz_mev, init.amplitude)
    else:
        c0, s0, g0, a0 = _estimate_voigt_init(x, y)
    span = float(x.max() - x.min())
    tiny = 1e-9 * span

    if fix_gamma_mev is None:
        names = ["center", "sigma_g", "gamma_lorentz", "amplitude"]
        x0 = np.array([c0, max(s0, tiny), max(g0, tiny), a0])
        lo = np.array([x.min(), 0.0, 0.0, 1e-12 * a0])
        hi = np.array([x.max(), span, span, np.inf])

        def residual(theta):
            c, s, g, a = theta
            model = voigt_profile(x, VoigtParams(c, max(s, 0.0), max(g, 0.0), a)) \
                if (s > 0 or g > 0) else np.zeros_like(x)
            return model - y
    else:
        names = ["center", "sigma_g", "amplitude"]
        x0 = np.array([c0, max(s0, tiny), a0])
        lo = np.array([x.min(), 0.0, 1e-12 * a0])
        hi = np.array([x.max(), span, np.inf])

        def residual(theta):
            c, s, a = theta
            return voigt_profile(x, VoigtParams(c, max(s, tiny), fix_gamma_mev, a)) - y

    fit = _run_least_squares(residual, x0, (lo, hi), names,
                             {"fit": "voigt", "fix_gamma_mev": fix_gamma_mev},
                             float(np.linalg.norm(y)))
    gamma = fix_gamma_mev if fix_gamma_mev is not None else fit.parameters["gamma_lorentz"]
    if fix_gamma_mev is not None:
        fit.parameters["gamma_lorentz"] = float(fix_gamma_mev)
        fit.uncertainties["gamma_lorentz"] = 0.0
    fit.parameters["fwhm"] = voigt_fwhm_approx(
        GAUSSIAN_FWHM_FACTOR * fit.parameters["sigma_g"], 2.0 * gamma)
    return fit


def fit_double_voigt_splitting(spectrum: SpectrumRecord) -> FitResult:
    """Simultaneous two-Voigt fit; the splitting is |center2 - center1|.

    The two peaks share their widths (same transition, split line).  Raises
    ``DegenerateDataError`` when the peaks are not resolvable, recommending
    a fixed-width fit.
    """
    x, y = spectrum.x, spectrum.intensity
    if x.size < 12:
        raise DegenerateDataError("need at least 12 samples spanning both peaks")
    if np.ptp(y) <= 0.0:
        raise DegenerateDataError("flat spectrum: no peaks to fit")
    c0, s0, g0, a0 = _estimate_voigt_init(x, y)
    fwhm0 = voigt_fwhm_approx(GAUSSIAN_FWHM_FACTOR * s0, 2.0 * g0)

    # second peak: a genuine local maximum of comparable height away from the first
    baseline = float(np.percentile(y, 5))
    prominence = 0.2 * (float(y.max()) - baseline)
    peak_idx, _ = find_peaks(y, prominence=prominence)
    candidates = [i for i in peak_idx if abs(x[i] - c0) >= 0.5 * fwhm0]
    if not candidates:
        raise DegenerateDataError(
            "peaks not resolvable (separation below ~0.5 FWHM); "
            "fit a single Voigt with fixed width instead")
    c1 = float(x[max(candidates, key=lambda i: y[i])])
    lo_c, hi_c = min(c0, c1), max(c0, c1)

    span = float(x.max() - x.min())
    names = ["center_1", "center_2", "sigma_g", "gamma_lorentz",
             "amplitude_1", "amplitude_2"]
    x0 = np.array([lo_c, hi_c, s0, g0, a0 / 2.0, a0 / 2.0])
    lo = np.array([x.min(), x.min(), 0.0, 0.0, 0.0, 0.0])
    hi = np.array([x.max(), x.max(), span, span, np.inf, np.inf])
    tiny = 1e-9 * span

    def residual(theta):
        c1_, c2_, s, g, a1, a2 = theta
        s = max(s, tiny)
        model = (voigt_profile(x, VoigtParams(c1_, s, g, max(a1, 1e-300)))
                 + voigt_profile(x, VoigtParams(c2_, s, g, max(a2, 1e-300))))
        return model - y

    fit = _run_least_squares(residual, x0, (lo, hi), names,
                             {"fit": "double_voigt"}, float(np.linalg.norm(y)))
    p, u = fit.parameters, fit.uncertainties
    split = abs(p["center_2"] - p["center_1"])
    cov = np.array(fit.provenance["covariance"])
    var_split = cov[0, 0] + cov[1, 1] - 2.0 * cov[0, 1]
    fit.parameters["split"] = split
    fit.uncertainties["split"] = math.sqrt(max(var_split, 0.0))
    fit.parameters["fwhm"] = voigt_fwhm_approx(
        GAUSSIAN_FWHM_FACTOR * p["sigma_g"], 2.0 * p["gamma_lorentz"])
    return fit


# ---------------------------------------------------------------------------
# Linear-model fits
# ---------------------------------------------------------------------------

def fit_zeeman(series: MeasurementSeries) -> FitResult:
    """Linear splitting-versus-field fit through the origin.

    The slope of splitting (meV) against field (T) in units of the Bohr
    magneton is the effective g-factor.
    """
    b, de = series.x, series.y
    if b.size < 3:
        raise DegenerateDataError("need at least 3 field points")
    sxx = float(b @ b)
    if sxx == 0.0:
        raise DegenerateDataError("all fields are zero")
    slope = float(b @ de) / sxx
    resid = de - slope * b
    dof = max(b.size - 1, 1)
    sigma_slope = math.sqrt(float(resid @ resid) / dof / sxx)
    g = slope / CONSTANTS.bohr_magneton_mev_t
    sigma_g = sigma_slope / CONSTANTS.bohr_magneton_mev_t
    flags = []
    if np.all(de == 0.0):
        sigma_g = math.inf
        flags.append("degenerate_zero_splittings")
    return FitResult(
        parameters={"g_effective": g},
        uncertainties={"g_effective": sigma_g},
        residual_norm=float(np.linalg.norm(resid)),
        n_iterations=1,
        converged=True,
        provenance={"fit": "zeeman"},
        flags=flags,
    )


def zeeman_g_factors(g_h: float, g_v: float) -> dict[str, float]:
    """Electron and heavy-hole composites from the two polarization slopes."""
    return {"g_e": (g_h + g_v) / 2.0, "three_g_hh": (g_h - g_v) / 2.0}


def fit_stark_polynomial(series: MeasurementSeries,
                         conv: FieldConversion | float) -> FitResult:
    """Fit the center shift versus voltage to a quartic in the local field.

    Converts voltage to the local field, then solves the linear problem
    dE = d F + beta F^2 + c3 F^3 + c4 F^4 (no constant term), reporting
    coefficients in meV (cm/kV)^n.
    """
    v, de = series.x, series.y
    if v.size < 6:
        raise DegenerateDataError("need at least 6 voltage points")
    if isinstance(conv, FieldConversion):
        f = np.array([local_field_from_voltage(vv, conv).f_loc_kv_cm for vv in v])
    else:
        f = float(conv) * v
    design = np.column_stack([f, f**2, f**3, f**4])
    scale = np.abs(design).max(axis=0)
    if np.any(scale == 0.0) or np.linalg.cond(design / scale) > 1e10:
        raise DegenerateDataError(
            "ill-conditioned Stark design matrix: widen the voltage range")
    w = np.ones_like(de) if series.y_err is None else 1.0 / series.y_err
    design_w = design / scale * w[:, None]
    coef_scaled, *_ = np.linalg.lstsq(design_w, de * w, rcond=None)
    coef = coef_scaled / scale
    resid = de - design @ coef
    ssr = float((resid * w) @ (resid * w))
    cov = _covariance(design * w[:, None], ssr, 4)
    names = ["d", "beta", "c3", "c4"]
    return FitResult(
        parameters={n: float(c) for n, c in zip(names, coef)},
        uncertainties={n: float(math.sqrt(max(cov[i, i], 0.0)))
                       for i, n in enumerate(names)},
        residual_norm=float(np.linalg.norm(resid)),
        n_iterations=1,
        converged=True,
        provenance={"fit": "stark_polynomial"},
    )


def fit_saturation(series: MeasurementSeries) -> FitResult:
    """Fit the two-level saturation relation I = I_sat P / (P + P_sat)."""
    power, intensity = series.x, series.y
    if power.size < 4:
        raise DegenerateDataError("need at least 4 power points")
    if np.ptp(intensity) <= 0.0:
        raise DegenerateDataError("flat intensity data")
    i0 = float(intensity.max()) * 1.2
    half = intensity.max() / 2.0
    above = intensity > half
    p0 = float(power[above].min()) if above.any() else float(np.median(power))
    p0 = max(p0, 1e-9)

    def residual(theta):
        i_sat, p_sat = theta
        return i_sat * power / (power + p_sat) - intensity

    fit = _run_least_squares(
        residual, np.array([i0, p0]),
        (np.array([0.0, 1e-12]), np.array([np.inf, np.inf])),
        ["i_sat", "p_sat"], {"fit": "saturation"}, float(np.linalg.norm(intensity)))
    resid_std = fit.residual_norm / math.sqrt(max(power.size - 2, 1))
    drops = np.diff(intensity) < -3.0 * resid_std
    if drops.any():
        fit.flags.append("nonmonotonic_data")
    p_sat, sig = fit.parameters["p_sat"], fit.uncertainties["p_sat"]
    if p_sat > 0 and sig / p_sat > 1.0:
        fit.flags.append("p_sat_poorly_constrained")
    return fit


def fit_polarization(series: MeasurementSeries) -> FitResult:
    """Fit I(theta) = I0 + I1 cos[2(theta - theta0)]; visibility is I1/I0."""
    theta, intensity = series.x, series.y
    if theta.size < 5:
        raise DegenerateDataError("need at least 5 angles")
    if float(theta.max() - theta.min()) < math.pi / 2.0 - 1e-9:
        raise DegenerateDataError("angles must span at least half a period (pi/2)")
    design = np.column_stack([np.ones_like(theta), np.cos(2.0 * theta),
                              np.sin(2.0 * theta)])
    coef, *_ = np.linalg.lstsq(design, intensity, rcond=None)
    i0, a, b = (float(c) for c in coef)
    if i0 <= 0.0:
        raise DegenerateDataError("mean intensity I0 must be positive")
    resid = intensity - design @ coef
    cov = _covariance(design, float(resid @ resid), 3)
    i1 = math.hypot(a, b)
    theta0 = 0.5 * math.atan2(b, a)
    visibility = i1 / i0
    # delta-method propagation for I1 and V = I1/I0
    if i1 > 0:
        grad_i1 = np.array([0.0, a / i1, b / i1])
        var_i1 = float(grad_i1 @ cov @ grad_i1)
        grad_v = np.array([-i1 / i0**2, a / (i1 * i0), b / (i1 * i0)])
        var_v = float(grad_v @ cov @ grad_v)
    else:
        var_i1 = float(cov[1, 1] + cov[2, 2])
        var_v = var_i1 / i0**2
    return FitResult(
        parameters={"i0": i0, "i1": i1, "theta0": theta0, "visibility": visibility},
        uncertainties={"i0": math.sqrt(max(cov[0, 0], 0.0)),
                       "i1": math.sqrt(max(var_i1, 0.0)),
                       "theta0": 0.0 if i1 == 0 else math.sqrt(max(
                           (b**2 * cov[1, 1] + a**2 * cov[2, 2]
                            - 2 * a * b * cov[1, 2]) / (4 * i1**4), 0.0)),
                       "visibility": math.sqrt(max(var_v, 0.0))},
        residual_norm=float(np.linalg.norm(resid)),
        n_iterations=1,
        converged=True,
        provenance={"fit": "polarization"},
    )


# ---------------------------------------------------------------------------
# Suppression-model fits
# ---------------------------------------------------------------------------

def _relative_scale(y: np.ndarray) -> float:
    scale = float(np.mean(np.abs(y)))
    return scale if scale > 0 else 1.0


def suppression_power_curves(
    power: np.ndarray,
    p0: float,
    p_inf: float,
    p_sat: float,
    beta_s2: float,
    kappa_hat: float,
    center_ref_nm: float,
    lambda0_nm: float,
    fwhm_l_mev: float,
    normalized: bool,
) -> tuple[np.ndarray, np.ndarray]:
    """Forward model for the power fit: (linewidth curve, center curve)."""
    power = np.asarray(power, dtype=float)
    p = np.clip(p0 + (p_inf - p0) * power / (power + p_sat), 0.0, 1.0)
    sigma2 = variance_shift_factored(p, beta_s2, kappa_hat)
    fwhm = np.array([voigt_fwhm_approx(GAUSSIAN_FWHM_FACTOR * math.sqrt(s), fwhm_l_mev)
                     for s in np.atleast_1d(sigma2)])
    if normalized:
        s2_zero = float(variance_shift_factored(np.clip(p0, 0.0, 1.0), beta_s2, kappa_hat))
        fwhm = fwhm / voigt_fwhm_approx(GAUSSIAN_FWHM_FACTOR * math.sqrt(s2_zero),
                                        fwhm_l_mev)
    center = center_ref_nm + energy_to_wavelength_shift(beta_s2, lambda0_nm) * p
    return fwhm, center


def suppression_field_curve(
    e0_grid: np.ndarray,
    p0: float,
    b: float,
    e_star: float,
    s2: float,
    kappa_hat: float,
    heating_c: float,
    alpha: float,
    gamma_stretch: float,
    beta: float,
    fwhm_l_mev: float,
    normalized: bool,
) -> np.ndarray:
    """Forward model for the field fit: linewidth versus field magnitude."""
    e0_grid = np.asarray(e0_grid, dtype=float)
    p = p0 / (1.0 + b * tunneling_factor(e0_grid, alpha, gamma_stretch, e_star))
    s4 = kappa_hat * s2**2
    lin = p * (1.0 - p) * (s4 + 2.0 * e0_grid**2 * s2)
    pair = p**2 * (1.0 - p**2) * (s2**2 - s4)
    sigma = beta * np.sqrt(np.maximum(lin + pair, 0.0))
    fwhm_g = np.maximum(GAUSSIAN_FWHM_FACTOR * sigma + heating_c * e0_grid**2, 0.0)
    fwhm = np.array([voigt_fwhm_approx(fg, fwhm_l_mev) for fg in fwhm_g])
    if normalized:
        lin0 = p0 * (1.0 - p0) * s4
        pair0 = p0**2 * (1.0 - p0**2) * (s2**2 - s4)
        sig0 = beta * math.sqrt(max(lin0 + pair0, 0.0))
        fwhm = fwhm / voigt_fwhm_approx(GAUSSIAN_FWHM_FACTOR * sig0, fwhm_l_mev)
    return fwhm


def fit_suppression_power(
    linewidths: MeasurementSeries,
    centers: MeasurementSeries,
    lambda0_nm: float = 440.0,
    fwhm_l_mev: float = 0.128,
    n_max: int = 100,
    constraints: dict | None = None,
    normalized_linewidth: bool = True,
    weights: tuple[float, float] = (1.0, 1.0),
    n_starts: int = 8,
    seed: int = 0,
) -> FitResult:
    """Joint fit of linewidth and center wavelength versus above-band power.

    The occupancy follows the saturating power law; the Gaussian variance
    uses the kappa-factored form and is composed with a fixed Lorentzian
    FWHM ``fwhm_l_mev``.  Linewidth data normalized to its zero-power
    value is the default; the center series is absolute (nm) with a fitted
    reference offset.  Both series must share the power grid.  Equal
    relative weighting between the two series is the default; per-point
    ``y_err`` overrides it.

    ``constraints`` maps parameter names (p0, p_inf, p_sat, beta_s2,
    kappa_hat, center_ref_nm) to a pinned value or a (lo, hi) bound pair.
    The asymptotic occupancy defaults to pinned at 1 (photo-carriers fill
    the traps); the default kappa_hat bound is [1/n_max, 1].  (p0,
    kappa_hat, beta_s2) trade off almost perfectly at realistic noise, so
    recovering p0 reliably needs a geometry prior on kappa_hat.
    """
    if linewidths.x.shape != centers.x.shape or np.any(linewidths.x != centers.x):
        raise ValueError("linewidth and center series must share the power grid")
    power = linewidths.x
    if np.any(power < 0.0):
        raise ValueError("powers must be non-negative")

    conv = lambda0_nm**2 / CONSTANTS.hc_mev_nm  # nm per meV, magnitude

    # data-driven scales: the total blue shift is conv * beta_s2 * (p_inf - p0)
    dcenter = float(centers.y[0] - centers.y[-1])
    beta_s2_scale = max(abs(dcenter) / conv / 0.6, 1e-3)
    p_half = float(np.interp(0.5, np.linspace(0.0, 1.0, power.size), np.sort(power)))
    p_sat_guess = max(p_half, 1e-2)
    center_ref_guess = float(centers.y[0]) + conv * beta_s2_scale * 0.4

    merged = {"p_inf": 1.0}
    merged.update(constraints or {})
    space = _ParamSpace(
        names=["p0", "p_inf", "p_sat", "beta_s2", "kappa_hat", "center_ref_nm"],
        lo=[0.0, 0.0, 1e-3, 1e-6, 1.0 / n_max, centers.y.min() - 10.0],
        hi=[1.0, 1.0, 1e4, 1e3 * beta_s2_scale, 1.0, centers.y.max() + 10.0],
        start_lo=[0.05, 0.5, 0.05 * p_sat_guess, 0.3 * beta_s2_scale, 1.0 / n_max,
                  centers.y.min()],
        start_hi=[0.95, 1.0, 5.0 * p_sat_guess, 3.0 * beta_s2_scale, 0.5,
                  centers.y.max() + 1.0],
        x0=[0.4, 1.0, p_sat_guess, beta_s2_scale, 0.1, center_ref_guess],
        constraints=merged,
    )

    w_lw = weights[0] / (_relative_scale(linewidths.y) if linewidths.y_err is None else 1.0)
    w_c = weights[1] / (_relative_scale(centers.y - centers.y.min() + 1e-3)
                        if centers.y_err is None else 1.0)

    def residual(theta):
        v = space.full(theta)
        fwhm, center = suppression_power_curves(
            power, v["p0"], v["p_inf"], v["p_sat"], v["beta_s2"], v["kappa_hat"],
            v["center_ref_nm"], lambda0_nm, fwhm_l_mev, normalized_linewidth)
        r_lw = (fwhm - linewidths.y) * (w_lw if linewidths.y_err is None
                                        else 1.0 / linewidths.y_err)
        r_c = (center - centers.y) * (w_c if centers.y_err is None
                                      else 1.0 / centers.y_err)
        return np.concatenate([r_lw, r_c])

    data_norm = float(np.linalg.norm(np.concatenate([
        linewidths.y * w_lw, centers.y * w_c])))
    fit = _multistart_least_squares(residual, space.bounds, space.start_box,
                                    space.free_names,
                                    {"fit": "suppression_power",
                                     "lambda0_nm": lambda0_nm,
                                     "fwhm_l_mev": fwhm_l_mev,
                                     "normalized_linewidth": normalized_linewidth},
                                    data_norm, n_starts=n_starts, seed=seed,
                                    x0=space.x0)
    space.finalize(fit)
    p_sat, sig = fit.parameters["p_sat"], fit.uncertainties["p_sat"]
    if not math.isfinite(sig) or (p_sat > 0 and sig / p_sat > 5.0):
        fit.flags.append("p_sat_unidentifiable")
    return fit


def fit_suppression_field(
    linewidths: MeasurementSeries,
    conv: FieldConversion | float,
    beta: float = 2.6e-6,
    fwhm_l_mev: float = 0.128,
    n_max: int = 100,
    e_star_bounds: tuple[float, float] = (50.0, 5e4),
    alpha: float = 0.2,
    gamma_stretch: float = 1.0,
    free_alpha_gamma: bool = False,
    constraints: dict | None = None,
    normalized_linewidth: bool = True,
    n_starts: int = 8,
    seed: int = 0,
) -> FitResult:
    """Fit the linewidth-versus-voltage curve of the tunneling model.

    The polarizability ``beta`` is held fixed (known from the Stark fit);
    free parameters are p0, the relative tunneling rate b, the
    characteristic field, the moment scale S2 with ratio kappa_hat, and the
    heating coefficient.  The tunneling exponents default to fixed
    (alpha, gamma) = (0.2, 1); ``free_alpha_gamma`` frees them.

    ``constraints`` maps parameter names (p0, b, e_star_kv_cm, s2,
    kappa_hat, heating_c, and alpha/gamma_stretch when freed) to a pinned
    value or a (lo, hi) pair.  The model is multimodal; physical priors
    on e_star and the geometry moments (per the effective Bohr radius and
    plausible trap counts) are what make p0 identifiable.
    """
    volts = linewidths.x
    if volts.size < 6:
        raise DegenerateDataError("need at least 6 voltage points")
    if isinstance(conv, FieldConversion):
        e0_grid = np.abs([local_field_from_voltage(v, conv).f_loc_kv_cm for v in volts])
    else:
        e0_grid = np.abs(float(conv) * volts)

    # S2 scale from the depth of the linewidth dip: when the traps empty the
    # line approaches the Lorentzian floor, so the minimum pins the absolute
    # zero-field Gaussian width even for normalized data
    lw = linewidths.y
    if normalized_linewidth:
        floor_ratio = float(np.clip(lw.min() / lw[np.argmin(np.abs(volts))], 0.05, 0.95))
        fwhm0_est = fwhm_l_mev / floor_ratio
    else:
        fwhm0_est = float(lw[np.argmin(np.abs(volts))])
    fwhm_g0 = math.sqrt(max(fwhm0_est**2 - fwhm_l_mev**2, (0.1 * fwhm_l_mev) ** 2))
    sigma_scale = fwhm_g0 / GAUSSIAN_FWHM_FACTOR
    s2_scale = sigma_scale / beta / 0.35  # sigma ~ beta S2 sqrt(p(1-p)...) ~ 0.35 beta S2

    # the relative tunneling rate spans decades; optimize its log
    constraints = dict(constraints or {})
    if "b" in constraints:
        spec = constraints.pop("b")
        if np.isscalar(spec):
            constraints["log10_b"] = math.log10(spec)
        else:
            constraints["log10_b"] = (math.log10(max(spec[0], 1e-6)),
                                      math.log10(spec[1]))

    names = ["p0", "log10_b", "e_star_kv_cm", "s2", "kappa_hat", "heating_c"]
    e_star_start_lo = max(e_star_bounds[0], min(0.5 * e0_grid.max(), e_star_bounds[1]))
    e_star_start_hi = min(e_star_bounds[1], max(8.0 * e0_grid.max(), e_star_start_lo))
    lo = [0.0, -2.0, e_star_bounds[0], 1e-4 * s2_scale, 1.0 / n_max, 0.0]
    hi = [1.0, 8.0, e_star_bounds[1], 1e3 * s2_scale, 1.0, 1e2]
    start_lo = [0.05, 0.5, e_star_start_lo, 0.3 * s2_scale, 1.0 / n_max, 0.0]
    start_hi = [0.95, 6.5, e_star_start_hi, 3.0 * s2_scale, 0.5, 1e-9]
    x0 = [0.4, 2.5, math.sqrt(e_star_start_lo * e_star_start_hi), s2_scale, 0.1, 0.0]
    if free_alpha_gamma:
        names += ["alpha", "gamma_stretch"]
        lo += [0.0, 0.2]
        hi += [2.0, 3.0]
        start_lo += [0.0, 0.5]
        start_hi += [1.0, 2.0]
        x0 += [alpha, gamma_stretch]
    space = _ParamSpace(names, lo, hi, start_lo, start_hi, x0, constraints)

    w = (1.0 / _relative_scale(linewidths.y) if linewidths.y_err is None
         else 1.0 / linewidths.y_err)

    def residual(theta):
        v = space.full(theta)
        al = v.get("alpha", alpha)
        ga = v.get("gamma_stretch", gamma_stretch)
        fwhm = suppression_field_curve(e0_grid, v["p0"], 10.0 ** v["log10_b"],
                                       v["e_star_kv_cm"], v["s2"], v["kappa_hat"],
                                       v["heating_c"], al, ga, beta, fwhm_l_mev,
                                       normalized_linewidth)
        return (fwhm - linewidths.y) * w

    data_norm = float(np.linalg.norm(linewidths.y * w))
    fit = _multistart_least_squares(residual, space.bounds, space.start_box,
                                    space.free_names,
                                    {"fit": "suppression_field", "beta": beta,
                                     "fwhm_l_mev": fwhm_l_mev,
                                     "alpha_fixed": None if free_alpha_gamma else alpha,
                                     "gamma_fixed": None if free_alpha_gamma else gamma_stretch,
                                     "normalized_linewidth": normalized_linewidth},
                                    data_norm, n_starts=n_starts, seed=seed,
                                    x0=space.x0)
    space.finalize(fit)
    b_value = 10.0 ** fit.parameters["log10_b"]
    fit.parameters["b"] = b_value
    fit.uncertainties["b"] = (b_value * math.log(10.0)
                              * fit.uncertainties.get("log10_b", 0.0))
    if not free_alpha_gamma:
        fit.parameters["alpha"] = alpha
        fit.parameters["gamma_stretch"] = gamma_stretch
        fit.uncertainties.setdefault("alpha", 0.0)
        fit.uncertainties.setdefault("gamma_stretch", 0.0)
    fit.parameters["beta_s2"] = beta * fit.parameters["s2"]
    return fit
