"""Run-configuration schema: JSON parsing and validation for the CLI.

Configs are JSON objects with a required ``version`` field and one section
per module.  Validation happens before any computation; unknown keys are
rejected with their dotted path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .geometry import expected_annulus_moments
from .montecarlo import GeometrySpec, MCConfig
from .stark import FieldConversion, StarkResponse
from .suppression import ElectricalSuppressionParams, OpticalSuppressionParams

SCHEMA_VERSION = 1
DEFAULT_SEED = 12345

_FIT_KINDS = ("voigt", "double_voigt", "zeeman", "stark_polynomial", "saturation",
              "polarization", "suppression_power", "suppression_field")


def load_config(path: str | Path) -> dict:
    text = Path(path).read_text()  # OSError propagates to the CLI as exit 3
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def _check_keys(section: dict, allowed: set[str], path: str) -> None:
    for key in section:
        if key not in allowed:
            raise ConfigError(f"unknown key {path}.{key}" if path else f"unknown key {key}")


def _get(section: dict, key: str, path: str, types, required: bool = True, default=None):
    if key not in section:
        if required:
            raise ConfigError(f"missing required key {path}.{key}")
        return default
    value = section[key]
    if types is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, types if isinstance(types, tuple) else (types,)):
        raise ConfigError(f"{path}.{key} has wrong type (expected {types})")
    return value


def _common(cfg: dict, sections: set[str]) -> int:
    _check_keys(cfg, sections | {"version", "master_seed"}, "")
    version = _get(cfg, "version", "", int)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"version must be {SCHEMA_VERSION}, got {version}")
    return _get(cfg, "master_seed", "", int, required=False, default=DEFAULT_SEED)


def _parse_controls(section: dict, path: str) -> np.ndarray:
    _check_keys(section, {"start", "stop", "n", "values"}, path)
    if "values" in section:
        values = section["values"]
        if not isinstance(values, list) or not values:
            raise ConfigError(f"{path}.values must be a non-empty list")
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                   for v in values):
            raise ConfigError(f"{path}.values must contain only numbers")
        return np.asarray([float(v) for v in values])
    start = _get(section, "start", path, (int, float))
    stop = _get(section, "stop", path, (int, float))
    n = _get(section, "n", path, int)
    if n < 1:
        raise ConfigError(f"{path}.n must be >= 1")
    return np.linspace(float(start), float(stop), n)


def _parse_geometry(section: dict, path: str) -> GeometrySpec:
    _check_keys(section, {"n_traps", "r_min_nm", "r_max_nm", "epsilon_r"}, path)
    spec = GeometrySpec(
        n_traps=_get(section, "n_traps", path, int),
        r_min_nm=_get(section, "r_min_nm", path, (int, float)),
        r_max_nm=_get(section, "r_max_nm", path, (int, float)),
        epsilon_r=_get(section, "epsilon_r", path, (int, float)),
    )
    if spec.n_traps < 1:
        raise ConfigError(f"{path}.n_traps must be >= 1")
    if not (0.0 < spec.r_min_nm < spec.r_max_nm):
        raise ConfigError(f"{path}.r_min_nm/r_max_nm must satisfy 0 < r_min < r_max")
    if spec.epsilon_r < 1.0:
        raise ConfigError(f"{path}.epsilon_r must be >= 1")
    return spec


def _parse_stark(section: dict, path: str) -> StarkResponse:
    _check_keys(section, {"beta", "dipole_d", "c3", "c4", "heating_c"}, path)
    try:
        return StarkResponse(
            beta=_get(section, "beta", path, (int, float)),
            dipole_d=_get(section, "dipole_d", path, (int, float), required=False, default=0.0),
            c3=_get(section, "c3", path, (int, float), required=False, default=0.0),
            c4=_get(section, "c4", path, (int, float), required=False, default=0.0),
            heating_c=_get(section, "heating_c", path, (int, float), required=False, default=0.0),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _parse_optical(section: dict, path: str) -> OpticalSuppressionParams:
    _check_keys(section, {"p0", "p_inf", "p_sat_nw"}, path)
    try:
        return OpticalSuppressionParams(
            p0=_get(section, "p0", path, (int, float)),
            p_inf=_get(section, "p_inf", path, (int, float)),
            p_sat_nw=_get(section, "p_sat_nw", path, (int, float)),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _parse_electrical(section: dict, path: str) -> ElectricalSuppressionParams:
    _check_keys(section, {"p0", "b", "alpha", "gamma_stretch", "e_star_kv_cm"}, path)
    try:
        return ElectricalSuppressionParams(
            p0=_get(section, "p0", path, (int, float)),
            b=_get(section, "b", path, (int, float)),
            alpha=_get(section, "alpha", path, (int, float), required=False, default=0.2),
            gamma_stretch=_get(section, "gamma_stretch", path, (int, float),
                               required=False, default=1.0),
            e_star_kv_cm=_get(section, "e_star_kv_cm", path, (int, float)),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _parse_conversion(section: dict, path: str) -> FieldConversion | float:
    if "kv_cm_per_volt" in section:
        _check_keys(section, {"kv_cm_per_volt"}, path)
        return float(_get(section, "kv_cm_per_volt", path, (int, float)))
    _check_keys(section, {"gap_length_um", "eta", "epsilon_r"}, path)
    try:
        return FieldConversion(
            gap_length_um=_get(section, "gap_length_um", path, (int, float)),
            geometry_factor_eta=_get(section, "eta", path, (int, float)),
            epsilon_r=_get(section, "epsilon_r", path, (int, float)),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


@dataclass(frozen=True)
class SweepJob:
    mode: str
    controls: np.ndarray
    lambda0_nm: float
    gamma_lorentz_mev: float
    s2: float
    s4: float
    stark: StarkResponse
    optical: OpticalSuppressionParams | None
    electrical: ElectricalSuppressionParams | None
    conversion: FieldConversion | float | None
    master_seed: int


def parse_sweep_config(cfg: dict) -> SweepJob:
    seed = _common(cfg, {"sweep", "geometry", "moments", "stark", "optical",
                         "electrical", "conversion"})
    sweep = _get(cfg, "sweep", "", dict)
    _check_keys(sweep, {"mode", "control", "lambda0_nm", "gamma_lorentz_mev"}, "sweep")
    mode = _get(sweep, "mode", "sweep", str)
    if mode not in ("power", "field"):
        raise ConfigError("sweep.mode must be 'power' or 'field'")
    controls = _parse_controls(_get(sweep, "control", "sweep", dict), "sweep.control")
    lambda0 = _get(sweep, "lambda0_nm", "sweep", (int, float), required=False, default=440.0)
    gamma_l = _get(sweep, "gamma_lorentz_mev", "sweep", (int, float),
                   required=False, default=0.064)

    if "moments" in cfg:
        mom = cfg["moments"]
        _check_keys(mom, {"s2", "s4"}, "moments")
        s2 = float(_get(mom, "s2", "moments", (int, float)))
        s4 = float(_get(mom, "s4", "moments", (int, float)))
    elif "geometry" in cfg:
        spec = _parse_geometry(cfg["geometry"], "geometry")
        moments = expected_annulus_moments(spec.n_traps, spec.r_min_nm, spec.r_max_nm,
                                           spec.epsilon_r)
        s2, s4 = moments.s2, moments.s4
    else:
        raise ConfigError("either 'geometry' or 'moments' section is required")

    stark = _parse_stark(_get(cfg, "stark", "", dict), "stark")
    optical = electrical = conversion = None
    if mode == "power":
        optical = _parse_optical(_get(cfg, "optical", "", dict), "optical")
        if np.any(controls < 0):
            raise ConfigError("sweep.control: powers must be non-negative")
    else:
        electrical = _parse_electrical(_get(cfg, "electrical", "", dict), "electrical")
        conversion = _parse_conversion(_get(cfg, "conversion", "", dict), "conversion")
    return SweepJob(mode=mode, controls=controls, lambda0_nm=float(lambda0),
                    gamma_lorentz_mev=float(gamma_l), s2=s2, s4=s4, stark=stark,
                    optical=optical, electrical=electrical, conversion=conversion,
                    master_seed=seed)


@dataclass(frozen=True)
class MCJob:
    config: MCConfig
    gamma_lorentz_mev: float


def parse_mc_config(cfg: dict) -> MCJob:
    seed = _common(cfg, {"sweep", "geometry", "stark", "optical", "electrical",
                         "conversion", "mc"})
    sweep = _get(cfg, "sweep", "", dict)
    _check_keys(sweep, {"mode", "control", "lambda0_nm", "gamma_lorentz_mev"}, "sweep")
    mode = _get(sweep, "mode", "sweep", str)
    if mode not in ("power", "field"):
        raise ConfigError("sweep.mode must be 'power' or 'field'")
    controls = _parse_controls(_get(sweep, "control", "sweep", dict), "sweep.control")
    lambda0 = _get(sweep, "lambda0_nm", "sweep", (int, float), required=False, default=440.0)
    gamma_l = _get(sweep, "gamma_lorentz_mev", "sweep", (int, float),
                   required=False, default=0.064)
    geometry = _parse_geometry(_get(cfg, "geometry", "", dict), "geometry")
    stark = _parse_stark(_get(cfg, "stark", "", dict), "stark")

    mc = cfg.get("mc", {})
    _check_keys(mc, {"n_geometries", "n_snapshots"}, "mc")
    n_geom = _get(mc, "n_geometries", "mc", int, required=False, default=200)
    n_snap = _get(mc, "n_snapshots", "mc", int, required=False, default=2000)

    optical = electrical = conversion = None
    if mode == "power":
        optical = _parse_optical(_get(cfg, "optical", "", dict), "optical")
    else:
        electrical = _parse_electrical(_get(cfg, "electrical", "", dict), "electrical")
        conversion = _parse_conversion(_get(cfg, "conversion", "", dict), "conversion")

    config = MCConfig(
        n_geometries=n_geom, n_snapshots=n_snap, geometry=geometry, mode=mode,
        controls=tuple(float(c) for c in controls), stark=stark, master_seed=seed,
        lambda0_nm=float(lambda0), optical=optical, electrical=electrical,
        conversion=conversion,
    )
    config.validate()
    return MCJob(config=config, gamma_lorentz_mev=float(gamma_l))


@dataclass(frozen=True)
class FitJob:
    kind: str
    options: dict
    master_seed: int


def parse_fit_config(cfg: dict) -> FitJob:
    seed = _common(cfg, {"fit"})
    fit = _get(cfg, "fit", "", dict)
    _check_keys(fit, {"kind", "options"}, "fit")
    kind = _get(fit, "kind", "fit", str)
    if kind not in _FIT_KINDS:
        raise ConfigError(f"fit.kind must be one of {_FIT_KINDS}")
    options = _get(fit, "options", "fit", dict, required=False, default={})
    allowed = {
        "voigt": {"fix_gamma_mev"},
        "double_voigt": set(),
        "zeeman": set(),
        "stark_polynomial": {"conversion"},
        "saturation": set(),
        "polarization": set(),
        "suppression_power": {"centers_path", "lambda0_nm", "fwhm_l_mev", "n_max",
                              "normalized_linewidth", "n_starts", "constraints"},
        "suppression_field": {"conversion", "beta", "fwhm_l_mev", "n_max",
                              "alpha", "gamma_stretch", "free_alpha_gamma",
                              "normalized_linewidth", "n_starts", "constraints",
                              "e_star_bounds"},
    }[kind]
    _check_keys(options, allowed, "fit.options")
    if "constraints" in options:
        cons = options["constraints"]
        if not isinstance(cons, dict):
            raise ConfigError("fit.options.constraints must be an object of "
                              "parameter name to value or [lo, hi]")
        for name, value in cons.items():
            pair = (isinstance(value, list) and len(value) == 2
                    and all(isinstance(v, (int, float)) for v in value))
            if not (isinstance(value, (int, float)) or pair):
                raise ConfigError(f"fit.options.constraints.{name} must be a "
                                  "number or a [lo, hi] pair")
    if "e_star_bounds" in options:
        bounds = options["e_star_bounds"]
        if not (isinstance(bounds, list) and len(bounds) == 2
                and all(isinstance(v, (int, float)) for v in bounds)
                and bounds[0] < bounds[1]):
            raise ConfigError("fit.options.e_star_bounds must be [lo, hi] "
                              "with lo < hi")
    if kind in ("stark_polynomial", "suppression_field"):
        if "conversion" not in options:
            raise ConfigError(f"fit.options.conversion is required for kind {kind!r}")
        options = dict(options)
        options["conversion"] = _parse_conversion(options["conversion"],
                                                  "fit.options.conversion")
    if kind == "suppression_power" and "centers_path" not in options:
        raise ConfigError("fit.options.centers_path is required for kind "
                          "'suppression_power'")
    return FitJob(kind=kind, options=dict(options), master_seed=seed)
