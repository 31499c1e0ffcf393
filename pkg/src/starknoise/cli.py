"""Command-line entry point.

Subcommands: ``sweep`` (closed-form control sweeps), ``mc`` (Monte Carlo
verification with an analytic overlay and agreement report), ``fit``
(least-squares fits of ingested CSV spectra or series).  Every command is
config-driven, deterministic for a given master seed, writes delimited
output plus a rendered figure, and uses stable exit codes:

    0 success, 2 config error, 3 I/O error, 4 data parse error,
    5 fit non-convergence (result still written).
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from pathlib import Path

import numpy as np

from .analytics import (
    SweepPoint,
    center_wavelength,
    field_sweep,
    power_sweep,
    write_sweep_csv,
    write_sweep_json,
)
from .config import (
    FitJob,
    MCJob,
    SweepJob,
    load_config,
    parse_fit_config,
    parse_mc_config,
    parse_sweep_config,
)
from .constants import GAUSSIAN_FWHM_FACTOR
from .errors import ConfigError, DataParseError, DegenerateDataError
from .fitting import (
    FitResult,
    MeasurementSeries,
    fit_double_voigt_splitting,
    fit_polarization,
    fit_saturation,
    fit_stark_polynomial,
    fit_suppression_field,
    fit_suppression_power,
    fit_voigt,
    fit_zeeman,
    suppression_field_curve,
    suppression_power_curves,
)
from .lineshape import SpectrumRecord, VoigtParams, voigt_fwhm_approx, voigt_profile
from .montecarlo import (
    run_mc,
    write_agreement_csv,
    write_exact_reference_csv,
    write_mc_csv,
    write_mc_json,
)
from .stark import local_field_from_voltage, FieldConversion


def _progress(message: str) -> None:
    print(message, file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="starknoise",
        description="Charge-trap spectral diffusion model: sweeps, Monte Carlo "
                    "verification and spectroscopy fits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("sweep", "closed-form linewidth/center sweep over power or voltage"),
        ("mc", "Monte Carlo run with analytic overlay and agreement report"),
        ("fit", "least-squares fit of a CSV spectrum or series"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config master seed")
        p.add_argument("--threads", type=int, default=1,
                       help="worker cap for parallel sections")
        p.add_argument("--no-plot", action="store_true",
                       help="skip figure rendering")
        if name == "fit":
            p.add_argument("--data", required=True, help="input data CSV")
    return parser


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_sweep(args) -> int:
    job: SweepJob = parse_sweep_config(load_config(args.config))
    out = _out_dir(args)
    _progress(f"sweep: mode={job.mode}, {job.controls.size} points")
    if job.mode == "power":
        points = power_sweep(job.controls, job.optical,
                             beta_s2=job.stark.beta * job.s2,
                             kappa_hat=job.s4 / job.s2**2,
                             gamma_lorentz_mev=job.gamma_lorentz_mev,
                             lambda0_nm=job.lambda0_nm)
    else:
        points = field_sweep(job.controls, job.conversion, job.electrical,
                             s2=job.s2, s4=job.s4, resp=job.stark,
                             gamma_lorentz_mev=job.gamma_lorentz_mev,
                             lambda0_nm=job.lambda0_nm)
    write_sweep_csv(points, out / "sweep.csv")
    write_sweep_json(points, out / "sweep.json")
    _progress(f"wrote {out / 'sweep.csv'}")
    if not args.no_plot:
        from .plotting import plot_sweep

        plot_sweep(points, out / "sweep.png", job.mode)
        _progress(f"wrote {out / 'sweep.png'}")
    return 0


def _analytic_table(result, gamma_lorentz_mev: float) -> list[SweepPoint]:
    """Closed-form curves in the sweep schema, from the geometry-ensemble means."""
    points = []
    for j in range(result.n_points):
        mu = float(result.analytic_mean_mev[j])
        sigma = float(result.analytic_std_mev[j])
        fwhm_g = GAUSSIAN_FWHM_FACTOR * sigma
        fwhm = voigt_fwhm_approx(fwhm_g, 2.0 * gamma_lorentz_mev) \
            if gamma_lorentz_mev > 0 else fwhm_g
        points.append(SweepPoint(
            control=float(result.controls[j]), e0_kv_cm=float(result.e0_kv_cm[j]),
            p=float(result.occupancies[j]), mu_mev=mu, sigma2_mev2=sigma**2,
            fwhm_voigt_mev=fwhm,
            center_nm=center_wavelength(mu, result.lambda0_nm)))
    return points


def cmd_mc(args) -> int:
    job: MCJob = parse_mc_config(load_config(args.config))
    config = job.config
    if args.seed is not None:
        config = dataclasses.replace(config, master_seed=args.seed)
    out = _out_dir(args)
    _progress(f"mc: mode={config.mode}, {len(config.controls)} points, "
              f"{config.n_geometries} geometries x {config.n_snapshots} snapshots")
    result = run_mc(config, threads=max(args.threads, 1))
    write_mc_csv(result, out / "mc.csv", gamma_lorentz_mev=job.gamma_lorentz_mev)
    write_sweep_csv(_analytic_table(result, job.gamma_lorentz_mev),
                    out / "mc_analytic.csv")
    write_agreement_csv(result, out / "mc_agreement.csv")
    write_mc_json(result, out / "mc.json")
    if config.geometry.n_traps <= 10:
        # small ensembles get the enumeration-oracle report as well
        write_exact_reference_csv(config, result, out / "mc_exact.csv")
        _progress(f"wrote {out / 'mc_exact.csv'}")
    worst = float(np.nanmax(np.concatenate([result.z_mean, result.z_var])))
    _progress(f"wrote {out / 'mc.csv'}; worst |MC-analytic|/stderr = {worst:.2f}")
    if not args.no_plot:
        from .plotting import plot_mc_overlay

        plot_mc_overlay(result, out / "mc_overlay.png", config.mode)
        _progress(f"wrote {out / 'mc_overlay.png'}")
    return 0


def _fit_summary(result: FitResult) -> str:
    lines = [f"converged: {result.converged}   residual_norm: "
             f"{result.residual_norm:.6g}   evaluations: {result.n_iterations}"]
    for name, value in result.parameters.items():
        unc = result.uncertainties.get(name)
        if unc is not None and math.isfinite(unc) and unc > 0:
            lines.append(f"  {name} = {value:.6g} +- {unc:.2g}")
        else:
            lines.append(f"  {name} = {value:.6g}")
    if result.flags:
        lines.append("  flags: " + ", ".join(result.flags))
    return "\n".join(lines)


def _fit_figure(kind: str, result: FitResult, data, options, out: Path) -> None:
    from .plotting import plot_series_fit

    p = result.parameters
    if kind in ("voigt", "double_voigt"):
        spectrum: SpectrumRecord = data
        dense = np.linspace(spectrum.x.min(), spectrum.x.max(), 600)
        if kind == "voigt":
            model = voigt_profile(dense, VoigtParams(
                p["center"], max(p["sigma_g"], 1e-12), p["gamma_lorentz"], p["amplitude"]))
        else:
            model = (voigt_profile(dense, VoigtParams(
                p["center_1"], max(p["sigma_g"], 1e-12), p["gamma_lorentz"],
                max(p["amplitude_1"], 1e-12)))
                + voigt_profile(dense, VoigtParams(
                    p["center_2"], max(p["sigma_g"], 1e-12), p["gamma_lorentz"],
                    max(p["amplitude_2"], 1e-12))))
        plot_series_fit(spectrum.x, spectrum.intensity, dense, model, out / "fit.png",
                        xlabel=spectrum.axis, ylabel="intensity")
        return
    series: MeasurementSeries = data
    dense = np.linspace(series.x.min(), series.x.max(), 400)
    if kind == "zeeman":
        from .constants import CONSTANTS

        model = p["g_effective"] * CONSTANTS.bohr_magneton_mev_t * dense
        labels = ("magnetic field (T)", "splitting (meV)")
    elif kind == "stark_polynomial":
        conv = options["conversion"]
        if isinstance(conv, FieldConversion):
            f = np.array([local_field_from_voltage(v, conv).f_loc_kv_cm for v in dense])
        else:
            f = float(conv) * dense
        model = p["d"] * f + p["beta"] * f**2 + p["c3"] * f**3 + p["c4"] * f**4
        labels = ("bias voltage (V)", "center shift (meV)")
    elif kind == "saturation":
        model = p["i_sat"] * dense / (dense + p["p_sat"])
        labels = ("power", "intensity")
    elif kind == "polarization":
        model = p["i0"] + p["i1"] * np.cos(2.0 * (dense - p["theta0"]))
        labels = ("half-wave-plate angle (rad)", "intensity")
    elif kind == "suppression_power":
        model, _ = suppression_power_curves(
            dense, p["p0"], p["p_inf"], p["p_sat"], p["beta_s2"], p["kappa_hat"],
            p["center_ref_nm"], options.get("lambda0_nm", 440.0),
            options.get("fwhm_l_mev", 0.128),
            options.get("normalized_linewidth", True))
        labels = ("above-band power (nW)", "normalized linewidth")
    elif kind == "suppression_field":
        conv = options["conversion"]
        if isinstance(conv, FieldConversion):
            e0 = np.abs([local_field_from_voltage(v, conv).f_loc_kv_cm for v in dense])
        else:
            e0 = np.abs(float(conv) * dense)
        model = suppression_field_curve(
            e0, p["p0"], p["b"], p["e_star_kv_cm"], p["s2"], p["kappa_hat"],
            p["heating_c"], p["alpha"], p["gamma_stretch"],
            options.get("beta", 2.6e-6), options.get("fwhm_l_mev", 0.128),
            options.get("normalized_linewidth", True))
        labels = ("bias voltage (V)", "normalized linewidth")
    else:
        return
    plot_series_fit(series.x, series.y, dense, model, out / "fit.png",
                    xlabel=labels[0], ylabel=labels[1])


def cmd_fit(args) -> int:
    job: FitJob = parse_fit_config(load_config(args.config))
    out = _out_dir(args)
    seed = args.seed if args.seed is not None else job.master_seed
    options = job.options
    _progress(f"fit: kind={job.kind}, data={args.data}")

    if job.kind in ("voigt", "double_voigt"):
        data = SpectrumRecord.from_csv(args.data)
        if job.kind == "voigt":
            result = fit_voigt(data, fix_gamma_mev=options.get("fix_gamma_mev"))
        else:
            result = fit_double_voigt_splitting(data)
    else:
        data = MeasurementSeries.from_csv(args.data)
        if job.kind == "zeeman":
            result = fit_zeeman(data)
        elif job.kind == "stark_polynomial":
            result = fit_stark_polynomial(data, options["conversion"])
        elif job.kind == "saturation":
            result = fit_saturation(data)
        elif job.kind == "polarization":
            result = fit_polarization(data)
        elif job.kind == "suppression_power":
            centers = MeasurementSeries.from_csv(options["centers_path"])
            result = fit_suppression_power(
                data, centers,
                lambda0_nm=options.get("lambda0_nm", 440.0),
                fwhm_l_mev=options.get("fwhm_l_mev", 0.128),
                n_max=options.get("n_max", 100),
                constraints=options.get("constraints"),
                normalized_linewidth=options.get("normalized_linewidth", True),
                n_starts=options.get("n_starts", 8),
                seed=seed)
        else:  # suppression_field
            e_star_bounds = options.get("e_star_bounds", (50.0, 5e4))
            result = fit_suppression_field(
                data, options["conversion"],
                beta=options.get("beta", 2.6e-6),
                fwhm_l_mev=options.get("fwhm_l_mev", 0.128),
                n_max=options.get("n_max", 100),
                e_star_bounds=(float(e_star_bounds[0]), float(e_star_bounds[1])),
                alpha=options.get("alpha", 0.2),
                gamma_stretch=options.get("gamma_stretch", 1.0),
                free_alpha_gamma=options.get("free_alpha_gamma", False),
                constraints=options.get("constraints"),
                normalized_linewidth=options.get("normalized_linewidth", True),
                n_starts=options.get("n_starts", 8),
                seed=seed)

    result.provenance["kind"] = job.kind
    result.save_json(out / "fit.json")
    print(f"fit {job.kind}")
    print(_fit_summary(result))
    if not args.no_plot:
        _fit_figure(job.kind, result, data, options, out)
        _progress(f"wrote {out / 'fit.png'}")
    _progress(f"wrote {out / 'fit.json'}")
    return 0 if result.converged else 5


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "sweep":
            return cmd_sweep(args)
        if args.command == "mc":
            return cmd_mc(args)
        return cmd_fit(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataParseError as exc:
        print(f"data parse error: {exc}", file=sys.stderr)
        return 4
    except DegenerateDataError as exc:
        print(f"fit not possible: {exc}", file=sys.stderr)
        return 5
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
