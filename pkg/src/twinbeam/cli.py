"""Command-line front end.

Subcommands:
  hom          two-photon interference demo: distribution, dN_minus, coincidence
  limits       dN_minus scaling table for |N,0> and |N,N> inputs
  spectra      model noise curves on a frequency grid (CSV)
  fit          fit an intensity-difference trace, predict the phase trace
  uncertainty  uncertainty-product table over normalized frequency
  synth        generate a synthetic trace CSV

Physical defaults live in the packaged ``defaults.cfg`` (overridable with
--config); explicit flags win over the file.

Exit codes: 0 success, 2 usage error, 3 file/trace parse error,
4 validation or domain error, 5 fit convergence failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import fock, quadratures, spectra, tracefit
from .errors import (
    CapacityError,
    DomainError,
    FitConvergenceError,
    TraceParseError,
    TwinbeamError,
    ValidationError,
)
from .modes import ModeLabel, Polarization, Port

EXIT_OK = 0
EXIT_PARSE = 3
EXIT_VALIDATION = 4
EXIT_CONVERGENCE = 5


# ---------------------------------------------------------------------------
# Config file: flat "namespace.key = value" lines, '#' comments
# ---------------------------------------------------------------------------


def load_config(path=None) -> dict[str, str]:
    if path is None:
        text = resources.files("twinbeam").joinpath("defaults.cfg").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    config: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise TraceParseError(f"config line is not 'key = value': {stripped!r}", lineno)
        key, value = stripped.split("=", 1)
        config[key.strip()] = value.strip()
    return config


def _config_floats(config: dict, key: str, count: int | None = None) -> tuple[float, ...]:
    raw = config[key]
    values = tuple(float(part.strip()) for part in raw.split(","))
    if count is not None and len(values) != count:
        raise ValidationError(f"config key {key} needs {count} values, got {raw!r}")
    return values


def _config_bands(config: dict, key: str) -> tuple[tuple[float, float], ...]:
    raw = config.get(key, "").strip()
    if not raw:
        return ()
    bands = []
    for chunk in raw.split(";"):
        lo, hi = chunk.split(":")
        bands.append((float(lo), float(hi)))
    return tuple(bands)


def _parse_band(text: str) -> tuple[float, float]:
    lo, hi = text.split(":")
    return float(lo), float(hi)


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_hom(args, config) -> int:
    cutoff = args.cutoff if args.cutoff else max(int(config.get("fock.cutoff", 8)), args.n_a + args.n_b, 1)
    freq_b = 1 if args.distinguishable else 0
    modes = (
        ModeLabel(Polarization.H, 0, Port.A),
        ModeLabel(Polarization.H, freq_b, Port.B),
    )
    state = fock.make_fock([args.n_a, args.n_b], cutoff, modes=modes)
    mixing = 2.0 * args.theta  # plate angle theta maps to a 2*theta rotation
    out = fock.apply_beam_splitter(state, mixing_angle=mixing, convention=fock.ROTATION)
    stats = fock.number_difference_stats(out)
    coincidence = fock.coincidence_probability(out)
    report = {
        "n_a": args.n_a,
        "n_b": args.n_b,
        "distinguishable": bool(args.distinguishable),
        "theta": args.theta,
        "distribution": {str(k): v for k, v in sorted(stats.distribution.items())},
        "dn_minus": stats.std,
        "coincidence_probability": coincidence,
    }
    if args.format == "structured":
        _emit(json.dumps(report, indent=2) + "\n", args.output)
    else:
        lines = ["n_minus,probability"]
        lines += [f"{k},{v:.12g}" for k, v in sorted(stats.distribution.items())]
        lines += [f"# dn_minus={stats.std:.12g}", f"# coincidence={coincidence:.12g}"]
        _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def cmd_limits(args, config) -> int:
    max_n = int(config.get("fock.max_n", 10))
    if args.n_max > max_n:
        raise ValidationError(f"n_max {args.n_max} above the documented bound {max_n}")
    rows = []
    for n in range(args.n_max + 1):
        if n == 0:
            rows.append((0, 0.0, 0.0, 0.0, 0.0))
            continue
        classical = fock.number_difference_stats(
            fock.apply_beam_splitter(fock.make_fock([n, 0], cutoff=n))
        ).std
        twin = fock.number_difference_stats(
            fock.apply_beam_splitter(fock.make_fock([n, n], cutoff=2 * n))
        ).std
        rows.append((n, classical, twin, np.sqrt(n), float(n)))
    lines = ["n,dn_minus_single,dn_minus_twin,sqrt_n_reference,n_reference"]
    lines += [f"{n},{c:.12g},{t:.12g},{s:.12g},{r:.12g}" for n, c, t, s, r in rows]
    _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def _grid_from_args(args, config) -> np.ndarray:
    if args.f_start is not None or args.f_stop is not None or args.f_step is not None:
        if None in (args.f_start, args.f_stop, args.f_step):
            raise ValidationError("--f-start, --f-stop, --f-step must be given together")
        return tracefit.grid_hz(args.f_start, args.f_stop, args.f_step)
    start, stop, step = _config_floats(config, "cli.grid_hz", 3)
    return tracefit.grid_hz(start, stop, step)


def _params_from_args(args) -> spectra.OpoParams:
    if args.transmissivity is not None or args.loss is not None:
        if None in (args.transmissivity, args.loss, args.fsr_hz):
            raise ValidationError("--t, --a and --d must be given together")
        return spectra.OpoParams(args.transmissivity, args.loss, args.fsr_hz, args.s0_dbm)
    if args.xi is None or args.delta_hz is None:
        raise ValidationError("give either (--xi, --delta-hz) or (--t, --a, --d)")
    return spectra.OpoParams.from_correlation(args.xi, args.delta_hz, args.s0_dbm)


def cmd_spectra(args, config) -> int:
    params = _params_from_args(args)
    nu = _grid_from_args(args, config)
    which = ["intensity", "phase"] if args.which == "both" else [args.which]
    columns = {}
    for name in which:
        curve = spectra.physical_frequency_curve(params, nu, name)
        columns[f"{name}_dbm"] = spectra.relative_to_dbm(curve.values, params.s0_dbm)
    columns["shot_noise_dbm"] = np.full(nu.size, params.s0_dbm)
    header = "frequency_hz," + ",".join(columns)
    lines = [header]
    for i, f in enumerate(nu):
        lines.append(f"{f:.10g}," + ",".join(f"{col[i]:.12g}" for col in columns.values()))
    _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def _fit_config_from(args, config) -> tracefit.FitConfig:
    window = _config_floats(config, "trace_fit.fit_window_hz", 2)
    f_min = args.f_min if args.f_min is not None else window[0]
    f_max = args.f_max if args.f_max is not None else window[1]
    if args.exclude:
        bands = tuple(_parse_band(b) for b in args.exclude)
    else:
        bands = _config_bands(config, "trace_fit.exclusions_hz")
    guess = tuple(float(x) for x in args.guess.split(",")) if args.guess else None
    if guess is not None and len(guess) != 3:
        raise ValidationError("--guess needs s0_dbm,xi,delta_hz")
    return tracefit.FitConfig(
        fit_window_hz=(f_min, f_max),
        exclusions_hz=bands,
        initial_guess=guess,
        max_iterations=int(config.get("trace_fit.max_iterations", 200)),
        convergence_tol=float(config.get("trace_fit.convergence_tol", 1e-12)),
        weight_space=args.weight_space or config.get("trace_fit.weight_space", "db"),
    )


def cmd_fit(args, config) -> int:
    trace = tracefit.load_trace(args.trace)
    floor = tracefit.load_trace(args.floor) if args.floor else None
    fit_config = _fit_config_from(args, config)
    result = tracefit.fit_intensity_spectrum(trace, fit_config)
    report = tracefit.report_squeezing(trace, result, floor)

    if args.phase_grid:
        start, stop, step = (float(x) for x in args.phase_grid.split(","))
        nu = tracefit.grid_hz(start, stop, step)
    else:
        nu = trace.frequencies_hz[trace.frequencies_hz > 0.0]
    phase_curve = tracefit.predict_phase_spectrum(result, nu)

    prefix = Path(args.output_prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    Path(f"{prefix}.fit.txt").write_text(result.to_key_value(), encoding="utf-8")
    payload = result.to_dict()
    payload["squeezing_raw_db"] = report.raw_db
    payload["squeezing_corrected_db"] = report.corrected_db
    payload["squeezing_bandwidth_hz"] = report.bandwidth_hz
    Path(f"{prefix}.fit.json").write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    Path(f"{prefix}.phase_prediction.csv").write_text(phase_curve.to_csv(), encoding="utf-8")

    lines = [
        f"s0_dbm={result.s0_dbm:.6g}",
        f"xi={result.xi:.6g}",
        f"delta_hz={result.delta_hz:.6g}",
        f"rms_residual_db={result.rms_residual_db:.6g}",
        f"points_used={result.points_used}",
        f"squeezing_raw_db={report.raw_db if report.raw_db is not None else 'complete correlation at dc'}",
    ]
    if report.corrected_db is not None:
        lines.append(f"squeezing_corrected_db={report.corrected_db:.6g}")
    sys.stdout.write("\n".join(str(s) for s in lines) + "\n")
    return EXIT_OK


def cmd_uncertainty(args, config) -> int:
    if args.u_grid:
        u = np.array([float(x) for x in args.u_grid.split(",")])
    else:
        u = np.linspace(0.1, 5.0, 50)
    if np.any(u <= 0.0):
        raise ValidationError("normalized frequencies must be positive")
    s_x = spectra.intensity_diff_spectrum(u, args.xi)
    s_p = spectra.phase_diff_spectrum(u, args.xi)
    product = s_x * s_p
    excess = spectra.uncertainty_excess(u, args.xi)
    lines = ["u,s_intensity,s_phase,product,excess_over_1"]
    for i in range(u.size):
        lines.append(
            f"{u[i]:.10g},{np.atleast_1d(s_x)[i]:.12g},{np.atleast_1d(s_p)[i]:.12g},"
            f"{np.atleast_1d(product)[i]:.12g},{np.atleast_1d(excess)[i]:.12g}"
        )
    _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def cmd_synth(args, config) -> int:
    params = _params_from_args(args)
    nu = _grid_from_args(args, config)
    trace = tracefit.synth_trace(
        params, which=args.which, grid=nu, noise_db=args.noise_db,
        seed=args.seed, rbw_hz=args.rbw_hz, label=args.label,
    )
    _emit(tracefit.trace_to_csv(trace), args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser wiring
# ---------------------------------------------------------------------------


def _add_model_params(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--xi", type=float, help="correlation coefficient in (0, 1]")
    parser.add_argument("--delta-hz", type=float, help="cavity FWHM in Hz")
    parser.add_argument("--s0-dbm", type=float, required=True, help="shot-noise level in dBm")
    parser.add_argument("--t", dest="transmissivity", type=float, help="output-coupler transmissivity")
    parser.add_argument("--a", dest="loss", type=float, help="single-pass intensity loss")
    parser.add_argument("--d", dest="fsr_hz", type=float, help="free spectral range in Hz")


def _add_grid(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--f-start", type=float, help="grid start (Hz)")
    parser.add_argument("--f-stop", type=float, help="grid stop (Hz)")
    parser.add_argument("--f-step", type=float, help="grid step (Hz)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twinbeam", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--config", help="config file overriding the packaged defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    p_hom = sub.add_parser("hom", help="two-photon interference demo")
    p_hom.add_argument("--n-a", type=int, default=1)
    p_hom.add_argument("--n-b", type=int, default=1)
    p_hom.add_argument("--distinguishable", action="store_true",
                       help="give the second beam a different frequency tag")
    p_hom.add_argument("--theta", type=float, default=np.pi / 8,
                       help="wave-plate angle in radians (pi/8 acts as a balanced splitter)")
    p_hom.add_argument("--cutoff", type=int, default=0, help="per-mode Fock cutoff")
    p_hom.add_argument("--format", choices=("csv", "structured"), default="structured")
    p_hom.add_argument("--output")
    p_hom.set_defaults(func=cmd_hom)

    p_lim = sub.add_parser("limits", help="scaling table for |N,0> and |N,N> inputs")
    p_lim.add_argument("--n-max", type=int, default=8)
    p_lim.add_argument("--output")
    p_lim.set_defaults(func=cmd_limits)

    p_spec = sub.add_parser("spectra", help="model curves on a frequency grid")
    _add_model_params(p_spec)
    _add_grid(p_spec)
    p_spec.add_argument("--which", choices=("intensity", "phase", "flat", "both"), default="both")
    p_spec.add_argument("--output")
    p_spec.set_defaults(func=cmd_spectra)

    p_fit = sub.add_parser("fit", help="fit a trace and predict the phase spectrum")
    p_fit.add_argument("--trace", required=True, help="intensity-difference trace CSV")
    p_fit.add_argument("--floor", help="detection noise-floor trace CSV")
    p_fit.add_argument("--f-min", type=float, help="fit window lower edge (Hz)")
    p_fit.add_argument("--f-max", type=float, help="fit window upper edge (Hz)")
    p_fit.add_argument("--exclude", action="append", metavar="LO:HI",
                       help="exclusion band in Hz, repeatable")
    p_fit.add_argument("--guess", help="initial guess s0_dbm,xi,delta_hz")
    p_fit.add_argument("--weight-space", choices=("db", "linear"))
    p_fit.add_argument("--phase-grid", metavar="START,STOP,STEP",
                       help="grid for the predicted phase curve (Hz)")
    p_fit.add_argument("--output-prefix", default="twinbeam_fit")
    p_fit.set_defaults(func=cmd_fit)

    p_unc = sub.add_parser("uncertainty", help="uncertainty-product table")
    p_unc.add_argument("--xi", type=float, required=True)
    p_unc.add_argument("--u-grid", help="comma-separated normalized frequencies")
    p_unc.add_argument("--output")
    p_unc.set_defaults(func=cmd_uncertainty)

    p_syn = sub.add_parser("synth", help="generate a synthetic trace CSV")
    _add_model_params(p_syn)
    _add_grid(p_syn)
    p_syn.add_argument("--which", choices=("intensity", "phase", "flat"), default="intensity")
    p_syn.add_argument("--noise-db", type=float, default=0.0)
    p_syn.add_argument("--seed", type=int, default=0)
    p_syn.add_argument("--rbw-hz", type=float, default=30e3)
    p_syn.add_argument("--label", default="")
    p_syn.add_argument("--output")
    p_syn.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        return args.func(args, config)
    except (TraceParseError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except FitConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (ValidationError, DomainError, CapacityError, TwinbeamError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
