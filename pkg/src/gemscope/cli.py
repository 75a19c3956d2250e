"""Command line front end.

Four subcommands mirror the bench workflow:

``scan``     simulate the far field for a grid of input detunings
``detect``   turn a scan table into photon-counting camera statistics
``analyze``  estimation on measured tables (fisher / bootstrap / line /
             resolve)
``limits``   closed-form resolution and efficiency budget

Every invocation writes a run manifest (JSON) recording the command
line, configuration source, package version, outputs and outcome, also
when the run fails with a handled error.  Exit codes: 0 success, 2
configuration or usage problems, 3 physics-domain violations, 4
analysis failures.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
import warnings
from dataclasses import asdict
from dataclasses import replace as dc_replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import PhysicalConfig, load_config, paper_defaults
from .detector import histogram, sample_frames
from .errors import (
    AnalysisError,
    BandwidthExceededError,
    ConfigError,
    DegenerateDistributionError,
    ExtentError,
    FitError,
    GemscopeError,
    GridMismatchError,
)
from .estimation import (
    EmpiricalPdfFamily,
    bootstrap_position,
    cramer_rao_bound,
    fisher_information,
    fit_gaussian,
    fit_line,
    resolvability_sweep,
    resolve_two_peaks,
)
from .formulas import angle_slope, efficiency_chain, resolution_limits
from .grid import Grid2D
from .io import (
    jsonify,
    read_frames_jsonl,
    read_scan_csv,
    read_scan_json,
    write_frames_jsonl,
    write_report,
    write_rows_csv,
    write_scan_csv,
    write_scan_json,
)
from .masks import (
    gradient_calibration_mask,
    ideal_prism_mask,
    mask_from_image,
    wrap_and_blur_mask,
)
from .propagation import (
    AngularSpectrum,
    GaussianSpectrum,
    TwoPeakSpectrum,
    frequency_scan,
    scan_detunings,
)
from .units import require

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PHYSICS = 3
EXIT_ANALYSIS = 4

ENV_CONFIG = "GEMSCOPE_CONFIG"
TWO_PI = 2.0 * math.pi

_PHYSICS_ERRORS = (
    BandwidthExceededError,
    ExtentError,
    GridMismatchError,
    DegenerateDistributionError,
)
_ANALYSIS_ERRORS = (FitError, AnalysisError)


# ---------------------------------------------------------------------------
# Argument helpers


def _angular_frequency(text: str) -> float:
    """CLI frequency arguments use the config notation, e.g. '2pi*1.6 MHz'."""
    return require(text, "command line frequency", "1/T", angular=True)


def _wavevector(text: str) -> float:
    return require(text, "command line wavevector", "1/L", angular=True)


def _length(text: str) -> float:
    return require(text, "command line length", "L", angular=None)


def _add_sim_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("simulation")
    group.add_argument(
        "--mask",
        default="ideal",
        metavar="KIND",
        help="phase mask: ideal, blurred, calib, or image:<png path> "
        "(default: ideal)",
    )
    group.add_argument(
        "--kappa",
        metavar="QTY",
        help="prism wavevector override, e.g. '2pi*20.4 1/mm'",
    )
    group.add_argument(
        "--blur-sigma",
        metavar="QTY",
        help="projection blur for --mask blurred, e.g. '15 um'",
    )
    group.add_argument(
        "--flip-every",
        type=float,
        default=110.0,
        metavar="PX",
        help="sign-flip period of --mask calib in display pixels (default: 110)",
    )
    group.add_argument(
        "--pixels-per-m",
        type=float,
        default=None,
        help="display sampling for image masks (else taken from the sidecar)",
    )


def _add_spectrum_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("input spectrum")
    group.add_argument(
        "--span",
        default="2pi*1.6 MHz",
        metavar="QTY",
        help="full detuning span of the scan (default: '2pi*1.6 MHz')",
    )
    group.add_argument(
        "--steps", type=int, default=40, help="number of scan detunings (default: 40)"
    )
    group.add_argument(
        "--detuning",
        action="append",
        metavar="QTY",
        help="explicit detuning(s), e.g. '2pi*200 kHz'; overrides --span/--steps",
    )
    group.add_argument(
        "--two-peak",
        metavar="QTY",
        help="use a two-line input with this separation, e.g. '2pi*150 kHz'",
    )
    group.add_argument(
        "--coherent",
        action="store_true",
        help="make the two lines mutually coherent (default: incoherent)",
    )
    group.add_argument(
        "--sigma-t", metavar="QTY", help="pulse temporal sigma override, e.g. '5.64 us'"
    )
    group.add_argument(
        "--pad", type=int, default=4, help="FFT zero-padding factor (default: 4)"
    )
    group.add_argument(
        "--max-angle-mrad",
        type=float,
        default=60.0,
        help="angular half-range kept in the output (default: 60)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gemscope",
        description="Spectrum-to-position converter simulator and analysis toolkit.",
    )
    parser.add_argument(
        "--config",
        metavar="PATH",
        help=f"configuration JSON (default: ${ENV_CONFIG} or the bundled profile)",
    )
    parser.add_argument(
        "--manifest",
        metavar="PATH",
        help="run manifest path (default: derived from --out)",
    )
    parser.add_argument("--version", action="version", version=f"gemscope {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_scan = sub.add_parser(
        "scan", help="simulate the far field over a detuning scan"
    )
    _add_sim_options(p_scan)
    _add_spectrum_options(p_scan)
    p_scan.add_argument(
        "--out", default="scan.csv", metavar="PATH", help="output table (.csv or .json)"
    )

    p_detect = sub.add_parser(
        "detect", help="Monte-Carlo camera counts for a simulated scan table"
    )
    p_detect.add_argument("--scan", required=True, metavar="PATH", help="scan table input")
    p_detect.add_argument(
        "--frames", type=int, default=2000, help="camera frames per detuning (default: 2000)"
    )
    p_detect.add_argument("--seed", type=int, default=0, help="base RNG seed (default: 0)")
    p_detect.add_argument(
        "--signal-rate",
        type=float,
        default=None,
        help="mean signal photons per frame at the strongest detuning "
        "(default: the configured camera rate)",
    )
    p_detect.add_argument(
        "--out", default="counts.csv", metavar="PATH", help="counts table (.csv or .json)"
    )
    p_detect.add_argument(
        "--frames-out",
        metavar="PATH",
        help="also write the raw frame stack (single-detuning scans only)",
    )

    p_an = sub.add_parser("analyze", help="estimation on measured tables")
    p_an.add_argument(
        "--mode",
        choices=("fisher", "bootstrap", "line", "resolve"),
        default="fisher",
        help="analysis to run (default: fisher)",
    )
    p_an.add_argument("--counts", metavar="PATH", help="counts table from 'detect'")
    p_an.add_argument("--scan", metavar="PATH", help="noiseless scan table from 'scan'")
    p_an.add_argument("--frames", metavar="PATH", help="frame stack from 'detect --frames-out'")
    p_an.add_argument(
        "--min-photons",
        type=int,
        default=100,
        help="drop scan-edge rows with fewer photons (default: 100)",
    )
    p_an.add_argument("--samples", type=int, default=100, help="bootstrap samples (default: 100)")
    p_an.add_argument(
        "--frames-per-sample",
        type=int,
        default=500,
        help="frames per bootstrap sample (default: 500)",
    )
    p_an.add_argument("--seed", type=int, default=0, help="bootstrap RNG seed (default: 0)")
    p_an.add_argument("--row", type=int, default=0, help="table row for --mode resolve")
    p_an.add_argument(
        "--epsilon",
        metavar="QTY",
        help="simulate a two-line input with this separation for --mode "
        "resolve, e.g. '2pi*450 kHz'",
    )
    p_an.add_argument(
        "--sweep",
        nargs=3,
        metavar=("START", "STOP", "N"),
        help="simulate a separation sweep for --mode resolve, "
        "e.g. --sweep '2pi*60 kHz' '2pi*240 kHz' 10",
    )
    _add_sim_options(p_an)
    p_an.add_argument("--out", default="report.json", metavar="PATH", help="report JSON")

    p_lim = sub.add_parser("limits", help="closed-form resolution and efficiency budget")
    p_lim.add_argument("--kappa", metavar="QTY", help="prism wavevector override")
    p_lim.add_argument("--out", metavar="PATH", help="also write the budget as JSON")

    return parser


# ---------------------------------------------------------------------------
# Shared pieces


def _resolve_config(args) -> tuple[PhysicalConfig, str]:
    if args.config:
        return load_config(args.config), str(args.config)
    env = os.environ.get(ENV_CONFIG)
    if env:
        return load_config(env), f"{env} (from ${ENV_CONFIG})"
    return paper_defaults(), "bundled defaults"


def _apply_overrides(cfg: PhysicalConfig, args) -> PhysicalConfig:
    if getattr(args, "kappa", None):
        cfg = cfg.replace(prism_wavevector=_wavevector(args.kappa))
    return cfg


def _build_mask(cfg: PhysicalConfig, args, grid: Grid2D):
    kind = args.mask
    if kind == "ideal":
        return ideal_prism_mask(cfg, grid)
    if kind == "blurred":
        blur = _length(args.blur_sigma) if args.blur_sigma else None
        base = ideal_prism_mask(cfg, grid)
        if blur is None:
            return wrap_and_blur_mask(base)
        return wrap_and_blur_mask(base, blur_sigma=blur)
    if kind == "calib":
        return gradient_calibration_mask(cfg, grid, flip_every=args.flip_every)
    if kind.startswith("image:"):
        return mask_from_image(kind[len("image:"):], grid, pixels_per_m=args.pixels_per_m)
    raise ConfigError(
        f"unknown mask kind {kind!r}; expected ideal, blurred, calib or image:<path>"
    )


def _spectrum_from_args(cfg: PhysicalConfig, args):
    sigma_t = require(args.sigma_t, "--sigma-t", "T") if args.sigma_t else cfg.pulse_sigma_t
    sigma_omega = 1.0 / sigma_t
    if args.two_peak:
        separation = _angular_frequency(args.two_peak)
        return TwoPeakSpectrum(
            sigma_omega=sigma_omega, separation=separation, coherent=args.coherent
        )
    return GaussianSpectrum(sigma_omega=sigma_omega)


def _detunings_from_args(args) -> np.ndarray:
    if args.detuning:
        return np.array([_angular_frequency(d) for d in args.detuning])
    span = _angular_frequency(args.span)
    return scan_detunings(span, args.steps)


def _read_table(path: str) -> AngularSpectrum:
    path = Path(path)
    try:
        if path.suffix.lower() == ".json":
            return read_scan_json(path)
        return read_scan_csv(path)
    except OSError as exc:
        raise ConfigError(f"cannot read table {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _read_frames(path: str):
    try:
        return read_frames_jsonl(path)
    except OSError as exc:
        raise ConfigError(f"cannot read frame stack {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _write_table(path: str, scan: AngularSpectrum) -> Path:
    path = Path(path)
    if path.suffix.lower() == ".json":
        return write_scan_json(path, scan)
    return write_scan_csv(path, scan)


# ---------------------------------------------------------------------------
# Subcommands


def cmd_scan(cfg: PhysicalConfig, args, manifest: dict) -> int:
    grid = Grid2D.for_cloud(cfg)
    mask = _build_mask(cfg, args, grid)
    spectrum = _spectrum_from_args(cfg, args)
    detunings = _detunings_from_args(args)
    scan = frequency_scan(
        cfg,
        mask,
        detunings=detunings,
        spectrum=spectrum,
        pad_factor=args.pad,
        max_angle=args.max_angle_mrad * 1e-3,
    )
    out = _write_table(args.out, scan)
    manifest["outputs"].append(str(out))
    manifest["parameters"] = {
        "mask": mask.provenance,
        "kappa_rad_per_m": mask.metadata.get("kappa"),
        "detunings_hz": jsonify(detunings / TWO_PI),
        "spectrum": scan.metadata.get("spectrum"),
        "angular_resolution_rad": scan.angular_resolution,
    }
    print(
        f"scan: {detunings.size} detunings x {scan.angles.size} angles "
        f"({mask.provenance} mask) -> {out}"
    )
    return EXIT_OK


def cmd_detect(cfg: PhysicalConfig, args, manifest: dict) -> int:
    scan = _read_table(args.scan)
    if args.frames < 1:
        raise ConfigError("--frames must be at least 1")
    camera = cfg.camera
    base_rate = camera.mean_signal_per_frame if args.signal_rate is None else args.signal_rate
    if base_rate < 0:
        raise ConfigError("--signal-rate must be non-negative")
    totals = scan.row_totals
    peak = float(totals.max())
    if peak <= 0:
        raise DegenerateDistributionError("scan table carries no intensity at all")

    rows = []
    photons = []
    stack = None
    for j, (delta, row) in enumerate(zip(scan.detunings, scan.intensity)):
        # Photon flux follows the stored energy, so weaker detunings get
        # proportionally fewer signal counts than the scan's strongest row.
        rate = base_rate * float(totals[j]) / peak
        cam = dc_replace(camera, mean_signal_per_frame=rate, seed=args.seed)
        frames = sample_frames(
            scan.angles,
            row,
            cam,
            args.frames,
            stream=j,
            extra_metadata={"detuning_rad_s": float(delta), "scan_row": j},
        )
        per_pixel, total = histogram(frames)
        rows.append(per_pixel)
        photons.append(total)
        if stack is None:
            stack = frames

    counts = AngularSpectrum(
        detunings=scan.detunings,
        angles=camera.pixel_centers(),
        intensity=np.vstack(rows).astype(float),
        angular_resolution=camera.pixel_pitch_angle,
        provenance="counts",
        metadata={
            "frames_per_detuning": args.frames,
            "seed": args.seed,
            "signal_rate_peak": base_rate,
            "noise_rate": camera.mean_noise_per_frame,
            "dark_rate": camera.mean_dark_per_frame,
            "photons_per_detuning": [int(n) for n in photons],
            "source": str(args.scan),
        },
    )
    out = _write_table(args.out, counts)
    manifest["outputs"].append(str(out))

    if args.frames_out:
        if scan.detunings.size != 1:
            raise ConfigError(
                "--frames-out keeps every frame and is only supported for "
                "single-detuning scans (use scan --steps 1 or --detuning)"
            )
        frames_path = write_frames_jsonl(args.frames_out, stack)
        manifest["outputs"].append(str(frames_path))

    manifest["parameters"] = {
        "frames_per_detuning": args.frames,
        "seed": args.seed,
        "signal_rate_peak": base_rate,
        "total_photons": int(sum(photons)),
    }
    print(
        f"detect: {args.frames} frames x {scan.detunings.size} detunings, "
        f"{int(sum(photons))} photons -> {out}"
    )
    return EXIT_OK


def _analyze_fisher(cfg: PhysicalConfig, args) -> dict:
    if not args.counts:
        raise ConfigError("--mode fisher needs --counts (output of 'detect')")
    table = _read_table(args.counts)
    family = EmpiricalPdfFamily.from_counts(
        table.detunings, table.angles, table.intensity, min_photons=args.min_photons
    )
    slope = angle_slope(cfg)
    rows = []
    for j in range(1, family.detunings.size - 1):
        fisher = fisher_information(family, j)
        crb = cramer_rao_bound(fisher, family.photons[j])
        rows.append(
            {
                "detuning_hz": family.detunings[j] / TWO_PI,
                "photons": family.photons[j],
                "fisher_rad_s_sq": fisher,
                "crb_rad_s": crb,
                "crb_hz": crb / TWO_PI,
            }
        )
    if not rows:
        raise AnalysisError("no interior detunings left after trimming")
    crbs = np.array([r["crb_hz"] for r in rows])
    report = {
        "mode": "fisher",
        "source": str(args.counts),
        "min_photons": args.min_photons,
        "angle_slope_rad_per_rad_s": slope,
        "rows": rows,
        "median_crb_hz": float(np.median(crbs)),
        "best_crb_hz": float(crbs.min()),
    }
    print(
        f"fisher: {len(rows)} detunings, median Cramer-Rao bound "
        f"{report['median_crb_hz']:.1f} Hz (best {report['best_crb_hz']:.1f} Hz)"
    )
    return report


def _analyze_bootstrap(cfg: PhysicalConfig, args) -> dict:
    if not args.frames:
        raise ConfigError("--mode bootstrap needs --frames (a frame stack)")
    frames = _read_frames(args.frames)
    result = bootstrap_position(
        frames,
        n_samples=args.samples,
        frames_per_sample=args.frames_per_sample,
        seed=args.seed,
    )
    slope = angle_slope(cfg)
    sigma_theta = math.sqrt(result.center_var)
    report = {
        "mode": "bootstrap",
        "source": str(args.frames),
        "n_samples": result.n_samples,
        "frames_per_sample": result.frames_per_sample,
        "photons_per_sample": result.photons_per_sample,
        "center_mean_rad": result.center_mean,
        "center_std_rad": sigma_theta,
        "center_std_hz": sigma_theta / slope / TWO_PI,
        "pooled_fit": result.pooled.params,
        "centers_rad": jsonify(result.centers),
    }
    print(
        f"bootstrap: {result.n_samples} samples of {result.frames_per_sample} frames, "
        f"position scatter {sigma_theta * 1e6:.2f} urad "
        f"= {report['center_std_hz']:.1f} Hz"
    )
    return report


def _analyze_line(cfg: PhysicalConfig, args) -> dict:
    source = args.counts or args.scan
    if not source:
        raise ConfigError("--mode line needs --counts or --scan")
    table = _read_table(source)
    totals = table.intensity.sum(axis=1)
    if args.counts:
        # Uniform stray light floods every row with counts; the quietest
        # row estimates that floor, and rows are kept by signal above it.
        baseline = float(totals.min())
        keep = (totals - baseline) >= args.min_photons
    else:
        keep = totals >= 1e-3 * float(totals.max())
    if keep.sum() < 3:
        raise AnalysisError("fewer than 3 usable detunings for the line fit")

    centers = []
    detunings = []
    for delta, row in zip(table.detunings[keep], table.intensity[keep]):
        fit = fit_gaussian(table.angles, row)
        centers.append(fit.params["center"])
        detunings.append(delta)
    detunings = np.array(detunings)
    centers = np.array(centers)

    line = fit_line(detunings, centers)
    used = line.metadata["used"]
    fitted = line.params["slope"]
    analytic = angle_slope(cfg)
    deviation = abs(fitted - analytic) / analytic
    report = {
        "mode": "line",
        "source": str(source),
        "n_rows": int(keep.sum()),
        "n_used": int(line.metadata["n_used"]),
        "slope_rad_per_rad_s": fitted,
        "slope_err_rad_per_rad_s": line.uncertainties["slope"],
        "slope_mrad_per_mhz": fitted * TWO_PI * 1e6 * 1e3,
        "intercept_rad": line.params["intercept"],
        "analytic_slope_rad_per_rad_s": analytic,
        "relative_deviation": deviation,
        "rows": [
            {"detuning_hz": d / TWO_PI, "center_rad": c, "used": bool(u)}
            for d, c, u in zip(detunings, centers, used)
        ],
    }
    print(
        f"line: slope {report['slope_mrad_per_mhz']:.3f} mrad/MHz over "
        f"{report['n_used']} detunings "
        f"({deviation * 100:.2f}% from the closed form)"
    )
    return report


def _analyze_resolve(cfg: PhysicalConfig, args) -> dict:
    slope = angle_slope(cfg)
    if args.epsilon:
        separation = _angular_frequency(args.epsilon)
        if separation <= 0:
            raise ConfigError("--epsilon must be positive")
        grid = Grid2D.for_cloud(cfg)
        mask = _build_mask(cfg, args, grid)
        spectrum = TwoPeakSpectrum(sigma_omega=cfg.pulse_sigma_omega, separation=separation)
        scan = frequency_scan(cfg, mask, detunings=[0.0], spectrum=spectrum)
        result = resolve_two_peaks(scan.angles, scan.intensity[0], slope=slope)
        report = {
            "mode": "resolve",
            "epsilon_hz": separation / TWO_PI,
            "mask": mask.provenance,
            "resolvable": result.resolvable,
            "contrast": result.contrast,
            "threshold": result.threshold,
            "separation_mrad": result.separation_angle * 1e3,
            "separation_hz": result.separation_omega / TWO_PI,
            "sigma_mrad": result.sigma_angle * 1e3,
            "fit": result.fit.params,
        }
        verdict = "resolved" if result.resolvable else "not resolved"
        print(
            f"resolve: {separation / TWO_PI / 1e3:.0f} kHz lines, contrast "
            f"{result.contrast:.4f} vs threshold {result.threshold:.4f} -> {verdict}"
        )
        return report
    if args.sweep:
        start = _angular_frequency(args.sweep[0])
        stop = _angular_frequency(args.sweep[1])
        try:
            n = int(args.sweep[2])
        except ValueError as exc:
            raise ConfigError(f"--sweep N must be an integer, got {args.sweep[2]!r}") from exc
        if not (0 < start < stop) or n < 2:
            raise ConfigError("--sweep needs 0 < START < STOP and N >= 2")
        grid = Grid2D.for_cloud(cfg)
        mask = _build_mask(cfg, args, grid)
        sweep = resolvability_sweep(cfg, np.linspace(start, stop, n), mask=mask)
        report = {
            "mode": "resolve",
            "sweep": [
                {
                    "separation_hz": eps / TWO_PI,
                    "contrast": float(c),
                    "resolvable": bool(r),
                }
                for eps, c, r in zip(sweep.epsilons, sweep.contrasts, sweep.resolvable)
            ],
            "threshold": sweep.threshold,
            "crossing_hz": None
            if sweep.crossing_omega is None
            else sweep.crossing_omega / TWO_PI,
        }
        if sweep.crossing_omega is None:
            print("resolve: no separation in the sweep is resolvable")
        else:
            print(
                f"resolve: lines become resolvable at "
                f"{sweep.crossing_omega / TWO_PI / 1e3:.1f} kHz separation"
            )
        return report

    source = args.counts or args.scan
    if not source:
        raise ConfigError("--mode resolve needs --counts, --scan or --sweep")
    table = _read_table(source)
    if not 0 <= args.row < table.detunings.size:
        raise ConfigError(f"--row {args.row} outside table with {table.detunings.size} rows")
    result = resolve_two_peaks(table.angles, table.intensity[args.row], slope=slope)
    report = {
        "mode": "resolve",
        "source": str(source),
        "row": args.row,
        "resolvable": result.resolvable,
        "contrast": result.contrast,
        "threshold": result.threshold,
        "separation_mrad": result.separation_angle * 1e3,
        "separation_hz": None
        if result.separation_omega is None
        else result.separation_omega / TWO_PI,
        "sigma_mrad": result.sigma_angle * 1e3,
        "fit": result.fit.params,
    }
    verdict = "resolved" if result.resolvable else "not resolved"
    print(
        f"resolve: contrast {result.contrast:.3f} vs threshold "
        f"{result.threshold:.4f} -> {verdict}"
    )
    return report


def _csv_mirror(report: dict):
    """Tabular slice of a report for plotting, or None."""
    if report["mode"] == "fisher":
        header = ["detuning_hz", "photons", "fisher_rad_s_sq", "crb_rad_s", "crb_hz"]
        return header, [[row[h] for h in header] for row in report["rows"]]
    if report["mode"] == "bootstrap":
        return ["sample", "center_rad"], list(enumerate(report["centers_rad"]))
    if report["mode"] == "line":
        header = ["detuning_hz", "center_rad", "used"]
        return header, [[row[h] for h in header] for row in report["rows"]]
    if report["mode"] == "resolve" and "sweep" in report:
        header = ["separation_hz", "contrast", "resolvable"]
        return header, [[row[h] for h in header] for row in report["sweep"]]
    return None


def cmd_analyze(cfg: PhysicalConfig, args, manifest: dict) -> int:
    handler = {
        "fisher": _analyze_fisher,
        "bootstrap": _analyze_bootstrap,
        "line": _analyze_line,
        "resolve": _analyze_resolve,
    }[args.mode]
    report = handler(cfg, args)
    out = write_report(args.out, report)
    manifest["outputs"].append(str(out))
    mirror = _csv_mirror(report)
    if mirror is not None:
        csv_path = Path(args.out).with_suffix(".csv")
        if csv_path == Path(args.out):
            csv_path = csv_path.with_suffix(".table.csv")
        write_rows_csv(csv_path, *mirror)
        manifest["outputs"].append(str(csv_path))
    manifest["parameters"] = {"mode": args.mode}
    return EXIT_OK


def cmd_limits(cfg: PhysicalConfig, args, manifest: dict) -> int:
    lim = resolution_limits(cfg)
    eff = efficiency_chain(cfg)
    slope = angle_slope(cfg)
    max_deflection = cfg.slm_wavevector_limit / cfg.wavevector
    lines = [
        f"bandwidth                {cfg.bandwidth / TWO_PI / 1e6:10.4f} MHz",
        f"angle slope              {slope * TWO_PI * 1e6 * 1e3:10.4f} mrad/MHz",
        f"beam divergence          {lim.beam_divergence * 1e3:10.4f} mrad",
        f"frequency waist          {lim.beam_divergence_omega / TWO_PI / 1e3:10.4f} kHz",
        f"min resolvable           {lim.min_resolvable_omega / TWO_PI / 1e3:10.4f} kHz",
        f"resolving power          {lim.resolving_power:10.4g}",
        f"mask wavevector limit    {lim.mask_wavevector_limit / TWO_PI / 1e3:10.4f} /mm",
        f"max display deflection   {max_deflection * 1e3:10.4f} mrad",
    ]
    for name, factor in eff.stages:
        lines.append(f"efficiency: {name:<21}{factor:8.4f}")
    lines.append(f"efficiency: memory (photon){eff.eta_memory:7.4f}")
    lines.append(f"efficiency: detected total {eff.eta_total:7.5f}")
    print("\n".join(lines))

    if args.out:
        report = {
            "bandwidth_hz": cfg.bandwidth / TWO_PI,
            "angle_slope_rad_per_rad_s": slope,
            "beam_divergence_rad": lim.beam_divergence,
            "beam_divergence_omega_hz": lim.beam_divergence_omega / TWO_PI,
            "min_resolvable_hz": lim.min_resolvable_omega / TWO_PI,
            "resolving_power": lim.resolving_power,
            "mask_wavevector_limit_rad_per_m": lim.mask_wavevector_limit,
            "max_deflection_rad": max_deflection,
            "efficiency_stages": {name: factor for name, factor in eff.stages},
            "eta_absorption": eff.eta_absorption,
            "eta_memory": eff.eta_memory,
            "eta_total": eff.eta_total,
        }
        out = write_report(args.out, report)
        manifest["outputs"].append(str(out))
    manifest["parameters"] = {"kappa_rad_per_m": cfg.prism_wavevector}
    return EXIT_OK


_COMMANDS = {
    "scan": cmd_scan,
    "detect": cmd_detect,
    "analyze": cmd_analyze,
    "limits": cmd_limits,
}


# ---------------------------------------------------------------------------
# Entry point


def _manifest_path(args) -> Path:
    if args.manifest:
        return Path(args.manifest)
    out = getattr(args, "out", None)
    if out:
        out = Path(out)
        return out.with_name(out.name + ".manifest.json")
    return Path(f"gemscope_{args.command}_manifest.json")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    manifest = {
        "tool": "gemscope",
        "version": __version__,
        "command": args.command,
        "argv": list(sys.argv[1:] if argv is None else argv),
        "timestamp_utc": datetime.now(timezone.utc).isoformat(),
        "seed": getattr(args, "seed", None),
        "status": "ok",
        "error": None,
        "outputs": [],
        "parameters": {},
    }

    def _show_warning(message, category, filename, lineno, file=None, line=None):
        print(f"warning: {message}", file=sys.stderr)

    code = EXIT_OK
    started = time.monotonic()
    previous_showwarning = warnings.showwarning
    warnings.showwarning = _show_warning
    try:
        cfg, source = _resolve_config(args)
        manifest["config_source"] = source
        cfg = _apply_overrides(cfg, args)
        manifest["config"] = asdict(cfg)
        code = _COMMANDS[args.command](cfg, args, manifest)
    except ConfigError as exc:
        code = EXIT_CONFIG
        manifest["error"] = {"type": type(exc).__name__, "message": str(exc)}
    except _PHYSICS_ERRORS as exc:
        code = EXIT_PHYSICS
        manifest["error"] = {"type": type(exc).__name__, "message": str(exc)}
    except _ANALYSIS_ERRORS as exc:
        code = EXIT_ANALYSIS
        manifest["error"] = {"type": type(exc).__name__, "message": str(exc)}
    except GemscopeError as exc:
        code = EXIT_CONFIG
        manifest["error"] = {"type": type(exc).__name__, "message": str(exc)}
    finally:
        warnings.showwarning = previous_showwarning

    if manifest["error"] is not None:
        manifest["status"] = "error"
        print(f"error: {manifest['error']['message']}", file=sys.stderr)

    manifest["duration_s"] = round(time.monotonic() - started, 3)
    manifest_path = _manifest_path(args)
    try:
        manifest_path.write_text(json.dumps(jsonify(manifest), indent=2) + "\n")
    except OSError as exc:
        print(f"warning: could not write manifest {manifest_path}: {exc}", file=sys.stderr)

    return code


if __name__ == "__main__":
    sys.exit(main())
