"""Command-line front end.

Subcommands expose the full pipeline: extinction tables (``alpha``), the
efficiency Monte-Carlo (``qeff``), clear-to-snow conversion (``augment``),
clutter-template extraction (``extract-template``), and cloud statistics
(``stats``). Every command is a thin shell over the library; all numerical
work lives in the importable modules.

Flag values override config-file values, which override built-in defaults.
The config file holds ``key = value`` lines (``#`` comments allowed) keyed by
the long flag names with dashes or underscores.

Exit codes: 0 success, 2 usage or parameter error, 3 input-data error,
4 internal numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .augmentation import (
    CALIBRATED_UNIT_SCALE,
    AugmentationConfig,
    EmptySelectionError,
    InjectionBudgetError,
    augment,
    extract_template,
)
from .lidar_model import CLEAR_AIR_EXTINCTION, SensorConfig, power_ratio
from .pointcloud_io import (
    CloudFormatError,
    MetadataError,
    RunMetadata,
    read_cloud,
    read_template,
    write_cloud,
    write_metadata,
    write_template,
)
from .quadrature import QuadratureError
from .scattering import (
    DEFAULT_DETECTOR_RADIUS,
    ConstantEfficiency,
    SnowfallParams,
    efficiency_population,
    extinction_coefficient,
)

_EXIT_OK = 0
_EXIT_USAGE = 2
_EXIT_INPUT = 3
_EXIT_NUMERIC = 4

# shared-flag defaults; wavelength is nm, PSD parameters are the published CGS
_DEFAULTS = {
    "seed": 0,
    "sr": 5.0,
    "wavelength": 905.0,
    "r1": 0.5,
    "r2": 4.0,
    "n0": 0.5,
    "lambda_coeff": 0.41,
    "lambda_exp": 0.31,
    "unit_scale": 1.0,
    "drop_threshold": 1.0,
    "jitter_sigma": 0.15,
    "f_det": None,
}

_SHARED_TYPES = {
    "seed": int,
    "sr": float,
    "wavelength": float,
    "r1": float,
    "r2": float,
    "n0": float,
    "lambda_coeff": float,
    "lambda_exp": float,
    "unit_scale": float,
    "drop_threshold": float,
    "jitter_sigma": float,
    "f_det": float,
}


def _shared_flags(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("model parameters")
    g.add_argument("--seed", type=int, help="random seed (default 0)")
    g.add_argument("--config", type=Path, help="key=value config file; flags win over it")
    g.add_argument("--sr", type=float, help="snowfall rate, mm/h (default 5)")
    g.add_argument("--wavelength", type=float, help="laser wavelength, nm")
    g.add_argument("--r1", type=float, help="minimum effective range, m (default 0.5)")
    g.add_argument("--r2", type=float, help="full-overlap range, m (default 4)")
    g.add_argument("--n0", type=float, help="PSD intercept, cm^-4 (default 0.5)")
    g.add_argument("--lambda-coeff", dest="lambda_coeff", type=float,
                   help="PSD slope-law coefficient, cm^-1 (default 0.41)")
    g.add_argument("--lambda-exp", dest="lambda_exp", type=float,
                   help="PSD slope-law exponent (default 0.31)")
    g.add_argument("--unit-scale", dest="unit_scale", type=float,
                   help="number-density multiplier (default 1; augment uses its calibrated scale)")
    g.add_argument("--drop-threshold", dest="drop_threshold", type=float,
                   help="raw-intensity detector floor (default 1)")
    g.add_argument("--jitter-sigma", dest="jitter_sigma", type=float,
                   help="clutter jitter sigma, m (default 0.15)")
    g.add_argument("--f-det", dest="f_det", type=float,
                   help="detection fraction in (0, 1] (default: calibrated from template)")


def _read_config_file(path: Path) -> dict:
    if not path.is_file():
        raise ValueError(f"config file not found: {path}")
    values = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}: line {lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in _SHARED_TYPES:
            raise ValueError(f"{path}: line {lineno}: unknown key {key!r}")
        try:
            values[key] = _SHARED_TYPES[key](value.strip())
        except ValueError:
            raise ValueError(f"{path}: line {lineno}: bad value for {key!r}: {value.strip()!r}") from None
    return values


def _resolve(args: argparse.Namespace, overrides: dict | None = None) -> dict:
    """Merge flags > config file > defaults into one settings dict."""
    defaults = dict(_DEFAULTS)
    if overrides:
        defaults.update(overrides)
    from_file = _read_config_file(args.config) if getattr(args, "config", None) else {}
    settings = {}
    for key, default in defaults.items():
        flag = getattr(args, key, None)
        settings[key] = flag if flag is not None else from_file.get(key, default)
    return settings


def _snowfall_params(s: dict, rate: float | None = None) -> SnowfallParams:
    return SnowfallParams.from_cgs(
        snowfall_rate=s["sr"] if rate is None else rate,
        n0_cm4=s["n0"],
        slope_coeff_cm=s["lambda_coeff"],
        slope_exponent=s["lambda_exp"],
        unit_scale=s["unit_scale"],
    )


def _sensor_config(s: dict) -> SensorConfig:
    return SensorConfig(
        wavelength=s["wavelength"] * 1e-9,
        detector_radius=DEFAULT_DETECTOR_RADIUS,
        min_range=s["r1"],
        full_overlap_range=s["r2"],
    )


def _load_template(args: argparse.Namespace):
    if getattr(args, "template", None) is not None:
        return read_template(args.template)
    from .fixtures import clutter_template

    return clutter_template()


def _cmd_alpha(args: argparse.Namespace) -> int:
    settings = _resolve(args)
    bad = [str(sr) for sr in args.sr_values if not (sr > 0)]
    if bad:
        raise ValueError(f"invalid snowfall rate(s): {', '.join(bad)} (must be > 0 mm/h)")
    efficiency = ConstantEfficiency()
    lines = ["sr,alpha_per_m,power_ratio"]
    for sr in args.sr_values:
        params = _snowfall_params(settings, rate=sr)
        alpha = extinction_coefficient(params, efficiency)
        ratio = power_ratio(args.reference_range, CLEAR_AIR_EXTINCTION + alpha, CLEAR_AIR_EXTINCTION)
        lines.append(f"{sr!r},{alpha!r},{ratio!r}")
    table = "\n".join(lines) + "\n"
    if args.output is not None:
        Path(args.output).write_text(table, encoding="ascii")
    else:
        sys.stdout.write(table)
    return _EXIT_OK


def _cmd_qeff(args: argparse.Namespace) -> int:
    settings = _resolve(args, overrides={"wavelength": 900.0})
    params = _snowfall_params(settings)
    sample = efficiency_population(
        args.n_particles,
        (args.d_min, args.d_max),
        (args.distance_min, args.distance_max),
        params,
        detector_radius=args.rd,
        wavelength=settings["wavelength"] * 1e-9,
        seed=settings["seed"],
    )
    q1, median, q3 = (float(v) for v in np.percentile(sample, [25.0, 50.0, 75.0]))
    print(f"n={sample.size} median={median:.6f} q1={q1:.6f} q3={q3:.6f}")
    return _EXIT_OK


def _cmd_augment(args: argparse.Namespace) -> int:
    # every effective parameter is validated here, before any file is touched
    settings = _resolve(args, overrides={"unit_scale": CALIBRATED_UNIT_SCALE})
    config = AugmentationConfig(
        snowfall=_snowfall_params(settings),
        sensor=_sensor_config(settings),
        drop_threshold=settings["drop_threshold"],
        jitter_sigma=settings["jitter_sigma"],
        detection_fraction=settings["f_det"],
        seed=settings["seed"],
    )
    template = _load_template(args)
    cloud = read_cloud(args.input, args.input_format)
    out, report = augment(cloud, config, template)
    write_cloud(out, args.output, args.output_format)
    # the resolved-config echo makes the output reproducible from its sidecar
    resolved = dict(report.config)
    meta = RunMetadata(
        capture_label=args.label if args.label is not None else cloud.meta.label,
        capture_date=args.date,
        sensor=resolved.pop("sensor"),
        snowfall=resolved.pop("snowfall"),
        seed=report.seed,
        report={
            "n_kept": report.n_kept,
            "n_dropped": report.n_dropped,
            "n_injected": report.n_injected,
            "clear_extinction": report.clear_extinction,
            **resolved,
        },
    )
    write_metadata(meta, str(args.output) + ".meta.json")
    print(
        f"augmented {args.input} -> {args.output}: kept={report.n_kept} "
        f"dropped={report.n_dropped} injected={report.n_injected} "
        f"alpha_snow={report.snow_extinction:.6g}/m seed={report.seed}"
    )
    return _EXIT_OK


def _cmd_extract_template(args: argparse.Namespace) -> int:
    cloud = read_cloud(args.input, args.input_format)
    if not (args.shell_inner >= 0 and args.shell_outer > args.shell_inner):
        raise ValueError(
            f"invalid shell bounds ({args.shell_inner}, {args.shell_outer})"
        )
    template = extract_template(cloud, (args.shell_inner, args.shell_outer), args.cutoff)
    write_template(template, args.output)
    print(f"extracted {len(template)} points, intensity mean {template.intensity_mean:.4f}")
    return _EXIT_OK


def _cmd_stats(args: argparse.Namespace) -> int:
    cloud = read_cloud(args.input, args.input_format)
    print(f"points={len(cloud)}")
    if len(cloud) == 0:
        print("near_low_fraction=0")
        return _EXIT_OK
    ranges = cloud.ranges()
    pcts = np.percentile(ranges, [5, 25, 50, 75, 95])
    print(
        "range_m p5={:.3f} p25={:.3f} p50={:.3f} p75={:.3f} p95={:.3f}".format(*pcts)
    )
    intensity = cloud.intensity.astype(np.float64)
    width = args.bin_width
    if not (width > 0):
        raise ValueError(f"bin width must be > 0, got {width}")
    edges = np.arange(0.0, intensity.max() + width, width)
    if len(edges) < 2:
        edges = np.array([0.0, width])
    counts, edges = np.histogram(intensity, bins=edges)
    print("intensity histogram (bin_lo,bin_hi,count):")
    for lo, hi, count in zip(edges[:-1], edges[1:], counts):
        if count:
            print(f"  {lo:g},{hi:g},{int(count)}")
    near_low = float(np.mean((ranges <= 10.0) & (intensity < 5.0)))
    print(f"near_low_fraction={near_low:.6f}")
    return _EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snowlidar",
        description="Physics-based snowfall simulation for LiDAR point clouds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_alpha = sub.add_parser("alpha", help="snow extinction table over snowfall rates")
    p_alpha.add_argument("sr_values", type=float, nargs="+", metavar="SR",
                         help="snowfall rates, mm/h")
    p_alpha.add_argument("--reference-range", type=float, default=10.0,
                         help="range for the power-ratio column, m (default 10)")
    p_alpha.add_argument("--output", type=Path, help="write csv here instead of stdout")
    _shared_flags(p_alpha)
    p_alpha.set_defaults(func=_cmd_alpha)

    p_qeff = sub.add_parser("qeff", help="Monte-Carlo median extinction efficiency")
    p_qeff.add_argument("--n-particles", type=int, default=2000)
    p_qeff.add_argument("--d-min", type=float, default=0.05e-3, help="min diameter, m")
    p_qeff.add_argument("--d-max", type=float, default=5e-3, help="max diameter, m")
    p_qeff.add_argument("--distance-min", type=float, default=0.5, help="min distance, m")
    p_qeff.add_argument("--distance-max", type=float, default=50.0, help="max distance, m")
    p_qeff.add_argument("--rd", type=float, default=DEFAULT_DETECTOR_RADIUS,
                        help="detector radius, m")
    _shared_flags(p_qeff)
    p_qeff.set_defaults(func=_cmd_qeff)

    p_aug = sub.add_parser("augment", help="transform a clear scan into synthetic snowfall")
    p_aug.add_argument("input", type=Path)
    p_aug.add_argument("output", type=Path)
    p_aug.add_argument("--template", type=Path,
                       help="clutter template document (default: bundled synthetic fixture)")
    p_aug.add_argument("--input-format", choices=("binary", "csv"), default=None)
    p_aug.add_argument("--output-format", choices=("binary", "csv"), default=None)
    p_aug.add_argument("--label", help="capture label for the metadata sidecar")
    p_aug.add_argument("--date", default="", help="capture date for the metadata sidecar")
    _shared_flags(p_aug)
    p_aug.set_defaults(func=_cmd_augment)

    p_ext = sub.add_parser("extract-template", help="extract a clutter template from a snowy scan")
    p_ext.add_argument("input", type=Path)
    p_ext.add_argument("output", type=Path)
    p_ext.add_argument("--shell-inner", type=float, default=0.5, help="inner shell radius, m")
    p_ext.add_argument("--shell-outer", type=float, default=10.0, help="outer shell radius, m")
    p_ext.add_argument("--cutoff", type=float, default=5.0, help="intensity cutoff (exclusive)")
    p_ext.add_argument("--input-format", choices=("binary", "csv"), default=None)
    _shared_flags(p_ext)
    p_ext.set_defaults(func=_cmd_extract_template)

    p_stats = sub.add_parser("stats", help="point count, range percentiles, intensity histogram")
    p_stats.add_argument("input", type=Path)
    p_stats.add_argument("--bin-width", type=float, default=1.0)
    p_stats.add_argument("--input-format", choices=("binary", "csv"), default=None)
    _shared_flags(p_stats)
    p_stats.set_defaults(func=_cmd_stats)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CloudFormatError, MetadataError, EmptySelectionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_INPUT
    except (QuadratureError, InjectionBudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
