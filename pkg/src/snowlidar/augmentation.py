"""Clear-to-snow point cloud transformation.

Two effects turn a clear-weather scan into a synthetic snowfall scan:
per-point intensity attenuation via the snow/clear power ratio with a
detector-floor drop-out, and injection of near-sensor clutter resampled from
an empirical template. Both are deterministic in the configured seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import rng
from .cloud import ClutterTemplate, PointCloud
from .lidar_model import SNOW_REFLECTIVITY, SensorConfig, calibrate_system_constant, overlap
from .quadrature import QuadratureConfig
from .scattering import (
    ConstantEfficiency,
    EfficiencyModel,
    SnowfallParams,
    extinction_coefficient,
    total_number_density,
)

# Default number-density scale for augmentation runs. The published PSD
# parameters taken at face value give extinction of several 1/m -- an optical
# wall. This scale anchors heavy snowfall (35 mm/h, the template capture
# rate) at ~200 m meteorological visibility (alpha ~ 0.015/m); raw faithful
# values remain available through unit_scale=1.
CALIBRATED_UNIT_SCALE = 3.85e-3

# Snowfall rate during the capture the bundled clutter template models, mm/h.
TEMPLATE_CAPTURE_RATE = 35.0

# Diameter bounds of the particle-count integral (wider than the extinction
# bounds: counts include sizes that contribute little optically).
COUNT_D_MIN = 0.001e-3
COUNT_D_MAX = 15.0e-3


class InjectionBudgetError(RuntimeError):
    """Jitter rejection-resampling exceeded the retry budget."""


class EmptySelectionError(ValueError):
    """Template extraction matched no points."""


def default_snowfall(snowfall_rate: float, unit_scale: float = CALIBRATED_UNIT_SCALE) -> SnowfallParams:
    """Snowfall params at the augmentation-calibrated density scale."""
    return SnowfallParams(snowfall_rate=snowfall_rate, unit_scale=unit_scale)


@dataclass(frozen=True)
class AugmentationConfig:
    """Everything an augmentation run needs besides the cloud and template.

    ``detection_fraction`` and the sensor's ``system_constant`` may be left
    None; :func:`augment` then calibrates them against the template at
    ``template_rate``. ``drop_threshold`` is the raw-intensity detector floor
    below which an attenuated return is lost.
    """

    snowfall: SnowfallParams
    sensor: SensorConfig = SensorConfig()
    efficiency: EfficiencyModel = ConstantEfficiency()
    drop_threshold: float = 1.0
    jitter_sigma: float = 0.15
    detection_fraction: Optional[float] = None
    seed: int = 0
    template_rate: float = TEMPLATE_CAPTURE_RATE
    count_d_min: float = COUNT_D_MIN
    count_d_max: float = COUNT_D_MAX
    retry_budget: int = 256
    quad: QuadratureConfig = QuadratureConfig()

    def __post_init__(self):
        if self.drop_threshold < 0.0:
            raise ValueError(f"drop threshold must be >= 0, got {self.drop_threshold}")
        if self.jitter_sigma < 0.0:
            raise ValueError(f"jitter sigma must be >= 0, got {self.jitter_sigma}")
        if self.detection_fraction is not None and not (0.0 < self.detection_fraction <= 1.0):
            raise ValueError(
                f"detection fraction must be in (0, 1], got {self.detection_fraction}"
            )
        if not (0.0 <= self.count_d_min < self.count_d_max):
            raise ValueError("invalid count integration bounds")
        if not (self.template_rate > 0.0):
            raise ValueError(f"template rate must be > 0, got {self.template_rate}")
        if self.retry_budget < 1:
            raise ValueError("retry budget must be >= 1")

    def count_params(self) -> SnowfallParams:
        return replace(self.snowfall, d_min=self.count_d_min, d_max=self.count_d_max)


@dataclass(frozen=True)
class AugmentationReport:
    """Per-run accounting: what was computed, dropped, kept, and injected."""

    snow_extinction: float
    clear_extinction: float
    n_kept: int
    n_dropped: int
    n_injected: int
    system_constant: float
    seed: int
    config: dict


def snow_extinction(config: AugmentationConfig) -> float:
    """Total extinction of the snowy medium: clear air plus snow particles."""
    return config.sensor.clear_air_extinction + extinction_coefficient(
        config.snowfall, config.efficiency, config.quad
    )


def attenuate(
    cloud: PointCloud,
    alpha_snow: float,
    alpha_clear: float,
    drop_threshold: float,
) -> tuple[PointCloud, int]:
    """Rescale intensities by the snow/clear power ratio; drop sub-floor returns.

    Every intensity is multiplied by exp(-2 (alpha_snow - alpha_clear) R);
    points whose new intensity falls below ``drop_threshold`` are removed.
    Surviving points keep their coordinates and relative order. Returns the
    attenuated cloud and the drop count.
    """
    if not (alpha_snow >= alpha_clear >= 0.0):
        raise ValueError(
            f"need alpha_snow >= alpha_clear >= 0, got ({alpha_snow}, {alpha_clear})"
        )
    if len(cloud) == 0:
        return cloud.with_points(cloud.points), 0
    ranges = cloud.ranges()
    if float(ranges.min()) == 0.0:
        bad = int(np.argmin(ranges))
        raise ValueError(f"point {bad} sits at the origin; its range is undefined")
    ratio = np.exp(-2.0 * (alpha_snow - alpha_clear) * ranges)
    new_intensity = (cloud.intensity.astype(np.float64) * ratio).astype(np.float32)
    keep = new_intensity >= np.float32(drop_threshold)
    out = cloud.points[keep].copy()
    out[:, 3] = new_intensity[keep]
    return cloud.with_points(out), int((~keep).sum())


def shell_volume(shell: tuple[float, float]) -> float:
    """Volume of the hemispherical shell above the sensor plane, m3."""
    inner, outer = float(shell[0]), float(shell[1])
    if not (0.0 <= inner <= outer):
        raise ValueError(f"invalid shell bounds ({inner}, {outer})")
    return 2.0 * math.pi / 3.0 * (outer**3 - inner**3)


def expected_clutter_count(
    snowfall: SnowfallParams,
    shell: tuple[float, float],
    detection_fraction: float,
) -> int:
    """Detected-particle count expected in the shell at this snowfall rate."""
    if not (0.0 < detection_fraction <= 1.0):
        raise ValueError(f"detection fraction must be in (0, 1], got {detection_fraction}")
    return int(round(detection_fraction * total_number_density(snowfall) * shell_volume(shell)))


def calibrate_detection_fraction(template: ClutterTemplate, snowfall: SnowfallParams) -> float:
    """Fraction of physically expected particles the sensor actually registered.

    Divides the template's observed point count by the physical count
    predicted for its shell at the template's capture rate, clamped to (0, 1].
    Pass snowfall params evaluated at that capture rate.
    """
    volume = shell_volume(template.shell)
    if volume <= 0.0:
        raise ValueError("degenerate shell encloses no volume")
    physical = total_number_density(snowfall) * volume
    return min(len(template) / physical, 1.0)


def _clutter_intensity(radii: np.ndarray, alpha: float, sensor: SensorConfig) -> np.ndarray:
    # range equation with the averaged snow-grain reflectivity
    return (
        sensor.system_constant
        * SNOW_REFLECTIVITY
        * overlap(radii, sensor)
        * np.exp(-2.0 * alpha * radii)
        / (radii * radii)
    )


def inject_clutter(
    cloud: PointCloud,
    template: ClutterTemplate,
    count: int,
    config: AugmentationConfig,
) -> tuple[PointCloud, int]:
    """Append ``count`` synthetic snow returns resampled from the template.

    Each injected point picks a template coordinate uniformly with
    replacement, perturbs every axis with zero-mean Gaussian noise of
    ``jitter_sigma``, and redraws the noise until the point falls back inside
    the shell. Its intensity follows the range equation with the averaged
    snow-grain reflectivity at the current snow extinction. All randomness is
    counter-keyed on (seed, injection index), so the output is independent of
    evaluation order.
    """
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    if config.sensor.system_constant is None:
        raise ValueError("sensor system_constant is not calibrated")
    if count == 0:
        return cloud.with_points(cloud.points), 0

    inner, outer = template.shell
    seed = config.seed
    idx = np.arange(count)
    pick = rng.integers(seed, "inject", 0, idx, len(template))
    base = template.coords[pick]

    position = np.empty((count, 3), dtype=np.float64)
    pending = np.ones(count, dtype=bool)
    for attempt in range(config.retry_budget):
        if not pending.any():
            break
        rows = idx[pending]
        noise = np.stack(
            [rng.normals(seed, "inject", 1 + 3 * attempt + axis, rows) for axis in range(3)],
            axis=1,
        )
        candidate = base[pending] + config.jitter_sigma * noise
        radius = np.linalg.norm(candidate, axis=1)
        ok = (radius >= inner) & (radius <= outer)
        accepted = rows[ok]
        position[accepted] = candidate[ok]
        pending[accepted] = False
    if pending.any():
        raise InjectionBudgetError(
            f"{int(pending.sum())} of {count} injected points still outside the shell "
            f"after {config.retry_budget} retries (jitter_sigma={config.jitter_sigma})"
        )

    radii = np.linalg.norm(position, axis=1)
    alpha = snow_extinction(config)
    intensity = _clutter_intensity(radii, alpha, config.sensor)
    injected = np.empty((count, 4), dtype=np.float32)
    injected[:, :3] = position.astype(np.float32)
    injected[:, 3] = intensity.astype(np.float32)
    return cloud.with_points(np.vstack([cloud.points, injected])), count


def resolve_config(config: AugmentationConfig, template: ClutterTemplate) -> AugmentationConfig:
    """Fill the calibratable fields from the template.

    The sensor system constant comes from inverting the range equation over
    the template coordinates at its mean intensity; the detection fraction
    from the template's observed density. Both evaluated at the template's
    capture rate. No-ops for fields already set.
    """
    resolved = config
    rate_params = replace(config.snowfall, snowfall_rate=config.template_rate)
    if config.sensor.system_constant is None:
        alpha = config.sensor.clear_air_extinction + extinction_coefficient(
            rate_params, config.efficiency, config.quad
        )
        radii = np.linalg.norm(template.coords, axis=1)
        sample = np.column_stack([radii, np.full(len(template), template.intensity_mean)])
        constant = calibrate_system_constant(sample, SNOW_REFLECTIVITY, alpha, config.sensor)
        resolved = replace(resolved, sensor=config.sensor.with_system_constant(constant))
    if config.detection_fraction is None:
        count_params = replace(
            rate_params, d_min=config.count_d_min, d_max=config.count_d_max
        )
        fraction = calibrate_detection_fraction(template, count_params)
        resolved = replace(resolved, detection_fraction=fraction)
    return resolved


def config_snapshot(config: AugmentationConfig, alpha_snow: float) -> dict:
    """Plain-dict snapshot of a resolved config, for run metadata."""
    eff = config.efficiency
    return {
        "snowfall": {
            "snowfall_rate": config.snowfall.snowfall_rate,
            "n0": config.snowfall.n0,
            "slope_coeff": config.snowfall.slope_coeff,
            "slope_exponent": config.snowfall.slope_exponent,
            "d_min": config.snowfall.d_min,
            "d_max": config.snowfall.d_max,
            "unit_scale": config.snowfall.unit_scale,
        },
        "sensor": {
            "system_constant": config.sensor.system_constant,
            "wavelength": config.sensor.wavelength,
            "detector_radius": config.sensor.detector_radius,
            "min_range": config.sensor.min_range,
            "full_overlap_range": config.sensor.full_overlap_range,
            "max_range": config.sensor.max_range,
            "clear_air_extinction": config.sensor.clear_air_extinction,
        },
        "efficiency": {"model": type(eff).__name__, **
                       {k: (list(v) if isinstance(v, tuple) else v)
                        for k, v in vars(eff).items()}},
        "snow_extinction": alpha_snow,
        "drop_threshold": config.drop_threshold,
        "jitter_sigma": config.jitter_sigma,
        "detection_fraction": config.detection_fraction,
        "seed": config.seed,
        "template_rate": config.template_rate,
        "count_d_min": config.count_d_min,
        "count_d_max": config.count_d_max,
        "retry_budget": config.retry_budget,
    }


def augment(
    cloud: PointCloud,
    config: AugmentationConfig,
    template: ClutterTemplate,
) -> tuple[PointCloud, AugmentationReport]:
    """Full clear-to-snow pipeline: attenuate, then inject clutter.

    Computes the snow extinction for the configured rate, rescales and drops
    intensities, sizes the clutter population from the template-calibrated
    detection fraction, and injects it. A pure function of
    (cloud, config, template): fixed seeds give byte-identical outputs.
    """
    if len(cloud) == 0:
        raise ValueError("cannot augment an empty cloud")
    resolved = resolve_config(config, template)
    alpha_clear = resolved.sensor.clear_air_extinction
    alpha_snow = snow_extinction(resolved)
    attenuated, n_dropped = attenuate(cloud, alpha_snow, alpha_clear, resolved.drop_threshold)
    n_kept = len(attenuated)
    count = expected_clutter_count(
        resolved.count_params(), template.shell, resolved.detection_fraction
    )
    combined, n_injected = inject_clutter(attenuated, template, count, resolved)
    report = AugmentationReport(
        snow_extinction=alpha_snow,
        clear_extinction=alpha_clear,
        n_kept=n_kept,
        n_dropped=n_dropped,
        n_injected=n_injected,
        system_constant=resolved.sensor.system_constant,
        seed=resolved.seed,
        config=config_snapshot(resolved, alpha_snow),
    )
    return combined, report


def extract_template(
    cloud: PointCloud,
    shell: tuple[float, float] = (0.5, 10.0),
    intensity_cutoff: float = 5.0,
) -> ClutterTemplate:
    """Pull a clutter template out of a recorded snowy scan.

    Selects the near-sensor low-intensity signature: points with range inside
    the shell and intensity strictly below the cutoff. Intensity statistics
    (mean, max) are computed from the selection.
    """
    if len(cloud) == 0:
        raise ValueError("cannot extract a template from an empty cloud")
    inner, outer = float(shell[0]), float(shell[1])
    ranges = cloud.ranges()
    selected = (ranges >= inner) & (ranges <= outer) & (cloud.intensity < intensity_cutoff)
    n = int(selected.sum())
    if n == 0:
        raise EmptySelectionError(
            f"no points with range in [{inner}, {outer}] m and intensity < {intensity_cutoff}"
        )
    intensities = cloud.intensity[selected].astype(np.float64)
    return ClutterTemplate(
        coords=cloud.xyz[selected].astype(np.float64),
        shell=(inner, outer),
        intensity_mean=float(intensities.mean()),
        intensity_upper=float(intensities.max()),
    )
