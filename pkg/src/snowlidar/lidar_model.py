"""LiDAR radiometric chain: overlap, transmission, received power, calibration.

The medium is treated as homogeneous (scalar extinction), so the path
integral in the range equation reduces to alpha * R. Intensities are raw,
dimensionless sensor counts; no absolute radiometric units are claimed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .scattering import DEFAULT_DETECTOR_RADIUS

# Rayleigh extinction of clear air near 900 nm, per meter
CLEAR_AIR_EXTINCTION = 1.52e-6


@dataclass(frozen=True)
class SensorConfig:
    """Radiometric and geometric parameters of the LiDAR.

    ``system_constant`` is the lumped gain mapping scene radiometry to raw
    intensity counts; leave it None to have pipeline entry points calibrate it
    from a clutter template before use.
    """

    system_constant: Optional[float] = None
    wavelength: float = 905e-9
    detector_radius: float = DEFAULT_DETECTOR_RADIUS
    min_range: float = 0.5
    full_overlap_range: float = 4.0
    max_range: float = 200.0
    clear_air_extinction: float = CLEAR_AIR_EXTINCTION

    def __post_init__(self):
        if not (0.0 < self.min_range < self.full_overlap_range < self.max_range):
            raise ValueError(
                "need 0 < min_range < full_overlap_range < max_range, got "
                f"({self.min_range}, {self.full_overlap_range}, {self.max_range})"
            )
        if self.system_constant is not None and not (self.system_constant > 0.0):
            raise ValueError(f"system constant must be > 0, got {self.system_constant}")
        if not (self.wavelength > 0.0 and self.detector_radius > 0.0):
            raise ValueError("wavelength and detector_radius must be > 0")
        if self.clear_air_extinction < 0.0:
            raise ValueError("clear-air extinction must be >= 0")

    def with_system_constant(self, value: float) -> "SensorConfig":
        return replace(self, system_constant=value)


@dataclass(frozen=True)
class Target:
    """A diffuse target at a given range with reflectivity in [0, 1]."""

    range_m: float
    reflectivity: float

    def __post_init__(self):
        if not (self.range_m > 0.0):
            raise ValueError(f"target range must be > 0, got {self.range_m}")
        if not (0.0 <= self.reflectivity <= 1.0):
            raise ValueError(f"reflectivity must be in [0, 1], got {self.reflectivity}")

# snow-grain reflectivity averaged over grain sizes at NIR wavelengths
SNOW_REFLECTIVITY = 0.4


def overlap(r, config: SensorConfig):
    """Transmitter/receiver overlap fraction at range r.

    Zero inside the blind zone (r <= min_range), a linear ramp up to the
    full-overlap range, and one beyond it. Accepts scalars or arrays.
    """
    r_arr = np.asarray(r, dtype=np.float64)
    ramp = (r_arr - config.min_range) / (config.full_overlap_range - config.min_range)
    out = np.clip(ramp, 0.0, 1.0)
    return float(out) if np.isscalar(r) else out


def transmission(r, alpha: float):
    """One-way transmission exp(-alpha * r) through a homogeneous medium."""
    if alpha < 0.0:
        raise ValueError(f"extinction must be >= 0, got {alpha}")
    r_arr = np.asarray(r, dtype=np.float64)
    if r_arr.size and float(r_arr.min()) < 0.0:
        raise ValueError("range must be >= 0")
    out = np.exp(-alpha * r_arr)
    return float(out) if np.isscalar(r) else out


def received_power(target: Target, alpha: float, config: SensorConfig) -> float:
    """Backscattered intensity from a target: C * beta0 * O(R) * exp(-2 a R) / R^2."""
    if config.system_constant is None:
        raise ValueError("sensor system_constant is not calibrated")
    r = target.range_m
    return (
        config.system_constant
        * target.reflectivity
        * overlap(r, config)
        * math.exp(-2.0 * alpha * r)
        / (r * r)
    )


def power_ratio(r, alpha_snow: float, alpha_clear: float):
    """Snow/clear received-power ratio exp(-2 (alpha_snow - alpha_clear) r).

    The system constant, reflectivity, overlap, and 1/R^2 cancel between the
    two media, so the ratio depends only on the extinction difference.
    """
    if alpha_snow < 0.0 or alpha_clear < 0.0:
        raise ValueError("extinctions must be >= 0")
    r_arr = np.asarray(r, dtype=np.float64)
    if r_arr.size and float(r_arr.min()) < 0.0:
        raise ValueError("range must be >= 0")
    out = np.exp(-2.0 * (alpha_snow - alpha_clear) * r_arr)
    return float(out) if np.isscalar(r) else out


def calibrate_system_constant(
    sample: Sequence[tuple[float, float]],
    reflectivity: float,
    alpha: float,
    config: SensorConfig,
) -> float:
    """Estimate the system constant from observed (range, intensity) pairs.

    Inverts the range equation per point and averages:
    C_i = I_i * R_i^2 / (beta * O(R_i) * exp(-2 alpha R_i)). Per-point
    inversion stays well-defined for clutter spread across the overlap ramp.

    Raises on an empty sample and on any range inside the blind zone, where
    the overlap (and hence the radiometric information) is zero.
    """
    pairs = np.asarray(sample, dtype=np.float64)
    if pairs.size == 0:
        raise ValueError("calibration sample is empty")
    pairs = pairs.reshape(-1, 2)
    if not (0.0 < reflectivity <= 1.0):
        raise ValueError(f"reflectivity must be in (0, 1], got {reflectivity}")
    ranges, intensities = pairs[:, 0], pairs[:, 1]
    ov = overlap(ranges, config)
    if float(ov.min()) <= 0.0:
        bad = float(ranges[np.argmin(ov)])
        raise ValueError(f"sample range {bad} m has zero overlap (inside blind zone)")
    estimates = intensities * ranges**2 / (reflectivity * ov * np.exp(-2.0 * alpha * ranges))
    return float(estimates.mean())
