"""Procedurally generated fixture data.

Real snowy captures cannot ship with the repository, so these generators
stand in: a clear-weather street scene, a heavy-snowfall clutter template,
and a snowy scan to exercise template extraction. Everything is synthetic,
clearly labeled as such, and bit-reproducible (counter-keyed randomness, no
global RNG state).

The clutter template mimics the empirically observed signature: returns
filling a hemispherical shell between 0.5 m and 10 m, intensities mostly
below 5 with a mean near 1.5. Its points carry range-equation radiometry
with per-particle reflectivity scatter, thinned by a detection floor of one
raw count, which concentrates them at ranges where the sensor actually
registers snow.
"""

from __future__ import annotations

import numpy as np

from . import rng
from .augmentation import TEMPLATE_CAPTURE_RATE, default_snowfall, snow_extinction, AugmentationConfig
from .cloud import CloudMeta, ClutterTemplate, PointCloud
from .lidar_model import SNOW_REFLECTIVITY, SensorConfig, overlap

FIXTURE_SEED = 20220225
TEMPLATE_SHELL = (0.5, 10.0)

_TEMPLATE_CANDIDATES = 100_000
_TEMPLATE_GAIN = 40.0  # synthetic-capture system constant
_REFLECTIVITY_SIGMA = 0.35  # lognormal per-particle scatter
_DETECTION_FLOOR = 1.0


def _template_alpha() -> float:
    cfg = AugmentationConfig(snowfall=default_snowfall(TEMPLATE_CAPTURE_RATE))
    return snow_extinction(cfg)


def _clutter_points(seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Synthetic detected snow returns: (coords (n,3), intensities (n,))."""
    sensor = SensorConfig()
    inner, outer = TEMPLATE_SHELL
    idx = np.arange(_TEMPLATE_CANDIDATES)
    # uniform over the hemispherical shell volume, z >= 0
    u_r = rng.uniforms(seed, "fixture-clutter", 0, idx)
    radius = (inner**3 + u_r * (outer**3 - inner**3)) ** (1.0 / 3.0)
    cos_elev = rng.uniforms(seed, "fixture-clutter", 1, idx)
    azimuth = 2.0 * np.pi * rng.uniforms(seed, "fixture-clutter", 2, idx)
    sin_elev = np.sqrt(1.0 - cos_elev**2)
    coords = np.column_stack(
        [
            radius * sin_elev * np.cos(azimuth),
            radius * sin_elev * np.sin(azimuth),
            radius * cos_elev,
        ]
    )
    reflect_scatter = np.exp(_REFLECTIVITY_SIGMA * rng.normals(seed, "fixture-clutter", 2, idx))
    alpha = _template_alpha()
    intensity = (
        _TEMPLATE_GAIN
        * SNOW_REFLECTIVITY
        * overlap(radius, sensor)
        * np.exp(-2.0 * alpha * radius)
        / radius**2
        * reflect_scatter
    )
    detected = intensity >= _DETECTION_FLOOR
    return coords[detected], intensity[detected]


def clutter_template(seed: int = FIXTURE_SEED) -> ClutterTemplate:
    """The bundled heavy-snowfall clutter template (synthetic stand-in)."""
    coords, intensity = _clutter_points(seed)
    return ClutterTemplate(
        coords=coords,
        shell=TEMPLATE_SHELL,
        intensity_mean=float(intensity.mean()),
        intensity_upper=float(intensity.max()),
    )


def clear_cloud(n_points: int = 100_000, seed: int = FIXTURE_SEED) -> PointCloud:
    """A clear-weather street scene: ground, structures, a few retroreflectors.

    Ranges span roughly 3-120 m and raw intensities 1-255, with dense object
    clusters placed at 10 m and 22 m so range-ordered degradation is easy to
    probe. Point order is deterministic for a given seed and size.
    """
    n_ground = int(0.70 * n_points)
    n_struct = int(0.28 * n_points)
    n_bright = n_points - n_ground - n_struct

    gi = np.arange(n_ground)
    g_range = 3.0 + 117.0 * rng.uniforms(seed, "fixture-ground", 0, gi) ** 0.7
    g_azim = 2.0 * np.pi * rng.uniforms(seed, "fixture-ground", 1, gi)
    g_z = -1.8 + 0.05 * rng.normals(seed, "fixture-ground", 1, gi)
    ground = np.column_stack(
        [g_range * np.cos(g_azim), g_range * np.sin(g_azim), g_z]
    )
    g_int = np.clip(np.exp(np.log(8.0) + 0.8 * rng.normals(seed, "fixture-ground", 2, gi)), 1.0, 60.0)

    n_clusters = 40
    ci = np.arange(n_clusters)
    c_range = 5.0 + 95.0 * rng.uniforms(seed, "fixture-struct", 0, ci)
    c_azim = 2.0 * np.pi * rng.uniforms(seed, "fixture-struct", 1, ci)
    centers = np.column_stack(
        [c_range * np.cos(c_azim), c_range * np.sin(c_azim), np.full(n_clusters, 0.5)]
    )
    centers[0] = (10.0, 0.0, 0.5)  # near car
    centers[1] = (22.0, 0.0, 0.5)  # far car
    si = np.arange(n_struct)
    assign = rng.integers(seed, "fixture-struct", 2, si, n_clusters)
    spread = np.column_stack(
        [
            1.5 * rng.normals(seed, "fixture-struct", 2, si),
            1.5 * rng.normals(seed, "fixture-struct", 3, si),
            0.8 * rng.normals(seed, "fixture-struct", 4, si),
        ]
    )
    struct = centers[assign] + spread
    # keep structure points clear of the sensor
    s_radius = np.linalg.norm(struct, axis=1)
    too_close = s_radius < 2.0
    if too_close.any():
        struct[too_close] *= (2.0 / s_radius[too_close])[:, None]
    s_int = np.clip(np.exp(np.log(20.0) + 0.9 * rng.normals(seed, "fixture-struct", 5, si)), 1.0, 255.0)

    bi = np.arange(n_bright)
    b_range = 5.0 + 55.0 * rng.uniforms(seed, "fixture-bright", 0, bi)
    b_azim = 2.0 * np.pi * rng.uniforms(seed, "fixture-bright", 1, bi)
    b_z = 0.3 + 1.2 * rng.uniforms(seed, "fixture-bright", 2, bi)
    bright = np.column_stack([b_range * np.cos(b_azim), b_range * np.sin(b_azim), b_z])
    b_int = 100.0 + 155.0 * rng.uniforms(seed, "fixture-bright", 3, bi)

    points = np.empty((n_points, 4), dtype=np.float32)
    points[:n_ground, :3] = ground
    points[:n_ground, 3] = g_int
    points[n_ground : n_ground + n_struct, :3] = struct
    points[n_ground : n_ground + n_struct, 3] = s_int
    points[n_ground + n_struct :, :3] = bright
    points[n_ground + n_struct :, 3] = b_int
    meta = CloudMeta(source="synthetic", sensor_id="fixture-vlp32", label="clear-fixture")
    return PointCloud(points=points, meta=meta)


def snowy_cloud(seed: int = FIXTURE_SEED) -> PointCloud:
    """A synthetic heavy-snowfall scan: near-sensor clutter plus a far scene.

    Background returns all sit beyond the 10 m clutter shell, mirroring how
    heavy snowfall blankets the near field, so template extraction over the
    shell recovers exactly the clutter population.
    """
    coords, intensity = _clutter_points(seed)
    n_bg = 20_000
    bi = np.arange(n_bg)
    bg_range = 12.0 + 88.0 * rng.uniforms(seed, "fixture-snowbg", 0, bi) ** 0.7
    bg_azim = 2.0 * np.pi * rng.uniforms(seed, "fixture-snowbg", 1, bi)
    bg_z = -1.8 + 2.4 * rng.uniforms(seed, "fixture-snowbg", 2, bi)
    bg = np.column_stack([bg_range * np.cos(bg_azim), bg_range * np.sin(bg_azim), bg_z])
    bg_int = np.clip(np.exp(np.log(6.0) + 0.8 * rng.normals(seed, "fixture-snowbg", 2, bi)), 1.0, 80.0)

    n = len(intensity) + n_bg
    points = np.empty((n, 4), dtype=np.float32)
    points[: len(intensity), :3] = coords
    points[: len(intensity), 3] = intensity
    points[len(intensity) :, :3] = bg
    points[len(intensity) :, 3] = bg_int
    meta = CloudMeta(source="synthetic", sensor_id="fixture-vlp32", label="snowy-fixture")
    return PointCloud(points=points, meta=meta)
