"""Point cloud and clutter template containers.

A point cloud is an ordered (n, 4) float32 array of (x, y, z, intensity)
in the sensor frame, with the LiDAR at the origin. Arrays held by these
containers are treated as immutable; transforms return new containers.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

POINT_DTYPE = np.float32
POINT_FIELDS = ("x", "y", "z", "intensity")


@dataclass(frozen=True)
class CloudMeta:
    """Provenance of a point cloud: where it came from, which sensor, what scene."""

    source: str = ""
    sensor_id: str = ""
    label: str = ""


@dataclass(frozen=True)
class PointCloud:
    """Ordered sequence of (x, y, z, intensity) points with provenance.

    Coordinates are meters in the sensor frame; intensity is a raw,
    dimensionless sensor count >= 0.
    """

    points: np.ndarray
    meta: CloudMeta = field(default_factory=CloudMeta)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=POINT_DTYPE)
        if pts.ndim != 2 or pts.shape[1] != 4:
            raise ValueError(f"points must have shape (n, 4), got {pts.shape}")
        if not np.isfinite(pts).all():
            bad = int(np.argwhere(~np.isfinite(pts).all(axis=1))[0, 0])
            raise ValueError(f"non-finite value in point {bad}")
        if pts.shape[0] and float(pts[:, 3].min()) < 0.0:
            bad = int(np.argmin(pts[:, 3]))
            raise ValueError(f"negative intensity in point {bad}")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def xyz(self) -> np.ndarray:
        return self.points[:, :3]

    @property
    def intensity(self) -> np.ndarray:
        return self.points[:, 3]

    def ranges(self) -> np.ndarray:
        """Euclidean range of every point from the sensor origin, float64."""
        return np.linalg.norm(self.points[:, :3].astype(np.float64), axis=1)

    def with_points(self, points: np.ndarray) -> "PointCloud":
        return replace(self, points=points)


@dataclass(frozen=True)
class ClutterTemplate:
    """Empirical near-sensor snow-return geometry used for clutter injection.

    ``coords`` are (m, 3) float64 positions inside the shell; ``shell`` is the
    (inner, outer) radius bounds in meters; intensity statistics summarize the
    raw returns the template was extracted from.
    """

    coords: np.ndarray
    shell: tuple[float, float]
    intensity_mean: float
    intensity_upper: float

    def __post_init__(self):
        coords = np.ascontiguousarray(np.asarray(self.coords, dtype=np.float64))
        if coords.ndim != 2 or coords.shape[1] != 3:
            raise ValueError(f"coords must have shape (m, 3), got {coords.shape}")
        if coords.shape[0] == 0:
            raise ValueError("template must contain at least one coordinate")
        inner, outer = (float(self.shell[0]), float(self.shell[1]))
        if not (0.0 <= inner < outer):
            raise ValueError(f"invalid shell bounds ({inner}, {outer})")
        norms = np.linalg.norm(coords, axis=1)
        # allow half-ulp slack so round-tripped coordinates re-validate
        tol = 1e-9 * outer
        if norms.min() < inner - tol or norms.max() > outer + tol:
            raise ValueError("template coordinate outside the shell bounds")
        mean = float(self.intensity_mean)
        upper = float(self.intensity_upper)
        if not (0.0 < mean <= upper):
            raise ValueError(f"intensity mean {mean} not in (0, upper={upper}]")
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "shell", (inner, outer))
        object.__setattr__(self, "intensity_mean", mean)
        object.__setattr__(self, "intensity_upper", upper)

    def __len__(self) -> int:
        return self.coords.shape[0]
