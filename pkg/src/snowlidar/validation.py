"""Input validation helpers shared by the estimator and library entry points."""

from __future__ import annotations

import numpy as np

from .cloud import POINT_DTYPE


def check_points(X, *, allow_empty: bool = False) -> np.ndarray:
    """Validate and convert an array-like of points to (n, 4) float32.

    Accepts anything ``np.asarray`` does; requires two dimensions with four
    columns (x, y, z, intensity), finite values, and non-negative intensity.
    """
    pts = np.asarray(X)
    if pts.ndim != 2 or pts.shape[1] != 4:
        raise ValueError(f"expected an (n, 4) array of x, y, z, intensity; got shape {pts.shape}")
    if pts.shape[0] == 0 and not allow_empty:
        raise ValueError("expected at least one point")
    pts = pts.astype(POINT_DTYPE, copy=False)
    if not np.isfinite(pts).all():
        bad = int(np.argwhere(~np.isfinite(pts).all(axis=1))[0, 0])
        raise ValueError(f"non-finite value in point {bad}")
    if pts.shape[0] and float(pts[:, 3].min()) < 0.0:
        raise ValueError("intensities must be >= 0")
    return pts


def check_positive(name: str, value: float) -> float:
    value = float(value)
    if not (value > 0.0 and np.isfinite(value)):
        raise ValueError(f"{name} must be a positive finite number, got {value}")
    return value


def check_fraction(name: str, value: float) -> float:
    value = float(value)
    if not (0.0 < value <= 1.0):
        raise ValueError(f"{name} must be in (0, 1], got {value}")
    return value
