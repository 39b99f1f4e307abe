"""Bit-exact point cloud, template, and run-metadata I/O.

Cloud formats:
  * ``binary`` -- densely packed records of four little-endian IEEE-754
    float32 values (x, y, z, intensity), 16 bytes per point, no header.
    This is the ubiquitous automotive dump convention, so real captures
    load directly.
  * ``csv`` -- a fixed ``x,y,z,intensity`` header line followed by one
    record per line, rendered with the shortest decimal string that
    round-trips to the exact float32 value.

Templates and run metadata are JSON documents with an explicit
``schema_version`` (currently 1); unknown fields survive read-modify-write.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from .cloud import ClutterTemplate, CloudMeta, PointCloud

RECORD_BYTES = 16
CSV_HEADER = "x,y,z,intensity"
FORMATS = ("binary", "csv")

PathLike = Union[str, Path]


class CloudFormatError(ValueError):
    """A cloud file does not conform to its declared format."""


class MetadataError(ValueError):
    """A metadata or template document is malformed or unsupported."""


def detect_format(path: PathLike) -> str:
    return "csv" if Path(path).suffix.lower() == ".csv" else "binary"


def _check_format(fmt: str) -> str:
    if fmt == "auto":
        raise ValueError("pass a concrete format or use detect_format(path)")
    if fmt not in FORMATS:
        raise ValueError(f"unknown cloud format {fmt!r}; expected one of {FORMATS}")
    return fmt


def read_cloud(path: PathLike, fmt: str | None = None) -> PointCloud:
    """Read a point cloud, preserving file order (and exact bits for binary).

    ``fmt`` defaults to extension sniffing: ``.csv`` reads as csv, anything
    else as packed binary.
    """
    path = Path(path)
    fmt = _check_format(fmt if fmt is not None else detect_format(path))
    meta = CloudMeta(source=str(path), label=path.stem)
    if fmt == "binary":
        data = path.read_bytes()
        if len(data) % RECORD_BYTES:
            raise CloudFormatError(
                f"{path}: {len(data)} bytes is not a multiple of the "
                f"{RECORD_BYTES}-byte record size (trailing partial record)"
            )
        points = np.frombuffer(data, dtype="<f4").reshape(-1, 4).copy()
    else:
        points = _read_csv(path)
    finite = np.isfinite(points).all(axis=1) if points.size else np.ones(0, bool)
    if not finite.all():
        raise CloudFormatError(f"{path}: non-finite value at point index {int(np.argmin(finite))}")
    return PointCloud(points=points, meta=meta)


def _read_csv(path: Path) -> np.ndarray:
    with path.open("r", encoding="ascii") as handle:
        header = handle.readline().rstrip("\n")
        if header != CSV_HEADER:
            raise CloudFormatError(f"{path}: line 1: expected header {CSV_HEADER!r}, got {header!r}")
        rows = []
        for lineno, line in enumerate(handle, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split(",")
            if len(fields) != 4:
                raise CloudFormatError(f"{path}: line {lineno}: expected 4 fields, got {len(fields)}")
            try:
                rows.append([np.float32(v) for v in fields])
            except ValueError as exc:
                raise CloudFormatError(f"{path}: line {lineno}: {exc}") from None
    if not rows:
        return np.zeros((0, 4), dtype=np.float32)
    return np.array(rows, dtype=np.float32)


def write_cloud(cloud: PointCloud, path: PathLike, fmt: str | None = None) -> int:
    """Write a cloud; identical clouds produce identical bytes. Returns the record count."""
    path = Path(path)
    fmt = _check_format(fmt if fmt is not None else detect_format(path))
    points = np.ascontiguousarray(cloud.points, dtype="<f4")
    try:
        if fmt == "binary":
            path.write_bytes(points.tobytes())
        else:
            with path.open("w", encoding="ascii", newline="\n") as handle:
                handle.write(CSV_HEADER + "\n")
                for row in points:
                    handle.write(",".join(_shortest(v) for v in row) + "\n")
    except OSError as exc:
        raise OSError(f"failed writing cloud to {path}: {exc}") from exc
    return points.shape[0]


def _shortest(value: np.float32) -> str:
    # shortest decimal that parses back to the exact float32
    return np.format_float_positional(value, unique=True, trim="0")


@dataclass(frozen=True)
class RunMetadata:
    """Sidecar record making an output cloud reproducible from disk alone."""

    capture_label: str
    capture_date: str
    sensor: dict
    snowfall: dict
    seed: int
    report: dict
    schema_version: int = 1
    extra: dict = field(default_factory=dict)


_METADATA_REQUIRED = ("capture_label", "capture_date", "sensor", "snowfall", "seed", "report")


def write_metadata(meta: RunMetadata, path: PathLike) -> None:
    """Write a metadata document; deterministic bytes for equal records."""
    doc = dict(meta.extra)
    doc["schema_version"] = meta.schema_version
    for name in _METADATA_REQUIRED:
        doc[name] = getattr(meta, name)
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="ascii")


def read_metadata(path: PathLike) -> RunMetadata:
    """Read a metadata document, preserving unknown fields in ``extra``."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="ascii"))
    except json.JSONDecodeError as exc:
        raise MetadataError(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise MetadataError(f"{path}: expected a JSON object")
    version = doc.pop("schema_version", None)
    if version != 1:
        raise MetadataError(f"{path}: unsupported schema version {version!r} (supported: 1)")
    missing = [name for name in _METADATA_REQUIRED if name not in doc]
    if missing:
        raise MetadataError(f"{path}: missing required field {missing[0]!r}")
    known = {name: doc.pop(name) for name in _METADATA_REQUIRED}
    return RunMetadata(schema_version=version, extra=doc, **known)


def write_template(template: ClutterTemplate, path: PathLike) -> None:
    """Write a clutter template document (JSON schema version 1)."""
    doc = {
        "schema_version": 1,
        "shell_inner_m": template.shell[0],
        "shell_outer_m": template.shell[1],
        "intensity_mean": template.intensity_mean,
        "intensity_upper": template.intensity_upper,
        "point_count": len(template),
        "coords_m": template.coords.tolist(),
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="ascii")


def read_template(path: PathLike) -> ClutterTemplate:
    """Read a clutter template document written by :func:`write_template`."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="ascii"))
    except json.JSONDecodeError as exc:
        raise MetadataError(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise MetadataError(f"{path}: expected a JSON object")
    if doc.get("schema_version") != 1:
        raise MetadataError(
            f"{path}: unsupported schema version {doc.get('schema_version')!r} (supported: 1)"
        )
    for name in ("shell_inner_m", "shell_outer_m", "intensity_mean", "intensity_upper", "coords_m"):
        if name not in doc:
            raise MetadataError(f"{path}: missing required field {name!r}")
    coords = np.asarray(doc["coords_m"], dtype=np.float64)
    if "point_count" in doc and doc["point_count"] != len(coords):
        raise MetadataError(
            f"{path}: point_count {doc['point_count']} does not match {len(coords)} coordinates"
        )
    try:
        return ClutterTemplate(
            coords=coords,
            shell=(doc["shell_inner_m"], doc["shell_outer_m"]),
            intensity_mean=doc["intensity_mean"],
            intensity_upper=doc["intensity_upper"],
        )
    except ValueError as exc:
        raise MetadataError(f"{path}: {exc}") from None
