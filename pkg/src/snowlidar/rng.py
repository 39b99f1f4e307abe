"""Counter-based random number generation.

Every draw is a pure hash of (seed, domain, stream, index): there is no
generator state, so results do not depend on evaluation order or on how work
is partitioned across threads. The mixer is the SplitMix64 finalizer, which
has full 64-bit avalanche; consecutive counters give independent streams.

Conventions used by callers:
  * ``domain`` is a short ASCII tag naming the operation (e.g. ``"inject"``)
    so different operations sharing one user seed cannot collide;
  * ``stream`` separates draws of different purpose within an operation;
  * ``index`` is the per-particle / per-point counter (array-valued).
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_U64_GOLDEN = np.uint64(_GOLDEN)
_INV_2_53 = float(2.0**-53)


def _mix_scalar(z: int) -> int:
    """SplitMix64 finalizer on a Python int, mod 2**64."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def _mix_array(z: np.ndarray) -> np.ndarray:
    z = np.bitwise_xor(z, z >> np.uint64(30)) * np.uint64(0xBF58476D1CE4E5B9)
    z = np.bitwise_xor(z, z >> np.uint64(27)) * np.uint64(0x94D049BB133111EB)
    return np.bitwise_xor(z, z >> np.uint64(31))


def _state(seed: int, domain: str, stream: int) -> np.uint64:
    """Collapse (seed, domain, stream) into one mixed 64-bit key."""
    z = _mix_scalar((int(seed) & _MASK) + _GOLDEN)
    for byte in domain.encode("ascii"):
        z = _mix_scalar(z + byte * _GOLDEN)
    z = _mix_scalar(z + (int(stream) & _MASK) * _GOLDEN)
    return np.uint64(z)


def _raw(seed: int, domain: str, stream: int, index: np.ndarray) -> np.ndarray:
    idx = np.asarray(index, dtype=np.uint64)
    return _mix_array(_state(seed, domain, stream) + (idx + np.uint64(1)) * _U64_GOLDEN)


def uniforms(seed: int, domain: str, stream: int, index: np.ndarray) -> np.ndarray:
    """Uniform float64 draws in [0, 1), one per entry of ``index``."""
    return np.asarray((_raw(seed, domain, stream, index) >> np.uint64(11)) * _INV_2_53)


def _uniforms_open(seed: int, domain: str, stream: int, index: np.ndarray) -> np.ndarray:
    # (0, 1]: safe as a log() argument
    raw = _raw(seed, domain, stream, index) >> np.uint64(11)
    return np.asarray((raw + np.uint64(1)) * _INV_2_53)


def normals(seed: int, domain: str, stream: int, index: np.ndarray) -> np.ndarray:
    """Standard-normal float64 draws via Box-Muller.

    Internally consumes uniform streams ``2 * stream`` and ``2 * stream + 1``,
    so callers must treat each ``stream`` value here as reserving that pair.
    """
    u1 = _uniforms_open(seed, domain, 2 * stream, index)
    u2 = uniforms(seed, domain, 2 * stream + 1, index)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def integers(seed: int, domain: str, stream: int, index: np.ndarray, upper: int) -> np.ndarray:
    """Uniform integer draws in [0, upper), one per entry of ``index``."""
    if upper <= 0:
        raise ValueError("upper must be positive")
    u = uniforms(seed, domain, stream, index)
    return np.minimum((u * upper).astype(np.int64), upper - 1)
