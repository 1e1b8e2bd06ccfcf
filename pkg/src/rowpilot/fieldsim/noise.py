"""Hash noise keyed by world coordinates.

Textures derive from integer lattice coordinates instead of a stateful RNG,
so the same patch of ground renders identically from every camera pose.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_M1 = np.uint64(0x9E3779B97F4A7C15)
_M2 = np.uint64(0xBF58476D1CE4E5B9)
_M3 = np.uint64(0x94D049BB133111EB)


def _to_u64(key) -> np.ndarray:
    if isinstance(key, (int, np.integer)):
        return np.uint64(int(key) & _MASK)
    a = np.asarray(key)
    if a.dtype.kind == "f":
        a = np.floor(a).astype(np.int64)
    return a.astype(np.int64).view(np.uint64)


def hash_u64(*keys) -> np.ndarray:
    """Mix integer keys (scalars or arrays, broadcastable) into uint64 hashes."""
    with np.errstate(over="ignore"):
        h = np.uint64(0x243F6A8885A308D3)
        for key in keys:
            h = (h ^ (_to_u64(key) * _M1)) * _M2
            h = h ^ (h >> np.uint64(31))
        h = (h ^ (h >> np.uint64(30))) * _M2
        h = (h ^ (h >> np.uint64(27))) * _M3
        return h ^ (h >> np.uint64(31))


def hash01(*keys) -> np.ndarray:
    """Uniform floats in [0, 1), elementwise over broadcast keys."""
    return hash_u64(*keys).astype(np.float64) / float(1 << 64)


def lattice_noise(x: np.ndarray, y: np.ndarray, cell: float, salt: int) -> np.ndarray:
    """Blocky value noise in [0, 1) keyed by which `cell`-sized tile a point is in."""
    ix = np.floor(np.asarray(x, dtype=np.float64) / cell).astype(np.int64)
    iy = np.floor(np.asarray(y, dtype=np.float64) / cell).astype(np.int64)
    return hash01(ix, iy, salt)
