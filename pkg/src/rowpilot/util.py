"""Shared plumbing: deterministic RNG derivation, atomic file output, hashing."""

import hashlib
import json
import os
import tempfile

import numpy as np


def rng_for(seed: int, *keys: int) -> np.random.Generator:
    """Child generator derived deterministically from a run seed and index keys."""
    return np.random.default_rng(np.random.SeedSequence((int(seed),) + tuple(int(k) for k in keys)))


def canonical_json(obj) -> str:
    """Stable JSON text (sorted keys, no whitespace churn) for hashing and reports."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def config_hash(cfg_dict) -> str:
    return sha256_hex(canonical_json(cfg_dict).encode())


def atomic_write_bytes(path: str, data: bytes) -> None:
    """Write via temp file + rename so partial outputs never land at `path`."""
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: str, text: str) -> None:
    atomic_write_bytes(path, text.encode())
