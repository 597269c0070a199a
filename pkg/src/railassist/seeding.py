"""Deterministic, process-independent seed derivation.

Python's builtin hash is salted per process, so named substreams are derived
from SHA-256 instead. Any mix of ints, strings, and dates can key a stream.
"""

from __future__ import annotations

import hashlib

import numpy as np

_SEP = b"\x1f"


def stable_seed(*parts: object) -> int:
    """64-bit seed derived from the parts, stable across runs and machines."""
    payload = _SEP.join(str(p).encode("utf-8") for p in parts)
    digest = hashlib.sha256(payload).digest()
    return int.from_bytes(digest[:8], "little")


def stable_uniform(*parts: object) -> float:
    """Deterministic draw in [0, 1) keyed by the parts."""
    return stable_seed(*parts) / 2.0**64


def rng_for(*parts: object) -> np.random.Generator:
    """Independent numpy generator keyed by the parts."""
    return np.random.default_rng(np.random.SeedSequence(stable_seed(*parts)))
