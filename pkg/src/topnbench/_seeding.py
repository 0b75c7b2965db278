"""Deterministic, purpose-keyed random number streams.

All randomness in the package flows from a single root seed through named
streams, so every stage (splitting, model init, negative sampling, search)
is reproducible on its own and independent of scheduling order.
"""

import hashlib

import numpy as np


def stream_seed(root_seed: int, *keys) -> int:
    """Derive a 64-bit seed from a root seed and a tuple of purpose keys.

    Keys may be strings or integers. Uses SHA-256 so the derivation is
    stable across platforms and Python processes (unlike ``hash()``).
    """
    h = hashlib.sha256()
    h.update(int(root_seed).to_bytes(16, "little", signed=True))
    for key in keys:
        if isinstance(key, (int, np.integer)):
            h.update(b"i" + int(key).to_bytes(16, "little", signed=True))
        elif isinstance(key, str):
            h.update(b"s" + key.encode("utf-8"))
        else:
            raise TypeError(f"stream key must be str or int, got {type(key)!r}")
        h.update(b"\x00")
    return int.from_bytes(h.digest()[:8], "little")


def stream_rng(root_seed: int, *keys) -> np.random.Generator:
    """A fresh ``numpy.random.Generator`` for the given purpose keys."""
    return np.random.default_rng(stream_seed(root_seed, *keys))
