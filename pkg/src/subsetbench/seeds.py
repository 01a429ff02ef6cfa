"""Deterministic RNG stream splitting.

Every random draw in the pipeline comes from a PCG64 generator seeded by
hashing a tuple of string parts. Task seeds derived from
(master_seed, subset_id, model_id) make results independent of worker
count and scheduling order; the same scheme fans out per-spec and
per-tree streams.

Scheme: SHA-256 over the "/"-joined decimal/string parts, first 8 bytes
interpreted as a big-endian unsigned integer.
"""

import hashlib

import numpy as np


def derive_seed(*parts) -> int:
    """Hash the parts into a stable 64-bit seed."""
    text = "/".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def rng_from(*parts) -> np.random.Generator:
    """PCG64 generator seeded from the hashed parts."""
    return np.random.default_rng(derive_seed(*parts))
