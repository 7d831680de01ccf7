"""Deterministic random-stream derivation.

Every randomized component draws from its own numpy Generator, derived by
hashing a scope tuple (strings and integers identifying the component) into
seed material. Streams for distinct scopes are independent, and a stream
never depends on how many other streams were created before it, so adding a
model family or re-ordering work cannot perturb existing results.
"""

from __future__ import annotations

import hashlib

import numpy as np

_SEP = b"\x1f"


def scope_seed(*scope) -> int:
    """Collapse a scope tuple into a stable 64-bit seed."""
    parts = []
    for item in scope:
        if isinstance(item, (bytes, bytearray)):
            parts.append(bytes(item))
        else:
            parts.append(str(item).encode("utf-8"))
    digest = hashlib.blake2b(_SEP.join(parts), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def stream(*scope) -> np.random.Generator:
    """Independent PCG64 generator for the given scope."""
    return np.random.default_rng(np.random.SeedSequence(scope_seed(*scope)))
