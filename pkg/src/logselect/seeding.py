"""Deterministic seed derivation.

All randomness in the package flows from explicit 64-bit seeds; nothing
is ever seeded from the clock. Sub-streams are derived by hashing the
parent seed together with a structural tag, so independent stages stay
independent of execution order.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(*parts: int | str) -> int:
    """Hash a tuple of ints/strings down to a stable 63-bit seed."""
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        if isinstance(part, int):
            h.update(b"i")
            h.update(str(part).encode())
        else:
            h.update(b"s")
            h.update(str(part).encode())
        h.update(b"\x00")
    return int.from_bytes(h.digest(), "big") >> 1


def rng_from(*parts: int | str) -> np.random.Generator:
    return np.random.default_rng(derive_seed(*parts))
