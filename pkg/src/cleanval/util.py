"""Small shared helpers: deterministic rounding and seed derivation."""

from __future__ import annotations

import hashlib
import math


def round_half_up(x: float) -> int:
    """Round a non-negative float to the nearest integer, halves upward.

    Used for every count derived from a rate (flip budgets, split sizes) so
    results do not depend on the platform's banker's rounding.
    """
    if x < 0:
        raise ValueError(f"round_half_up expects a non-negative value, got {x}")
    return int(math.floor(x + 0.5))


def derive_seed(master_seed: int, stage: str) -> int:
    """Derive a per-stage seed from a master seed and a stage name.

    Stable across platforms and Python versions (BLAKE2 of the string
    ``"{master_seed}/{stage}"``), so every randomized stage gets an
    independent, reproducible stream.
    """
    digest = hashlib.blake2b(f"{master_seed}/{stage}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big") % (2**63)
