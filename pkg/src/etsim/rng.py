"""Deterministic random streams for simulation worlds.

Each world owns a 64-bit master seed. Subsystems (delivery latency,
answer guessing, security codes, token minting) draw from named child
streams whose seeds are derived from ``SHA-256(master ":" name)``, so
adding draws to one subsystem never perturbs the draws of another.

Streams are Mersenne Twister generators (``random.Random``), whose
algorithm is fixed across platforms and Python versions; checked-in
fixtures produced from a seed are therefore portable.
"""

from __future__ import annotations

import hashlib
import random

MASK64 = (1 << 64) - 1


def derive_seed(seed: int, label: str) -> int:
    """Derive a child seed from a master seed and a stream label."""
    digest = hashlib.sha256(f"{seed & MASK64}:{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


class RandomStreams:
    """Lazily-created named random streams over one master seed."""

    def __init__(self, seed: int):
        self.seed = seed & MASK64
        self._streams: dict[str, random.Random] = {}

    def stream(self, name: str) -> random.Random:
        rng = self._streams.get(name)
        if rng is None:
            rng = random.Random(derive_seed(self.seed, name))
            self._streams[name] = rng
        return rng
