"""Portable seeded draws.

A stream is identified by ``(label, seed)``. Draw ``k`` hashes the UTF-8 text
``"{label}|{seed}|{k}"`` with SHA-256 and reads the first 8 bytes big-endian
as an unsigned integer. ``below(n)`` rejects values at or above the largest
multiple of ``n`` not exceeding 2**64, so results are exactly uniform and
reproducible in any language.
"""

from __future__ import annotations

import hashlib


class DrawStream:
    def __init__(self, label: str, seed: int):
        self.label = label
        self.seed = seed
        self.counter = 0

    def _next64(self) -> int:
        data = f"{self.label}|{self.seed}|{self.counter}".encode()
        self.counter += 1
        return int.from_bytes(hashlib.sha256(data).digest()[:8], "big")

    def below(self, n: int) -> int:
        if n < 1:
            raise ValueError("n must be positive")
        limit = (1 << 64) - (1 << 64) % n
        while True:
            v = self._next64()
            if v < limit:
                return v % n


def fisher_yates(items, seed: int, label: str = "select") -> list:
    """Shuffle a copy: for i = len-1 down to 1, swap i with below(i + 1)."""
    out = list(items)
    stream = DrawStream(label, seed)
    for i in range(len(out) - 1, 0, -1):
        j = stream.below(i + 1)
        out[i], out[j] = out[j], out[i]
    return out
