"""Counter-based uniforms addressed by (seed, stream, replicate, site).

Replicate ``r`` owns a fixed block of the Philox counter space, so any
replicate can be regenerated on its own, in any order, and a batch of
replicates is bitwise identical to generating them one at a time.
"""

from __future__ import annotations

import hashlib

import numpy as np
from numpy.random import Generator, Philox

MASK64 = (1 << 64) - 1


def stream_id(*labels) -> int:
    """Stable 64-bit stream id from arbitrary labels."""
    h = hashlib.sha256(repr(labels).encode()).digest()
    return int.from_bytes(h[:8], "little")


def _padded(size: int) -> int:
    return max(4, -(-size // 4) * 4)


def uniform_block(seed: int, stream: int, first: int, count: int, size: int) -> np.ndarray:
    """Uniforms of shape ``(count, size)`` for replicates first..first+count-1."""
    width = _padded(size)
    counter = first * (width // 4)
    bg = Philox(key=[seed & MASK64, stream & MASK64],
                counter=[counter & MASK64, counter >> 64, 0, 0])
    out = Generator(bg).random(count * width).reshape(count, width)
    return out[:, :size]


def uniform_field(seed: int, rep: int, shape, stream: int = 0) -> np.ndarray:
    n = int(np.prod(shape))
    return uniform_block(seed, stream, rep, 1, n)[0].reshape(shape)
