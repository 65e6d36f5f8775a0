"""Seeded random streams.

A stream is identified by ``(seed, stream_id)``; child streams for parallel
work are derived with :meth:`RngStream.child`, so a batch of replicates gives
the same draws whether it runs serially or in a pool.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_id: int = 0
    path: tuple[int, ...] = field(default=(), repr=False)

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool):
                raise TypeError(f"{name} must be an integer, got {v!r}")

    def _seed_sequence(self) -> np.random.SeedSequence:
        key = (int(self.stream_id) & _MASK64,) + tuple(int(p) & _MASK64 for p in self.path)
        return np.random.SeedSequence(int(self.seed) & _MASK64, spawn_key=key)

    def generator(self) -> np.random.Generator:
        """A fresh generator positioned at the start of this stream."""
        return np.random.Generator(np.random.PCG64(self._seed_sequence()))

    def child(self, index: int) -> RngStream:
        """Independent sub-stream ``index`` of this stream."""
        return RngStream(self.seed, self.stream_id, self.path + (int(index),))


def as_generator(rng) -> np.random.Generator:
    """Accept an RngStream, a numpy Generator or an integer seed."""
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng)).generator()
    raise TypeError(f"cannot build a generator from {type(rng).__name__}")
