"""Deterministic random streams for replicated experiments."""

from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """Counter-based stream keyed by (seed, stream_id).

    Philox is counter-based: the k-th draw is a pure function of
    (seed, stream_id, k), so replications reproduce bit-identical results
    regardless of scheduling order or worker count.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed & _MASK64, self.stream_id & _MASK64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


def as_generator(rng) -> np.random.Generator:
    """Accept an RngStream, a Generator, or a bare int seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, int):
        return RngStream(seed=rng).generator()
    raise TypeError(f"cannot build a generator from {type(rng).__name__}")
