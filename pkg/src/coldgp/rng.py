"""Deterministic random streams.

One generator family is used everywhere: Philox, a 64-bit counter-based
generator, keyed through ``numpy.random.SeedSequence(master_seed,
spawn_key=(stream_index,))``.  The same (master_seed, stream_index) pair
therefore replays the identical bit sequence on every platform numpy
supports, and distinct stream indices give statistically independent
streams without coordination.

Standard normals come from ``numpy.random.Generator.standard_normal``
(the ziggurat transform); uniforms are 53-bit dyadic rationals in [0, 1).
Draw order defines the sequence: two streams built from the same key agree
bitwise only if they are consumed through the same method calls in the
same order.
"""
from __future__ import annotations

import numpy as np

from .exceptions import EmptyInputError

_MAX_SEED = 2**64


def _check_seed(master_seed) -> int:
    seed = int(master_seed)
    if not 0 <= seed < _MAX_SEED:
        raise ValueError(f"master_seed must be a 64-bit unsigned int, got {master_seed!r}")
    return seed


class RngStream:
    """A named, replayable source of randomness.

    Identity is the (master_seed, stream_index) pair; both are read-only.
    Drawing advances only this stream's internal counter, never any other
    stream's, so streams can be handed to independent workers safely.
    """

    __slots__ = ("_master_seed", "_stream_index", "_gen")

    def __init__(self, master_seed: int, stream_index: int = 0):
        seed = _check_seed(master_seed)
        index = int(stream_index)
        if index < 0:
            raise ValueError(f"stream_index must be non-negative, got {stream_index!r}")
        ss = np.random.SeedSequence(seed, spawn_key=(index,))
        object.__setattr__(self, "_master_seed", seed)
        object.__setattr__(self, "_stream_index", index)
        object.__setattr__(self, "_gen", np.random.Generator(np.random.Philox(ss)))

    def __setattr__(self, name, value):
        raise AttributeError("RngStream is immutable after construction")

    @property
    def master_seed(self) -> int:
        return self._master_seed

    @property
    def stream_index(self) -> int:
        return self._stream_index

    def __repr__(self):
        return f"RngStream(master_seed={self._master_seed}, stream_index={self._stream_index})"

    def standard_normal(self, size=None, dtype=np.float64):
        return self._gen.standard_normal(size=size, dtype=dtype)

    def uniform(self, low: float = 0.0, high: float = 1.0, size=None):
        return self._gen.uniform(low, high, size=size)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high=high, size=size)

    def permutation(self, n: int) -> np.ndarray:
        if n < 0:
            raise ValueError("permutation length must be non-negative")
        return self._gen.permutation(n)


def derive_seed(master_seed: int, *labels: int) -> int:
    """Derive a fresh 64-bit master seed from a seed and integer labels.

    Used wherever a component needs its own seed space (one per temperature
    grid position, one per replicate dataset) without colliding with the
    stream indices the component will consume internally.  Deterministic:
    the same (seed, labels) always yields the same derived seed.
    """
    seed = _check_seed(master_seed)
    if not labels:
        raise EmptyInputError("derive_seed needs at least one label")
    key = tuple(int(l) for l in labels)
    if any(l < 0 for l in key):
        raise ValueError(f"labels must be non-negative, got {labels!r}")
    ss = np.random.SeedSequence(seed, spawn_key=key)
    return int(ss.generate_state(1, np.uint64)[0])
