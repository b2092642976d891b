"""
Deterministic random streams.

Every stream is a numpy Generator over the counter-based Philox bit generator,
keyed by SeedSequence(seed, spawn_key=(substream_id,)). Identical
(seed, substream_id) pairs replay the same sequence on any platform, and
distinct substream ids never share state.
"""
from __future__ import annotations

from typing import Dict

import numpy as np

from .errors import ParameterError

# Substream ids are laid out as replication_index * STREAMS_PER_REPLICATION + concern.
STREAMS_PER_REPLICATION = 32

CONCERNS: Dict[str, int] = {
    "arrivals": 0,
    "registration": 1,
    "triage": 2,
    "acuity": 3,
    "first_aid": 4,
    "routing": 5,
    "lab": 6,
    "xray": 7,
    "treatment": 8,
    "attributes": 9,
    "beds": 10,
    "population": 11,
    "labels": 12,
    "split": 13,
}


class RandomStream:
    """Single-owner source of uniform(0,1) draws; `counter` counts raw draws consumed."""

    __slots__ = ("seed", "substream_id", "counter", "_gen")

    def __init__(self, seed: int, substream_id: int = 0) -> None:
        if int(seed) < 0 or int(seed) >= 2**64:
            raise ParameterError(f"seed must be a 64-bit unsigned integer, got {seed}")
        if int(substream_id) < 0:
            raise ParameterError(f"substream_id must be >= 0, got {substream_id}")
        self.seed = int(seed)
        self.substream_id = int(substream_id)
        self.counter = 0
        seq = np.random.SeedSequence(self.seed, spawn_key=(self.substream_id,))
        self._gen = np.random.Generator(np.random.Philox(seq))

    def uniform01(self) -> float:
        self.counter += 1
        return float(self._gen.random())

    def uniforms(self, n: int) -> np.ndarray:
        """n draws; identical to n successive uniform01() calls."""
        if n < 0:
            raise ParameterError(f"n must be >= 0, got {n}")
        self.counter += n
        return self._gen.random(n)

    def replay(self) -> "RandomStream":
        """Fresh stream positioned at the start of the same sequence."""
        return RandomStream(self.seed, self.substream_id)

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed}, substream_id={self.substream_id}, counter={self.counter})"


class StreamFamily:
    """The set of streams owned by one replication, one per stochastic concern."""

    def __init__(self, master_seed: int, replication_index: int = 0) -> None:
        if replication_index < 0:
            raise ParameterError(f"replication_index must be >= 0, got {replication_index}")
        self.master_seed = int(master_seed)
        self.replication_index = int(replication_index)
        self._streams: Dict[str, RandomStream] = {}

    def substream_id(self, concern: str) -> int:
        if concern not in CONCERNS:
            raise ParameterError(f"unknown stream concern: {concern!r}")
        return self.replication_index * STREAMS_PER_REPLICATION + CONCERNS[concern]

    def stream(self, concern: str) -> RandomStream:
        if concern not in self._streams:
            self._streams[concern] = RandomStream(self.master_seed, self.substream_id(concern))
        return self._streams[concern]
