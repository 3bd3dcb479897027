"""Deterministic substream RNG built on the counter-based Philox generator.

A stream is identified by a 64-bit seed plus a tuple of nonnegative integers
(the stream id).  Equal (seed, stream_id) pairs always yield identical sample
sequences; distinct ids yield statistically independent streams.  Substreams
are derived with child(), so e.g. packet draws keyed by
(node, tick, packet) never shift when more nodes or ticks are added.
"""
from __future__ import annotations

import hashlib

import numpy as np

# Domain tags keep different uses of the same (node, tick, ...) coordinates
# on disjoint streams.
DOMAIN_PACKET = 1
DOMAIN_SERVER = 2
DOMAIN_RATE_JITTER = 3


class RngStream:
    """Stateful random stream keyed by (seed, stream_id).

    The underlying generator is created lazily from a SeedSequence with
    spawn_key=stream_id, so construction is cheap and two streams with the
    same key are bit-identical draw for draw.
    """

    __slots__ = ("seed", "stream_id", "_gen")

    def __init__(self, seed: int, stream_id: tuple = ()):
        if not 0 <= int(seed) < 2**64:
            raise ValueError("seed must fit in 64 bits")
        self.seed = int(seed)
        self.stream_id = tuple(_key_component(i) for i in stream_id)
        self._gen: np.random.Generator | None = None

    @property
    def gen(self) -> np.random.Generator:
        if self._gen is None:
            ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.stream_id)
            self._gen = np.random.Generator(np.random.Philox(ss))
        return self._gen

    def child(self, *path) -> "RngStream":
        """Fresh independent stream with the id extended by path.

        Path components are nonnegative ints or strings; strings are mapped
        to 64-bit ints by a stable hash so labels work as substream keys.
        """
        return RngStream(self.seed, self.stream_id + path)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def _key_component(value) -> int:
    """Coerce a stream-id component to a nonnegative int, hashing strings."""
    if isinstance(value, str):
        digest = hashlib.sha256(value.encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "little")
    out = int(value)
    if out < 0:
        raise ValueError(f"stream id components must be >= 0, got {value}")
    return out
