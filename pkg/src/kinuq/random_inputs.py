"""Sampling and quadrature for the scalar random input z ~ U(0,1).

Streams are counter based: the pair (master_seed, stream_id) fully
determines every draw, so ensembles can be generated in any order and
still reproduce bit for bit. Reference expectations use Gauss-Legendre
quadrature mapped to [0,1].
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["SeededStream", "SampleSet", "draw_uniform", "gauss_legendre"]

_KEY_MASK = (1 << 64) - 1


class SeededStream:
    """One substream of a Philox counter RNG.

    The 128-bit Philox key is (stream_id << 64) | master_seed, so distinct
    (seed, id) pairs give statistically independent streams without any
    shared state.
    """

    def __init__(self, master_seed: int, stream_id: int = 0):
        master_seed = int(master_seed)
        stream_id = int(stream_id)
        if master_seed < 0 or stream_id < 0:
            raise ValueError("master_seed and stream_id must be nonnegative")
        self.master_seed = master_seed
        self.stream_id = stream_id
        key = (stream_id << 64) | (master_seed & _KEY_MASK)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def uniform(self, count: int) -> np.ndarray:
        if count < 1:
            raise ValueError("empty sample request")
        return self._gen.random(int(count))

    def __repr__(self):
        return f"SeededStream(master_seed={self.master_seed}, stream_id={self.stream_id})"


@dataclass(frozen=True)
class SampleSet:
    """A concrete draw of z values plus the stream identity that made it."""

    values: np.ndarray
    master_seed: int
    stream_id: int
    label: str = ""

    def __len__(self):
        return self.values.shape[0]

    def same_draws(self, other: "SampleSet") -> bool:
        """True when both sets are the identical draw (pairing is valid)."""
        return (
            self.master_seed == other.master_seed
            and self.stream_id == other.stream_id
            and self.values.shape == other.values.shape
            and bool(np.array_equal(self.values, other.values))
        )


def draw_uniform(stream: SeededStream, count: int) -> SampleSet:
    """Draw `count` U(0,1) samples from the stream as a SampleSet."""
    values = stream.uniform(count)
    return SampleSet(values=values, master_seed=stream.master_seed, stream_id=stream.stream_id)


def gauss_legendre(order: int):
    """Nodes and weights of Gauss-Legendre quadrature on [0,1].

    Weights sum to one. Orders outside 1..64 are refused; the reference
    pipeline never needs more and high orders degrade in float64.
    """
    order = int(order)
    if order < 1 or order > 64:
        raise ValueError("unsupported quadrature order")
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w
