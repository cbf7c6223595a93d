"""Deterministic, splittable random streams.

Each stream is a numpy `Generator` over the Philox counter-based bit
generator, keyed by a master seed plus a path of split indices. Two streams
with the same lineage replay the same draws no matter which thread or
process owns them, and a child never depends on how far its parent has
advanced.
"""

from typing import Optional, Sequence

import numpy as np

_ENTROPY_MASK = (1 << 64) - 1


class RngStream:
  """A Philox stream addressed by (master seed, split path)."""

  __slots__ = ("seed", "path", "_generator")

  def __init__(self, seed: int, path: Sequence[int] = ()) -> None:
    self.seed = int(seed)
    self.path = tuple(int(i) for i in path)
    sequence = np.random.SeedSequence(
      entropy=self.seed & _ENTROPY_MASK,
      spawn_key=self.path,
    )
    self._generator = np.random.Generator(np.random.Philox(sequence))

  @classmethod
  def from_seed(cls, seed: int) -> "RngStream":
    return cls(seed)

  @property
  def lineage(self) -> tuple[int, tuple[int, ...]]:
    return self.seed, self.path

  @property
  def generator(self) -> np.random.Generator:
    return self._generator

  def split(self, index: int) -> "RngStream":
    """Child stream keyed by this stream's lineage plus `index`."""
    if index < 0:
      raise ValueError(f"split index must be non-negative, got {index}")
    return RngStream(self.seed, self.path + (index,))

  # Thin wrappers so call sites read like the rest of the numpy API.

  def integers(self, low: int, high: Optional[int] = None, size=None) -> np.ndarray:
    return self._generator.integers(low, high, size=size)

  def random(self, size=None):
    return self._generator.random(size)

  def permutation(self, n: int) -> np.ndarray:
    return self._generator.permutation(n)

  def choice(self, n: int, size=None, replace: bool = True, p=None) -> np.ndarray:
    return self._generator.choice(n, size=size, replace=replace, p=p)

  def raw64(self, size: int) -> np.ndarray:
    """Raw 64-bit words straight from the bit generator."""
    return self._generator.bit_generator.random_raw(size)

  def __repr__(self) -> str:
    return f"RngStream(seed={self.seed}, path={self.path})"


def split(parent: RngStream, index: int) -> RngStream:
  """Child of `parent` keyed by `index`; independent of the parent's draws."""
  return parent.split(index)
