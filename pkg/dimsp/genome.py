"""Solution encodings and the individual/population containers."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Sequence, Union

import numpy as np

from .errors import EmptyPopulation
from .rngdet import RngStream

Genome = np.ndarray  # read-only 1-D int64


class Encoding(str, Enum):
  PERMUTATION = "permutation"  # each gene exactly once (TSP)
  REPETITION = "repetition"  # each gene exactly `repeats` times (JSSP)
  ASSIGNMENT = "assignment"  # labels in [0, num_values] (QMKP)

  @property
  def is_order_based(self) -> bool:
    return self is not Encoding.ASSIGNMENT


class Direction(str, Enum):
  MINIMIZE = "minimize"
  MAXIMIZE = "maximize"

  def better(self, a: float, b: float) -> bool:
    """True when `a` is strictly better than `b`."""
    return a < b if self is Direction.MINIMIZE else a > b

  def best_index(self, values: np.ndarray) -> int:
    """Index of the best value, lowest index on ties."""
    return int(np.argmin(values) if self is Direction.MINIMIZE else np.argmax(values))

  def rank(self, values: np.ndarray) -> np.ndarray:
    """Indices ordered best first; stable, so ties keep index order."""
    keys = values if self is Direction.MINIMIZE else -values
    return np.argsort(keys, kind="stable")

  def best_of(self, values: Iterable[float]) -> float:
    return min(values) if self is Direction.MINIMIZE else max(values)


@dataclass(frozen=True)
class Layout:
  """Shape of the genomes of one run.

  `num_values` is the city count, job count or knapsack count K depending
  on the encoding; `repeats` is the machine count for JSSP and 1 otherwise.
  """
  encoding: Encoding
  length: int
  num_values: int
  repeats: int = 1

  @property
  def layout(self) -> "Layout":
    return self


def _layout(problem) -> Layout:
  return problem.layout


def make_genome(values: Union[Sequence[int], np.ndarray]) -> Genome:
  """Copy `values` into an immutable int64 genome."""
  genome = np.array(values, dtype=np.int64).reshape(-1)
  genome.setflags(write=False)
  return genome


def random_genome(problem, rng: RngStream) -> Genome:
  """Uniform random genome satisfying the problem's encoding."""
  layout = _layout(problem)
  if layout.encoding is Encoding.PERMUTATION:
    return make_genome(rng.permutation(layout.length))
  if layout.encoding is Encoding.REPETITION:
    genes = np.repeat(np.arange(layout.num_values, dtype=np.int64), layout.repeats)
    return make_genome(rng.generator.permutation(genes))
  return make_genome(rng.integers(0, layout.num_values + 1, size=layout.length))


def validate(genome: Genome, problem) -> bool:
  """True iff `genome` satisfies the encoding invariant of `problem`."""
  layout = _layout(problem)
  genome = np.asarray(genome)
  if genome.ndim != 1 or genome.shape[0] != layout.length:
    return False
  if genome.size and not np.issubdtype(genome.dtype, np.integer):
    return False
  if layout.encoding is Encoding.ASSIGNMENT:
    return bool(np.all((genome >= 0) & (genome <= layout.num_values)))
  if np.any(genome < 0) or np.any(genome >= layout.num_values):
    return False
  counts = np.bincount(genome, minlength=layout.num_values)
  return bool(np.all(counts == layout.repeats))


@dataclass(frozen=True, eq=False)
class Individual:
  """An evaluated genome. Never mutated; operators build new ones."""
  genome: Genome
  fitness: float
  birth_generation: int = 0

  def same_genome(self, other: "Individual") -> bool:
    return bool(np.array_equal(self.genome, other.genome))


@dataclass(frozen=True)
class Population:
  members: tuple[Individual, ...]
  capacity: int
  _fitness: np.ndarray = field(init=False, repr=False, compare=False)

  def __post_init__(self) -> None:
    object.__setattr__(self, "members", tuple(self.members))
    if self.capacity < 1:
      raise ValueError(f"capacity must be positive, got {self.capacity}")
    if len(self.members) > self.capacity:
      raise ValueError(f"{len(self.members)} members exceed capacity {self.capacity}")
    fitness = np.array([m.fitness for m in self.members], dtype=np.float64)
    fitness.setflags(write=False)
    object.__setattr__(self, "_fitness", fitness)

  def __len__(self) -> int:
    return len(self.members)

  def __iter__(self) -> Iterator[Individual]:
    return iter(self.members)

  def __getitem__(self, index: int) -> Individual:
    return self.members[index]

  @property
  def size(self) -> int:
    return len(self.members)

  def fitness_array(self) -> np.ndarray:
    return self._fitness

  def genome_matrix(self) -> np.ndarray:
    if not self.members:
      raise EmptyPopulation("population has no members")
    return np.stack([m.genome for m in self.members])

  def best_index(self, direction: Direction) -> int:
    if not self.members:
      raise EmptyPopulation("population has no members")
    return direction.best_index(self._fitness)

  def best(self, direction: Direction) -> Individual:
    return self.members[self.best_index(direction)]
