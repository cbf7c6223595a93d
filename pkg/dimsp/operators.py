"""Genetic operators and the per-island operator assignment.

Crossovers take two parents and return two children; mutations modify a
freshly copied child in place. Every operator preserves the encoding
invariant, including the gene multiset of JSSP's permutation with
repetition.
"""

import math
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, EmptyPool, EmptyPopulation, PopulationTooSmall
from .genome import Direction, Encoding, Layout, Population
from .models import CrossoverKind, MutationKind, OperatorSet
from .rngdet import RngStream

Pair = tuple[np.ndarray, np.ndarray]


def tournament_select(fitness: np.ndarray, count: int, k: int,
                      direction: Direction, rng: RngStream) -> np.ndarray:
  """Indices of `count` tournament winners; ties go to the first contender drawn."""
  contenders = rng.integers(0, len(fitness), size=(count, k))
  scores = fitness[contenders]
  pick = np.argmin(scores, axis=1) if direction is Direction.MINIMIZE else np.argmax(scores, axis=1)
  return contenders[np.arange(count), pick]


def _cut_points(n: int, rng: RngStream) -> tuple[int, int]:
  a, b = sorted(rng.choice(n + 1, size=2, replace=False).tolist())
  return a, b


def _occurrence_rank(values: np.ndarray) -> np.ndarray:
  """For each position, how many equal values precede it."""
  order = np.argsort(values, kind="stable")
  ordered = values[order]
  starts = np.flatnonzero(np.r_[True, ordered[1:] != ordered[:-1]])
  lengths = np.diff(np.r_[starts, len(values)])
  rank = np.empty(len(values), dtype=np.int64)
  rank[order] = np.arange(len(values)) - np.repeat(starts, lengths)
  return rank


def _ox_child(donor: np.ndarray, filler: np.ndarray, a: int, b: int) -> np.ndarray:
  n = len(donor)
  child = np.empty(n, dtype=np.int64)
  child[a:b] = donor[a:b]
  size = int(max(donor.max(), filler.max())) + 1
  need = np.bincount(filler, minlength=size) - np.bincount(donor[a:b], minlength=size)
  scan = np.roll(filler, -b)
  keep = _occurrence_rank(scan) < need[scan]
  child[(np.arange(b, b + n - (b - a))) % n] = scan[keep]
  return child


def order_crossover(p1: np.ndarray, p2: np.ndarray, rng: RngStream) -> Pair:
  """OX generalized to multisets.

  The child keeps the donor's segment and fills the remaining positions,
  starting after the segment and wrapping, with the other parent's genes in
  order, skipping as many copies of each gene as the segment already holds.
  """
  n = len(p1)
  if n < 2:
    return p1.copy(), p2.copy()
  a, b = _cut_points(n, rng)
  return _ox_child(p1, p2, a, b), _ox_child(p2, p1, a, b)


def _pmx_child(donor: np.ndarray, other: np.ndarray, a: int, b: int) -> np.ndarray:
  child = other.copy()
  child[a:b] = donor[a:b]
  position = np.empty(len(donor), dtype=np.int64)
  position[donor] = np.arange(len(donor))
  in_segment = np.zeros(len(donor), dtype=bool)
  in_segment[donor[a:b]] = True
  for i in (*range(a), *range(b, len(donor))):
    gene = other[i]
    while in_segment[gene]:
      gene = other[position[gene]]
    child[i] = gene
  return child


def partially_mapped_crossover(p1: np.ndarray, p2: np.ndarray, rng: RngStream) -> Pair:
  """PMX; genes must be a permutation of 0..n-1."""
  n = len(p1)
  if n < 2:
    return p1.copy(), p2.copy()
  a, b = _cut_points(n, rng)
  return _pmx_child(p1, p2, a, b), _pmx_child(p2, p1, a, b)


def uniform_crossover(p1: np.ndarray, p2: np.ndarray, rng: RngStream) -> Pair:
  mask = rng.random(len(p1)) < 0.5
  return np.where(mask, p1, p2), np.where(mask, p2, p1)


def swap_mutation(genome: np.ndarray, rng: RngStream, layout: Layout) -> None:
  if len(genome) < 2:
    return
  i, j = rng.choice(len(genome), size=2, replace=False)
  genome[i], genome[j] = genome[j], genome[i]


def insertion_mutation(genome: np.ndarray, rng: RngStream, layout: Layout) -> None:
  if len(genome) < 2:
    return
  i, j = rng.choice(len(genome), size=2, replace=False).tolist()
  gene = genome[i]
  if i < j:
    genome[i:j] = genome[i + 1:j + 1].copy()
  else:
    genome[j + 1:i + 1] = genome[j:i].copy()
  genome[j] = gene


def inversion_mutation(genome: np.ndarray, rng: RngStream, layout: Layout) -> None:
  if len(genome) < 2:
    return
  a, b = _cut_points(len(genome), rng)
  genome[a:b] = genome[a:b][::-1].copy()


def reassign_mutation(genome: np.ndarray, rng: RngStream, layout: Layout) -> None:
  slot = int(rng.integers(0, len(genome)))
  genome[slot] = rng.integers(0, layout.num_values + 1)


CROSSOVERS: dict[CrossoverKind, Callable[[np.ndarray, np.ndarray, RngStream], Pair]] = {
  CrossoverKind.ORDER: order_crossover,
  CrossoverKind.PMX: partially_mapped_crossover,
  CrossoverKind.UNIFORM: uniform_crossover,
}

MUTATIONS: dict[MutationKind, Callable[[np.ndarray, RngStream, Layout], None]] = {
  MutationKind.SWAP: swap_mutation,
  MutationKind.INSERTION: insertion_mutation,
  MutationKind.INVERSION: inversion_mutation,
  MutationKind.REASSIGN: reassign_mutation,
}


def default_pool(encoding: Encoding) -> list[OperatorSet]:
  if encoding is Encoding.ASSIGNMENT:
    return [OperatorSet(crossover=CrossoverKind.UNIFORM, mutation=MutationKind.REASSIGN)]
  if encoding is Encoding.REPETITION:
    return [
      OperatorSet(crossover=CrossoverKind.ORDER, mutation=MutationKind.SWAP),
      OperatorSet(crossover=CrossoverKind.ORDER, mutation=MutationKind.INSERTION),
      OperatorSet(crossover=CrossoverKind.ORDER, mutation=MutationKind.INVERSION),
    ]
  return [
    OperatorSet(crossover=CrossoverKind.ORDER, mutation=MutationKind.INVERSION),
    OperatorSet(crossover=CrossoverKind.PMX, mutation=MutationKind.SWAP),
    OperatorSet(crossover=CrossoverKind.ORDER, mutation=MutationKind.INSERTION),
  ]


def check_pool(pool: list[OperatorSet], encoding: Encoding) -> None:
  if not pool:
    raise EmptyPool("operator pool is empty")
  for i, ops in enumerate(pool):
    reason = ops.compatible_with(encoding)
    if reason:
      raise ConfigError(reason, key=f"operators.{i}")


def assign_operators(num_islands: int, pool: list[OperatorSet], rng: RngStream) -> list[OperatorSet]:
  """One set per island, drawn uniformly with replacement in island order."""
  if not pool:
    raise EmptyPool("operator pool is empty")
  picks = rng.integers(0, len(pool), size=num_islands)
  return [pool[int(i)] for i in picks]


def evolve_one_generation(pop: Population, ops: OperatorSet, problem, rng: RngStream,
                          generation: int = 0, size: Optional[int] = None) -> Population:
  """Generational replacement with an elite of one.

  The best member survives unchanged at index 0; the rest of the slots are
  filled by tournament-selected parents, crossed over with probability
  `crossover_rate` and mutated with probability `mutation_rate`.

  The new generation has `size` members, default the current size. Passing
  `pop.capacity` lets an island that lost members at an epoch grow back.
  """
  if pop.size == 0:
    raise EmptyPopulation("cannot evolve an empty population")
  if pop.size < 2 and ops.crossover_rate > 0:
    raise PopulationTooSmall(f"crossover needs at least 2 members, got {pop.size}")
  size = pop.size if size is None else size
  if not 1 <= size <= pop.capacity:
    raise ValueError(f"generation size {size} outside [1, {pop.capacity}]")

  direction = problem.direction
  elite = pop.best(direction)
  num_offspring = size - 1
  if num_offspring == 0:
    return Population((elite,), pop.capacity)

  genomes = pop.genome_matrix()
  num_pairs = math.ceil(num_offspring / 2)
  parents = tournament_select(pop.fitness_array(), 2 * num_pairs, ops.tournament_size, direction, rng)
  crossing = rng.random(num_pairs) < ops.crossover_rate
  crossover = CROSSOVERS[ops.crossover]

  children: list[np.ndarray] = []
  for p in range(num_pairs):
    mother, father = genomes[parents[2 * p]], genomes[parents[2 * p + 1]]
    if crossing[p]:
      children.extend(crossover(mother, father, rng))
    else:
      children.extend((mother.copy(), father.copy()))
  children = children[:num_offspring]

  mutate = MUTATIONS[ops.mutation]
  for i in np.flatnonzero(rng.random(num_offspring) < ops.mutation_rate):
    mutate(children[i], rng, problem.layout)

  offspring = problem.individuals(np.stack(children), generation)
  return Population((elite, *offspring), pop.capacity)
