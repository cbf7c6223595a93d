"""Benchmark problems: fitness functions and brute-force oracles.

Each problem wraps a validated instance model, caches the numpy arrays its
fitness function needs and exposes them behind one interface the operators
and the engine share.
"""

import itertools
import logging
import math
from abc import ABC, abstractmethod
from typing import Iterator, Union

import numpy as np

from .errors import InvalidGenome, SpaceTooLarge
from .genome import Direction, Encoding, Genome, Individual, Layout, make_genome, validate
from .models import JsspInstance, ProblemKind, QmkpInstance, TspInstance

logger = logging.getLogger(__name__)

BRUTE_FORCE_LIMIT = 10**7
_CHUNK = 1 << 15


class Problem(ABC):
  """A problem Q(f, S): a search space layout plus a fitness function."""

  kind: ProblemKind
  direction: Direction
  layout: Layout

  @property
  def name(self) -> str:
    return self.instance.name or self.kind.value

  @property
  @abstractmethod
  def instance(self): ...

  @abstractmethod
  def evaluate(self, genome: Genome) -> tuple[Genome, float]:
    """Fitness of `genome` and the genome that should be stored for it.

    Only QMKP returns a different genome (its repaired form).
    """

  def evaluate_many(self, genomes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    stored = np.empty_like(genomes)
    fitness = np.empty(len(genomes), dtype=np.float64)
    for i, genome in enumerate(genomes):
      stored[i], fitness[i] = self.evaluate(genome)
    return stored, fitness

  def individual(self, genome: Genome, generation: int = 0) -> Individual:
    stored, fitness = self.evaluate(genome)
    return Individual(make_genome(stored), float(fitness), generation)

  def individuals(self, genomes: np.ndarray, generation: int = 0) -> list[Individual]:
    stored, fitness = self.evaluate_many(np.asarray(genomes, dtype=np.int64))
    return [Individual(make_genome(g), float(f), generation) for g, f in zip(stored, fitness)]

  def check(self, genome: Genome) -> None:
    if not validate(genome, self.layout):
      raise InvalidGenome(f"genome is not a valid {self.layout.encoding.value} for {self.name}")

  @abstractmethod
  def search_space_size(self) -> int: ...

  @abstractmethod
  def enumerate_genomes(self) -> Iterator[np.ndarray]:
    """Chunks (2-D arrays) covering every genome the oracle must consider."""


# -- JSSP -------------------------------------------------------------------


class JsspProblem(Problem):
  kind = ProblemKind.JSSP
  direction = Direction.MINIMIZE

  def __init__(self, instance: JsspInstance) -> None:
    self._instance = instance
    self.layout = Layout(
      Encoding.REPETITION,
      instance.num_jobs * instance.num_machines,
      instance.num_jobs,
      instance.num_machines,
    )
    self._machines = [[m for m, _ in route] for route in instance.operations]
    self._times = [[t for _, t in route] for route in instance.operations]

  @property
  def instance(self) -> JsspInstance:
    return self._instance

  def makespan(self, genome: Genome) -> int:
    """Semi-active decoding: the t-th occurrence of job j dispatches its t-th operation."""
    num_jobs = self._instance.num_jobs
    num_machines = self._instance.num_machines
    next_op = [0] * num_jobs
    job_ready = [0] * num_jobs
    machine_free = [0] * num_machines
    for job in genome.tolist() if isinstance(genome, np.ndarray) else genome:
      if not 0 <= job < num_jobs or next_op[job] >= num_machines:
        raise InvalidGenome(f"job {job} dispatched more than {num_machines} times or out of range")
      op = next_op[job]
      machine = self._machines[job][op]
      start = max(job_ready[job], machine_free[machine])
      end = start + self._times[job][op]
      job_ready[job] = end
      machine_free[machine] = end
      next_op[job] = op + 1
    if any(n != num_machines for n in next_op):
      raise InvalidGenome("some operations were never dispatched")
    return max(job_ready)

  def evaluate(self, genome: Genome) -> tuple[Genome, float]:
    return genome, float(self.makespan(genome))

  def lower_bound(self) -> int:
    machine_load = [0] * self._instance.num_machines
    for machines, times in zip(self._machines, self._times):
      for m, t in zip(machines, times):
        machine_load[m] += t
    return max(max(machine_load), max(sum(t) for t in self._times))

  def search_space_size(self) -> int:
    j, m = self._instance.num_jobs, self._instance.num_machines
    return math.factorial(j * m) // math.factorial(m) ** j

  def enumerate_genomes(self) -> Iterator[np.ndarray]:
    counts = [self._instance.num_machines] * self._instance.num_jobs
    yield from _chunks(_multiset_permutations(counts), self.layout.length)


def _multiset_permutations(counts: list[int]) -> Iterator[tuple[int, ...]]:
  """Distinct orderings of a multiset given per-value counts, lexicographic."""
  total = sum(counts)
  prefix: list[int] = []

  def walk() -> Iterator[tuple[int, ...]]:
    if len(prefix) == total:
      yield tuple(prefix)
      return
    for value, left in enumerate(counts):
      if left:
        counts[value] -= 1
        prefix.append(value)
        yield from walk()
        prefix.pop()
        counts[value] += 1

  return walk()


# -- TSP --------------------------------------------------------------------


class TspProblem(Problem):
  kind = ProblemKind.TSP
  direction = Direction.MINIMIZE

  def __init__(self, instance: TspInstance) -> None:
    self._instance = instance
    n = instance.num_cities
    self.layout = Layout(Encoding.PERMUTATION, n, n)
    if instance.coordinates is not None:
      xy = np.asarray(instance.coordinates, dtype=np.float64)
      delta = xy[:, None, :] - xy[None, :, :]
      dist = np.sqrt((delta**2).sum(axis=2))
      if instance.rounded:
        dist = np.floor(dist + 0.5)
    else:
      dist = np.asarray(instance.distances, dtype=np.float64)
    dist.setflags(write=False)
    self.distances = dist

  @property
  def instance(self) -> TspInstance:
    return self._instance

  def tour_length(self, genome: Genome) -> float:
    tour = np.asarray(genome)
    return float(self.distances[tour, np.roll(tour, -1)].sum())

  def evaluate(self, genome: Genome) -> tuple[Genome, float]:
    return genome, self.tour_length(genome)

  def evaluate_many(self, genomes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    lengths = self.distances[genomes, np.roll(genomes, -1, axis=1)].sum(axis=1)
    return genomes, lengths.astype(np.float64)

  def search_space_size(self) -> int:
    # city 0 is pinned first; every closed tour has such a rotation
    return math.factorial(max(self.layout.length - 1, 0))

  def enumerate_genomes(self) -> Iterator[np.ndarray]:
    n = self.layout.length
    tours = ((0,) + rest for rest in itertools.permutations(range(1, n)))
    yield from _chunks(tours, n)


# -- QMKP -------------------------------------------------------------------


class QmkpProblem(Problem):
  kind = ProblemKind.QMKP
  direction = Direction.MAXIMIZE

  def __init__(self, instance: QmkpInstance) -> None:
    self._instance = instance
    n = instance.num_objects
    self.layout = Layout(Encoding.ASSIGNMENT, n, instance.num_knapsacks)
    self.weights = np.asarray(instance.weights, dtype=np.float64)
    self.profits = np.asarray(instance.profits, dtype=np.float64)
    pairs = np.zeros((n, n), dtype=np.float64)
    for i, row in enumerate(instance.pair_profits):
      pairs[i, i + 1:] = row
    self.pair_profits = pairs + pairs.T
    self.capacities = np.asarray(instance.capacities, dtype=np.float64)
    for array in (self.weights, self.profits, self.pair_profits, self.capacities):
      array.setflags(write=False)

  @property
  def instance(self) -> QmkpInstance:
    return self._instance

  def repair(self, genome: Genome) -> np.ndarray:
    """Greedy repair: drop the lowest profit/weight object until every knapsack fits."""
    assignment = np.array(genome, dtype=np.int64)
    for k in range(1, self.layout.num_values + 1):
      members = np.flatnonzero(assignment == k)
      load = self.weights[members].sum()
      capacity = self.capacities[k - 1]
      while load > capacity:
        gain = self.profits[members] + self.pair_profits[np.ix_(members, members)].sum(axis=1)
        drop = members[int(np.argmin(gain / self.weights[members]))]
        assignment[drop] = 0
        members = members[members != drop]
        load -= self.weights[drop]
    return assignment

  def profit(self, assignment: np.ndarray) -> float:
    """Profit of an assignment, assumed feasible."""
    total = 0.0
    for k in range(1, self.layout.num_values + 1):
      members = np.flatnonzero(assignment == k)
      if members.size:
        total += self.profits[members].sum()
        total += self.pair_profits[np.ix_(members, members)].sum() / 2.0
    return float(total)

  def feasible(self, assignment: np.ndarray) -> bool:
    loads = np.bincount(assignment, weights=self.weights, minlength=self.layout.num_values + 1)
    return bool(np.all(loads[1:] <= self.capacities))

  def evaluate(self, genome: Genome) -> tuple[Genome, float]:
    repaired = self.repair(genome)
    return repaired, self.profit(repaired)

  def search_space_size(self) -> int:
    return (self.layout.num_values + 1) ** self.layout.length

  def enumerate_genomes(self) -> Iterator[np.ndarray]:
    labels = range(self.layout.num_values + 1)
    yield from _chunks(itertools.product(labels, repeat=self.layout.length), self.layout.length)

  def batch_profit(self, assignments: np.ndarray) -> np.ndarray:
    """Profits of many assignments at once; infeasible rows get -inf."""
    profit = np.zeros(len(assignments), dtype=np.float64)
    feasible = np.ones(len(assignments), dtype=bool)
    for k in range(1, self.layout.num_values + 1):
      chosen = (assignments == k).astype(np.float64)
      feasible &= chosen @ self.weights <= self.capacities[k - 1]
      profit += chosen @ self.profits
      profit += ((chosen @ self.pair_profits) * chosen).sum(axis=1) / 2.0
    profit[~feasible] = -np.inf
    return profit


def _chunks(rows: Iterator[tuple[int, ...]], width: int) -> Iterator[np.ndarray]:
  while True:
    block = list(itertools.islice(rows, _CHUNK))
    if not block:
      return
    yield np.asarray(block, dtype=np.int64).reshape(len(block), width)


ProblemLike = Union[Problem, JsspInstance, TspInstance, QmkpInstance]


def build_problem(instance) -> Problem:
  if isinstance(instance, Problem):
    return instance
  if isinstance(instance, JsspInstance):
    return JsspProblem(instance)
  if isinstance(instance, TspInstance):
    return TspProblem(instance)
  if isinstance(instance, QmkpInstance):
    return QmkpProblem(instance)
  raise TypeError(f"not a problem instance: {type(instance).__name__}")


def jssp_makespan(instance: ProblemLike, genome: Genome) -> int:
  problem = build_problem(instance)
  problem.check(genome)
  return problem.makespan(genome)


def tsp_tour_length(instance: ProblemLike, genome: Genome) -> float:
  problem = build_problem(instance)
  problem.check(genome)
  return problem.tour_length(genome)


def qmkp_profit(instance: ProblemLike, genome: Genome) -> float:
  """Profit after greedy repair. Use `QmkpProblem.evaluate` to also get the repaired genome."""
  problem = build_problem(instance)
  problem.check(genome)
  return problem.evaluate(genome)[1]


def brute_force_optimum(problem: ProblemLike, limit: int = BRUTE_FORCE_LIMIT) -> tuple[float, Genome]:
  """Exhaustive optimum. Ties keep the first genome in enumeration order."""
  problem = build_problem(problem)
  space = problem.search_space_size()
  if space > limit:
    raise SpaceTooLarge(f"{problem.name}: {space} genomes exceed the brute-force limit of {limit}")
  logger.debug("enumerating %d genomes for %s", space, problem.name)

  direction = problem.direction
  best_fitness = math.inf if direction is Direction.MINIMIZE else -math.inf
  best_genome = None
  for chunk in problem.enumerate_genomes():
    if isinstance(problem, QmkpProblem):
      fitness = problem.batch_profit(chunk)
    else:
      _, fitness = problem.evaluate_many(chunk)
    i = direction.best_index(fitness)
    if direction.better(fitness[i], best_fitness):
      best_fitness, best_genome = float(fitness[i]), chunk[i]
  return best_fitness, make_genome(best_genome)
