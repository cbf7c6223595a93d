"""Evolution drivers: topology-based island models and the dynamic spectral model.

Baseline models keep a fixed set of islands wired by a topology and copy a
fraction of each island to its neighbours every `interval` generations.
The dynamic model starts from one island and, at every epoch, merges all
islands, clusters the merged population by genome similarity and turns
each cluster into a new island with freshly drawn operators.

Random draws are routed through index-addressed streams split from the
master seed, so the order in which islands evolve never changes a result:

  root/0/i          initial population of island i
  root/1/e/i        evolution of island i during segment e
  root/2/e          clustering at epoch e
  root/3/m/i        migrant choice of island i at migration event m
  root/4/e          operator assignment at epoch e (epoch 0 seeds the first island)
"""

import logging
from concurrent.futures import Executor, ThreadPoolExecutor
from contextlib import nullcontext
from dataclasses import dataclass, field
from functools import partial
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError
from .genome import Individual, Population, random_genome
from .metrics import avg_score, diversity, global_best, top_individuals
from .models import (
  EigenSolver,
  Lineage,
  MigrationPolicy,
  ModelKind,
  OperatorSet,
  RunConfig,
  RunTrace,
  SimilarityKind,
  Solution,
  TraceRecord,
)
from .operators import assign_operators, check_pool, default_pool, evolve_one_generation
from .problems import Problem
from .rngdet import RngStream
from .similarity import build_matrix
from .spectral import cluster

logger = logging.getLogger(__name__)

STREAM_INIT = 0
STREAM_EVOLVE = 1
STREAM_CLUSTER = 2
STREAM_MIGRATE = 3
STREAM_OPERATORS = 4


@dataclass(frozen=True)
class Topology:
  kind: ModelKind
  num_islands: int

  def __post_init__(self) -> None:
    if not self.kind.is_baseline:
      raise ConfigError(f"{self.kind.value} has no fixed topology", key="model")
    if self.num_islands < 1:
      raise ConfigError("at least one island is required", key="num_islands")
    if self.kind in (ModelKind.RING, ModelKind.STAR) and self.num_islands < 2:
      raise ConfigError(f"{self.kind.value} needs at least 2 islands", key="num_islands")

  def neighbors(self, island: int) -> list[int]:
    """Islands that receive migrants from `island`, ascending."""
    n = self.num_islands
    if self.kind is ModelKind.RING:
      return sorted({(island - 1) % n, (island + 1) % n} - {island})
    if self.kind is ModelKind.STAR:
      return [i for i in range(1, n)] if island == 0 else [0]
    return [i for i in range(n) if i != island]


@dataclass
class Island:
  population: Population
  operators: OperatorSet
  rng: RngStream


@dataclass
class Archipelago:
  problem: Problem
  islands: list[Island]
  topology: Optional[Topology] = None
  elite: Optional[Individual] = None
  generation: int = 0
  refill: bool = False  # islands breed back up to capacity every generation
  records: list[TraceRecord] = field(default_factory=list)

  def populations(self) -> list[Population]:
    return [island.population for island in self.islands]

  def individuals(self) -> list[Individual]:
    return [ind for island in self.islands for ind in island.population]


def update_elite(archipelago: Archipelago, candidates: Sequence[Individual]) -> Individual:
  """Keep the best individual ever seen; ties keep the incumbent."""
  direction = archipelago.problem.direction
  best = archipelago.elite
  for candidate in candidates:
    if best is None or direction.better(candidate.fitness, best.fitness):
      best = candidate
  archipelago.elite = best
  return best


def random_population(problem: Problem, size: int, capacity: int, rng: RngStream) -> Population:
  genomes = np.stack([random_genome(problem, rng) for _ in range(size)])
  return Population(tuple(problem.individuals(genomes, 0)), capacity)


def _evolve_island(arch: Archipelago, island: Island) -> Population:
  size = island.population.capacity if arch.refill else None
  return evolve_one_generation(island.population, island.operators, arch.problem, island.rng,
                               arch.generation, size)


def _evolve_all(arch: Archipelago, executor: Optional[Executor] = None) -> None:
  """Evolve every island; each owns its stream, so threads cannot reorder draws."""
  if executor is None or len(arch.islands) < 2:
    populations = [_evolve_island(arch, island) for island in arch.islands]
  else:
    populations = list(executor.map(partial(_evolve_island, arch), arch.islands))
  for island, pop in zip(arch.islands, populations):
    island.population = pop


def _island_executor(workers: int):
  return ThreadPoolExecutor(max_workers=workers) if workers > 1 else nullcontext()


def _record(arch: Archipelago) -> TraceRecord:
  populations = arch.populations()
  everyone = arch.individuals()
  update_elite(arch, [p.best(arch.problem.direction) for p in populations])
  record = TraceRecord(
    generation=arch.generation,
    num_islands=len(arch.islands),
    island_sizes=[p.size for p in populations],
    best_score=arch.elite.fitness,
    avg_score=avg_score(everyone),
    diversity=diversity(everyone, global_best(populations, arch.problem.direction)),
  )
  arch.records.append(record)
  logger.debug("gen %d: islands=%d best=%s avg=%.4f div=%.4f", record.generation,
               record.num_islands, record.best_score, record.avg_score, record.diversity)
  return record


def _trace(arch: Archipelago, model: ModelKind, seed: int, top_n: int, fingerprint: str) -> RunTrace:
  top = top_individuals(arch.individuals(), top_n, arch.problem.direction)
  return RunTrace(
    model=model,
    problem=arch.problem.name,
    seed=seed,
    direction=arch.problem.direction,
    lineage=Lineage(seed=seed, path=[]),
    config_fingerprint=fingerprint,
    records=arch.records,
    top=[Solution(fitness=ind.fitness, genome=ind.genome.tolist()) for ind in top],
  )


# -- baseline island models -------------------------------------------------


def migrate(arch: Archipelago, policy: MigrationPolicy, capacity: int, rng: RngStream) -> int:
  """Synchronous copy migration with replace-worst at the destination.

  Each island copies ceil(fraction * capacity) uniformly chosen members,
  split as evenly as possible across its neighbours (extras to the lowest
  indices). Recipients overwrite their worst members but never their
  current best. Returns the number of individuals placed.
  """
  direction = arch.problem.direction
  count = policy.migrants(capacity)
  inbox: list[list[Individual]] = [[] for _ in arch.islands]
  for i, island in enumerate(arch.islands):
    neighbors = arch.topology.neighbors(i)
    pop = island.population
    if not neighbors or not pop.size:
      continue
    picks = rng.split(i).choice(pop.size, size=min(count, pop.size), replace=False)
    base, extra = divmod(len(picks), len(neighbors))
    start = 0
    for r, target in enumerate(neighbors):
      share = base + (1 if r < extra else 0)
      inbox[target].extend(pop[int(k)] for k in picks[start:start + share])
      start += share

  placed = 0
  for island, incoming in zip(arch.islands, inbox):
    pop = island.population
    incoming = incoming[:max(pop.size - 1, 0)]
    if not incoming:
      continue
    worst_first = direction.rank(pop.fitness_array())[::-1]
    members = list(pop.members)
    for slot, migrant in zip(worst_first, incoming):
      members[int(slot)] = migrant
    island.population = Population(tuple(members), pop.capacity)
    placed += len(incoming)
  return placed


def run_baseline(problem: Problem, topology: Topology, policy: MigrationPolicy, ops: OperatorSet,
                 island_capacity: int, max_generations: int, seed: int,
                 top_n: int = 5, fingerprint: str = "", workers: int = 1) -> RunTrace:
  """Classic island model: independent evolution plus periodic migration.

  `workers` > 1 evolves islands on a thread pool between migrations.
  """
  if island_capacity < 2:
    raise ConfigError("island capacity must be at least 2", key="island_capacity")
  if max_generations < 1:
    raise ConfigError("at least one generation is required", key="max_generations")
  check_pool([ops], problem.layout.encoding)

  root = RngStream.from_seed(seed)
  init = root.split(STREAM_INIT)
  evolve = root.split(STREAM_EVOLVE)
  islands = [
    Island(random_population(problem, island_capacity, island_capacity, init.split(i)),
           ops, evolve.split(0).split(i))
    for i in range(topology.num_islands)
  ]
  arch = Archipelago(problem, islands, topology)
  _record(arch)

  with _island_executor(workers) as executor:
    for generation in range(1, max_generations + 1):
      segment = (generation - 1) // policy.interval
      if segment and (generation - 1) % policy.interval == 0:
        for i, island in enumerate(arch.islands):
          island.rng = evolve.split(segment).split(i)
      arch.generation = generation
      _evolve_all(arch, executor)
      if generation % policy.interval == 0:
        event = generation // policy.interval
        placed = migrate(arch, policy, island_capacity, root.split(STREAM_MIGRATE).split(event))
        logger.info("gen %d: %s migration moved %d individuals", generation, topology.kind.value,
                    placed)
      _record(arch)

  return _trace(arch, topology.kind, seed, top_n, fingerprint)


# -- dynamic island model ---------------------------------------------------


def run_epoch(arch: Archipelago, pool: list[OperatorSet], capacity: int, k_max: int, epoch: int,
              root: RngStream, similarity: SimilarityKind, eigensolver: EigenSolver) -> None:
  """Merge every island, cluster by similarity, and rebuild the islands."""
  direction = arch.problem.direction
  merged = arch.individuals()
  w = build_matrix(merged, similarity)
  clustering = cluster(w, k_max, root.split(STREAM_CLUSTER).split(epoch), eigensolver)

  populations = []
  for label in range(clustering.k):
    members = [merged[int(i)] for i in clustering.members(label)]
    if len(members) > capacity:
      fitness = np.array([m.fitness for m in members])
      keep = np.sort(direction.rank(fitness)[:capacity])
      members = [members[int(i)] for i in keep]
    populations.append(Population(tuple(members), capacity))

  operators = assign_operators(len(populations), pool, root.split(STREAM_OPERATORS).split(epoch))
  evolve = root.split(STREAM_EVOLVE).split(epoch)
  arch.islands = [
    Island(pop, ops, evolve.split(i)) for i, (pop, ops) in enumerate(zip(populations, operators))
  ]
  logger.info("gen %d: epoch %d clustered %d individuals into %d islands %s", arch.generation,
              epoch, len(merged), len(populations), [p.size for p in populations])


def run_dimsp(problem: Problem, pool: list[OperatorSet], island_capacity: int, k_max: int,
              epoch_interval: int, max_generations: int, seed: int, top_n: int = 5,
              similarity: SimilarityKind = SimilarityKind.HAMMING,
              eigensolver: EigenSolver = EigenSolver.AUTO, fingerprint: str = "",
              workers: int = 1) -> RunTrace:
  """Dynamic island model driven by spectral clustering.

  One island of `island_capacity` random individuals at generation 0; an
  epoch at every multiple of `epoch_interval` before the last generation;
  the final populations are merged and the top-ranked individuals reported.
  Clusters smaller than `island_capacity` are not padded at the epoch but
  breed back up to capacity over the following generation, so the total
  population stays within k_max * island_capacity.
  """
  if island_capacity < 2:
    raise ConfigError("island capacity must be at least 2", key="island_capacity")
  if k_max < 1:
    raise ConfigError("k_max must be at least 1", key="k_max")
  if max_generations < 1:
    raise ConfigError("at least one generation is required", key="max_generations")
  check_pool(pool, problem.layout.encoding)

  root = RngStream.from_seed(seed)
  population = random_population(problem, island_capacity, island_capacity,
                                 root.split(STREAM_INIT).split(0))
  (operators,) = assign_operators(1, pool, root.split(STREAM_OPERATORS).split(0))
  first = Island(population, operators, root.split(STREAM_EVOLVE).split(0).split(0))
  arch = Archipelago(problem, [first], refill=True)
  _record(arch)

  with _island_executor(workers) as executor:
    for generation in range(1, max_generations + 1):
      arch.generation = generation
      _evolve_all(arch, executor)
      if generation % epoch_interval == 0 and generation < max_generations:
        run_epoch(arch, pool, island_capacity, k_max, generation // epoch_interval, root,
                  similarity, eigensolver)
      _record(arch)

  return _trace(arch, ModelKind.DIMSP, seed, top_n, fingerprint)


def run_configured(config: RunConfig, problem: Problem, model: ModelKind, seed: int) -> RunTrace:
  """Run one seed of `model` with every knob taken from `config`."""
  pool = list(config.operators) or default_pool(problem.layout.encoding)
  fingerprint = config.fingerprint()
  if model is ModelKind.DIMSP:
    return run_dimsp(
      problem, pool, config.island_capacity, config.k_max, config.effective_epoch_interval,
      config.max_generations, seed, top_n=config.top_n, similarity=config.similarity,
      eigensolver=config.eigensolver, fingerprint=fingerprint, workers=config.island_workers,
    )
  return run_baseline(
    problem, Topology(model, config.num_islands), config.migration, pool[0],
    config.island_capacity, config.max_generations, seed, top_n=config.top_n,
    fingerprint=fingerprint, workers=config.island_workers,
  )
