"""Pydantic data models: instances, run configuration, traces and summaries."""

import hashlib
import math
from enum import Enum
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .genome import Direction, Encoding


class ProblemKind(str, Enum):
  JSSP = "jssp"
  TSP = "tsp"
  QMKP = "qmkp"


class ModelKind(str, Enum):
  DIMSP = "dimsp"
  RING = "ring"
  STAR = "star"
  FULLY_CONNECTED = "fully_connected"

  @property
  def is_baseline(self) -> bool:
    return self is not ModelKind.DIMSP


class CrossoverKind(str, Enum):
  ORDER = "order_crossover"
  PMX = "partially_mapped_crossover"
  UNIFORM = "uniform_crossover"


class MutationKind(str, Enum):
  SWAP = "swap"
  INSERTION = "insertion"
  INVERSION = "inversion"
  REASSIGN = "reassign"


class SimilarityKind(str, Enum):
  HAMMING = "hamming"  # positional matches, the default
  EDGE = "edge"  # shared undirected tour edges
  FITNESS = "fitness"


class EigenSolver(str, Enum):
  AUTO = "auto"
  JACOBI = "jacobi"
  LAPACK = "lapack"


# -- instances -------------------------------------------------------------


class JsspInstance(BaseModel):
  """Classic job shop: every job visits every machine exactly once."""
  model_config = ConfigDict(frozen=True)

  name: str = ""
  num_jobs: int = Field(ge=1)
  num_machines: int = Field(ge=1)
  operations: list[list[tuple[int, int]]]  # per job, ordered (machine, time)

  @model_validator(mode="after")
  def _check_routes(self) -> "JsspInstance":
    if len(self.operations) != self.num_jobs:
      raise ValueError(f"expected {self.num_jobs} jobs, got {len(self.operations)}")
    for j, route in enumerate(self.operations):
      machines = sorted(m for m, _ in route)
      if machines != list(range(self.num_machines)):
        raise ValueError(f"job {j} must visit each of {self.num_machines} machines once")
      if any(t <= 0 for _, t in route):
        raise ValueError(f"job {j} has a non-positive processing time")
    return self


class TspInstance(BaseModel):
  """Cities as 2-D coordinates or an explicit distance matrix."""
  model_config = ConfigDict(frozen=True)

  name: str = ""
  comment: str = ""
  coordinates: Optional[list[tuple[float, float]]] = None
  distances: Optional[list[list[float]]] = None
  rounded: bool = False  # TSPLIB EUC_2D nearest-integer convention

  @model_validator(mode="after")
  def _check_source(self) -> "TspInstance":
    if (self.coordinates is None) == (self.distances is None):
      raise ValueError("exactly one of coordinates or distances is required")
    if self.coordinates is not None and not self.coordinates:
      raise ValueError("at least one city is required")
    if self.distances is not None:
      n = len(self.distances)
      if n == 0 or any(len(row) != n for row in self.distances):
        raise ValueError("distance matrix must be square and non-empty")
      for i in range(n):
        if self.distances[i][i] != 0:
          raise ValueError(f"distance from city {i} to itself must be 0")
        for j in range(i + 1, n):
          d = self.distances[i][j]
          if d < 0 or d != self.distances[j][i]:
            raise ValueError(f"distance {i}-{j} must be symmetric and non-negative")
    return self

  @property
  def num_cities(self) -> int:
    if self.coordinates is not None:
      return len(self.coordinates)
    return len(self.distances or [])


class QmkpInstance(BaseModel):
  """Quadratic knapsack data split across K knapsacks.

  `capacity` is the single capacity declared by the QKP file; each of the
  `num_knapsacks` knapsacks gets an even share, remainder to the lowest
  indices. `pair_profits[i]` holds p_ij for j > i.
  """
  model_config = ConfigDict(frozen=True)

  name: str = ""
  weights: list[int]
  profits: list[int]
  pair_profits: list[list[int]]
  capacity: int = Field(ge=1)
  num_knapsacks: int = Field(3, ge=1)

  @model_validator(mode="after")
  def _check_shapes(self) -> "QmkpInstance":
    n = len(self.weights)
    if n == 0:
      raise ValueError("at least one object is required")
    if len(self.profits) != n:
      raise ValueError(f"expected {n} linear profits, got {len(self.profits)}")
    if len(self.pair_profits) != n - 1 and not (n == 1 and not self.pair_profits):
      raise ValueError(f"expected {n - 1} quadratic rows, got {len(self.pair_profits)}")
    for i, row in enumerate(self.pair_profits):
      if len(row) != n - 1 - i:
        raise ValueError(f"quadratic row {i} must hold {n - 1 - i} values")
      if any(v < 0 for v in row):
        raise ValueError(f"quadratic row {i} has a negative profit")
    if any(w <= 0 for w in self.weights):
      raise ValueError("weights must be positive")
    if any(p < 0 for p in self.profits):
      raise ValueError("profits must be non-negative")
    if self.capacity < self.num_knapsacks:
      raise ValueError(f"capacity {self.capacity} cannot be split across {self.num_knapsacks} knapsacks")
    return self

  @property
  def num_objects(self) -> int:
    return len(self.weights)

  @property
  def capacities(self) -> list[int]:
    share, extra = divmod(self.capacity, self.num_knapsacks)
    return [share + (1 if k < extra else 0) for k in range(self.num_knapsacks)]


# -- configuration ---------------------------------------------------------


class OperatorSet(BaseModel):
  """Selection, crossover and mutation settings for one island."""
  model_config = ConfigDict(frozen=True, extra="forbid")

  crossover: CrossoverKind = CrossoverKind.ORDER
  mutation: MutationKind = MutationKind.INVERSION
  crossover_rate: float = Field(0.8, ge=0.0, le=1.0)
  mutation_rate: float = Field(0.2, ge=0.0, le=1.0)
  tournament_size: int = Field(3, ge=2, le=7)

  def compatible_with(self, encoding: Encoding) -> Optional[str]:
    """None when usable with `encoding`, else the reason it is not."""
    if encoding is Encoding.ASSIGNMENT:
      if self.crossover is not CrossoverKind.UNIFORM:
        return f"{self.crossover.value} needs an order-based encoding"
      if self.mutation is not MutationKind.REASSIGN:
        return f"{self.mutation.value} needs an order-based encoding"
      return None
    if self.crossover is CrossoverKind.UNIFORM or self.mutation is MutationKind.REASSIGN:
      return "uniform_crossover and reassign apply to assignment encodings only"
    if encoding is Encoding.REPETITION and self.crossover is CrossoverKind.PMX:
      return "partially_mapped_crossover assumes distinct genes"
    return None


class GeneratorSpec(BaseModel):
  """Seeded synthetic instance. `size` is cities, objects or jobs."""
  model_config = ConfigDict(extra="forbid")

  size: int = Field(ge=1)
  seed: int = 0
  density: float = Field(0.5, gt=0.0, le=1.0)  # qmkp only
  machines: int = Field(5, ge=1)  # jssp only


class ProblemConfig(BaseModel):
  model_config = ConfigDict(extra="forbid")

  kind: ProblemKind
  instance: Optional[Path] = None
  generator: Optional[GeneratorSpec] = None
  knapsacks: int = Field(3, ge=1)

  @model_validator(mode="after")
  def _one_source(self) -> "ProblemConfig":
    if (self.instance is None) == (self.generator is None):
      raise ValueError("set exactly one of 'instance' or 'generator'")
    return self


class MigrationPolicy(BaseModel):
  """When and how many individuals move between islands."""
  model_config = ConfigDict(extra="forbid")

  interval: int = Field(50, ge=1)
  fraction: float = Field(0.05, gt=0.0, le=1.0)
  replacement: Literal["replace_worst"] = "replace_worst"

  def migrants(self, capacity: int) -> int:
    """ceil(fraction * capacity), immune to float noise like 0.05 * 200."""
    return max(1, math.ceil(self.fraction * capacity - 1e-9))


class RunConfig(BaseModel):
  """Everything needed to reproduce a run or a model comparison."""
  model_config = ConfigDict(extra="forbid")

  problem: ProblemConfig
  model: ModelKind = ModelKind.DIMSP
  models: list[ModelKind] = Field(default_factory=list)
  num_islands: int = Field(10, ge=1)
  k_max: int = Field(10, ge=1)
  island_capacity: int = Field(200, ge=2)
  max_generations: int = Field(2000, ge=1)
  migration: MigrationPolicy = Field(default_factory=MigrationPolicy)
  epoch_interval: Optional[int] = Field(None, ge=1)
  operators: list[OperatorSet] = Field(default_factory=list)
  seeds: list[int] = Field(default_factory=lambda: list(range(10)), min_length=1)
  similarity: SimilarityKind = SimilarityKind.HAMMING
  eigensolver: EigenSolver = EigenSolver.AUTO
  top_n: int = Field(5, ge=1)
  island_workers: int = Field(1, ge=1)  # threads evolving islands of one run; results are unchanged

  @property
  def effective_epoch_interval(self) -> int:
    return self.epoch_interval or self.migration.interval

  def fingerprint(self) -> str:
    """Stable hash of everything that can change a result, seeds and model choice aside."""
    payload = self.model_dump_json(exclude={"seeds", "model", "models", "island_workers"})
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


# -- results ---------------------------------------------------------------


class TraceRecord(BaseModel):
  generation: int = Field(ge=0)
  num_islands: int = Field(ge=1)
  island_sizes: list[int] = Field(default_factory=list)
  best_score: float
  avg_score: float
  diversity: float = Field(ge=0.0, le=1.0)


class Solution(BaseModel):
  fitness: float
  genome: list[int]


class Lineage(BaseModel):
  seed: int
  path: list[int] = Field(default_factory=list)


class RunTrace(BaseModel):
  """Per-generation records of one run plus its final report."""
  model: ModelKind
  problem: str
  seed: int
  direction: Direction
  lineage: Lineage
  config_fingerprint: str = ""
  records: list[TraceRecord] = Field(default_factory=list)
  top: list[Solution] = Field(default_factory=list)

  @property
  def final(self) -> TraceRecord:
    return self.records[-1]


class SummaryRow(BaseModel):
  model: str
  problem: str
  avg_score: float
  best_score: float
  diversity: float
