"""Score and diversity measurement, and the per-model summary table."""

import math
from typing import Sequence

import numpy as np

from .errors import EmptyPopulation, MismatchedConfigs
from .genome import Direction, Individual, Population
from .models import RunTrace, SummaryRow, TraceRecord
from .similarity import match_fractions


def diversity(individuals: Sequence[Individual], best: Individual) -> float:
  """Mean of 1 - similarity between `best` and every other individual."""
  if not individuals:
    raise EmptyPopulation("diversity of an empty population")
  skip = next((i for i, ind in enumerate(individuals) if ind is best), None)
  if skip is None:
    skip = next((i for i, ind in enumerate(individuals) if ind.same_genome(best)), None)
  others = [ind.genome for i, ind in enumerate(individuals) if i != skip]
  if not others:
    return 0.0
  distance = 1.0 - match_fractions(np.stack(others), best.genome)
  return float(distance.mean())


def avg_score(individuals: Sequence[Individual]) -> float:
  if not individuals:
    raise EmptyPopulation("average score of an empty population")
  return math.fsum(ind.fitness for ind in individuals) / len(individuals)


def global_best(islands: Sequence[Population], direction: Direction) -> Individual:
  """Best individual across islands; ties go to the lowest island, then member index."""
  best = None
  for island in islands:
    if not island.size:
      continue
    candidate = island.best(direction)
    if best is None or direction.better(candidate.fitness, best.fitness):
      best = candidate
  if best is None:
    raise EmptyPopulation("no individuals on any island")
  return best


def top_individuals(individuals: Sequence[Individual], n: int, direction: Direction) -> list[Individual]:
  """Up to `n` best individuals with distinct genomes, best first."""
  fitness = np.array([ind.fitness for ind in individuals], dtype=np.float64)
  picked: list[Individual] = []
  seen: set[bytes] = set()
  for i in direction.rank(fitness):
    key = individuals[i].genome.tobytes()
    if key in seen:
      continue
    seen.add(key)
    picked.append(individuals[i])
    if len(picked) == n:
      break
  return picked


def final_record(trace: RunTrace) -> TraceRecord:
  return trace.final


def summarize(traces: Sequence[RunTrace]) -> list[SummaryRow]:
  """One row per (model, problem): mean final avg score, best final score, mean final diversity."""
  if not traces:
    raise ValueError("summarize needs at least one trace")
  fingerprints = {t.config_fingerprint for t in traces}
  if len(fingerprints) > 1:
    raise MismatchedConfigs(f"traces come from {len(fingerprints)} different configurations")

  groups: dict[tuple[str, str], list[RunTrace]] = {}
  for trace in traces:
    groups.setdefault((trace.model.value, trace.problem), []).append(trace)

  rows = []
  for (model, problem), group in groups.items():
    directions = {t.direction for t in group}
    if len(directions) > 1:
      raise MismatchedConfigs(f"{model}/{problem}: traces disagree on the optimization direction")
    direction = group[0].direction
    finals = [final_record(t) for t in group]
    rows.append(SummaryRow(
      model=model,
      problem=problem,
      avg_score=math.fsum(r.avg_score for r in finals) / len(finals),
      best_score=direction.best_of(r.best_score for r in finals),
      diversity=math.fsum(r.diversity for r in finals) / len(finals),
    ))
  return rows
