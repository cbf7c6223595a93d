"""Pairwise genome similarity and the similarity matrix W.

The default kernel is the per-position match indicator averaged over the
genome (normalized Hamming similarity). Two optional kernels share the
interface: shared undirected tour edges for permutations, and closeness
of fitness values.
"""

from typing import Sequence

import numpy as np

from .errors import EmptyPopulation, LengthMismatch
from .genome import Genome, Individual
from .models import SimilarityKind

SimilarityMatrix = np.ndarray  # dense, symmetric, unit diagonal, entries in [0, 1]


def _check_lengths(x: Genome, y: Genome) -> None:
  if len(x) != len(y):
    raise LengthMismatch(f"genome lengths differ: {len(x)} != {len(y)}")


def gene_match(x: Genome, y: Genome, i: int) -> int:
  _check_lengths(x, y)
  if not 0 <= i < len(x):
    raise IndexError(f"position {i} outside genome of length {len(x)}")
  return int(x[i] == y[i])


def match_fractions(genomes: np.ndarray, genome: Genome) -> np.ndarray:
  """similarity(row, genome) for every row of a genome matrix."""
  genomes = np.atleast_2d(np.asarray(genomes))
  _check_lengths(genomes[0], genome)
  return (genomes == np.asarray(genome)).mean(axis=1)


def similarity(x: Genome, y: Genome) -> float:
  """Fraction of positions where the genomes agree."""
  return float(match_fractions(x, y)[0])


def _edge_ids(genome: Genome) -> np.ndarray:
  tour = np.asarray(genome, dtype=np.int64)
  nxt = np.roll(tour, -1)
  lo, hi = np.minimum(tour, nxt), np.maximum(tour, nxt)
  return np.unique(lo * len(tour) + hi)


def edge_similarity(x: Genome, y: Genome) -> float:
  """Fraction of undirected tour edges the two closed tours share."""
  _check_lengths(x, y)
  ex, ey = _edge_ids(x), _edge_ids(y)
  return len(np.intersect1d(ex, ey, assume_unique=True)) / max(len(ex), len(ey))


def _hamming_matrix(genomes: np.ndarray) -> np.ndarray:
  n = len(genomes)
  w = np.empty((n, n), dtype=np.float64)
  for i in range(n):
    row = match_fractions(genomes[i:], genomes[i])
    w[i, i:] = row
    w[i:, i] = row
  return w


def _edge_matrix(genomes: np.ndarray) -> np.ndarray:
  n = len(genomes)
  edges = [_edge_ids(g) for g in genomes]
  w = np.empty((n, n), dtype=np.float64)
  for i in range(n):
    w[i, i] = 1.0
    for j in range(i + 1, n):
      shared = len(np.intersect1d(edges[i], edges[j], assume_unique=True))
      w[i, j] = w[j, i] = shared / max(len(edges[i]), len(edges[j]))
  return w


def _fitness_matrix(fitness: np.ndarray) -> np.ndarray:
  spread = float(fitness.max() - fitness.min())
  if spread == 0.0:
    return np.ones((len(fitness), len(fitness)))
  return 1.0 - np.abs(fitness[:, None] - fitness[None, :]) / spread


def build_matrix(pop: Sequence[Individual],
                 kind: SimilarityKind = SimilarityKind.HAMMING) -> SimilarityMatrix:
  """W[i][j] = similarity of members i and j; upper triangle computed, then mirrored."""
  members = list(pop)
  if not members:
    raise EmptyPopulation("cannot build a similarity matrix for no individuals")
  length = len(members[0].genome)
  if any(len(m.genome) != length for m in members):
    raise LengthMismatch("all genomes must share one length")
  if kind is SimilarityKind.FITNESS:
    return _fitness_matrix(np.array([m.fitness for m in members], dtype=np.float64))
  genomes = np.stack([m.genome for m in members])
  if kind is SimilarityKind.EDGE:
    return _edge_matrix(genomes)
  return _hamming_matrix(genomes)
