import numpy as np
import pytest

from dimsp.errors import EmptyPopulation, LengthMismatch
from dimsp.genome import Individual, make_genome
from dimsp.models import SimilarityKind
from dimsp.rngdet import RngStream
from dimsp.similarity import build_matrix, edge_similarity, gene_match, match_fractions, similarity


def _ind(genome, fitness=0.0):
  return Individual(make_genome(genome), fitness)


def test_gene_match_examples():
  x, y = make_genome([1, 2, 3]), make_genome([1, 9, 3])
  assert gene_match(x, y, 0) == 1
  assert gene_match(x, y, 1) == 0
  assert all(gene_match(x, x, i) == 1 for i in range(3))
  with pytest.raises(IndexError):
    gene_match(x, y, 3)
  with pytest.raises(LengthMismatch):
    gene_match(x, make_genome([1, 2]), 0)


def test_similarity_examples():
  assert similarity(make_genome([1, 2, 3]), make_genome([1, 2, 3])) == 1.0
  assert similarity(make_genome([1, 2, 3]), make_genome([3, 2, 1])) == pytest.approx(1 / 3)
  assert similarity(make_genome([0, 1]), make_genome([1, 0])) == 0.0
  with pytest.raises(LengthMismatch):
    similarity(make_genome([0, 1]), make_genome([0]))


def test_similarity_axioms():
  rng = RngStream(0).generator
  for _ in range(10_000):
    n = int(rng.integers(1, 12))
    x, y, z = (rng.integers(0, 4, size=n) for _ in range(3))
    sxy = similarity(x, y)
    assert sxy == similarity(y, x)
    assert similarity(x, x) == 1.0
    assert 0.0 <= sxy <= 1.0
    dxy, dyz, dxz = 1 - sxy, 1 - similarity(y, z), 1 - similarity(x, z)
    assert dxz <= dxy + dyz + 1e-12


def test_match_fractions_row_by_row():
  rng = RngStream(2)
  genomes = np.stack([rng.permutation(7) for _ in range(6)])
  target = rng.permutation(7)
  expected = [similarity(row, target) for row in genomes]
  assert match_fractions(genomes, target).tolist() == expected
  with pytest.raises(LengthMismatch):
    match_fractions(genomes, target[:5])


def test_build_matrix_small_cases():
  assert build_matrix([_ind([0, 1, 2])]).tolist() == [[1.0]]
  assert build_matrix([_ind([0, 1]), _ind([0, 1])]).tolist() == [[1.0, 1.0], [1.0, 1.0]]
  with pytest.raises(EmptyPopulation):
    build_matrix([])
  with pytest.raises(LengthMismatch):
    build_matrix([_ind([0, 1]), _ind([0, 1, 2])])


def test_build_matrix_matches_naive_double_loop():
  rng = RngStream(4)
  pop = [_ind(rng.permutation(9)) for _ in range(25)]
  w = build_matrix(pop)
  naive = np.array([[similarity(a.genome, b.genome) for b in pop] for a in pop])
  np.testing.assert_array_equal(w, naive)
  np.testing.assert_array_equal(w, w.T)
  assert np.all(np.diag(w) == 1.0)


def test_edge_similarity_ignores_rotation_and_direction():
  tour = make_genome([0, 1, 2, 3, 4])
  assert edge_similarity(tour, make_genome([2, 3, 4, 0, 1])) == 1.0
  assert edge_similarity(tour, make_genome([4, 3, 2, 1, 0])) == 1.0
  # shares edges 2-3 and 4-0 of the five
  assert edge_similarity(tour, make_genome([0, 2, 3, 1, 4])) == pytest.approx(0.4)


def test_edge_kernel_matrix():
  rng = RngStream(6)
  pop = [_ind(rng.permutation(7)) for _ in range(8)]
  w = build_matrix(pop, SimilarityKind.EDGE)
  assert np.all(np.diag(w) == 1.0)
  np.testing.assert_array_equal(w, w.T)
  assert w.min() >= 0.0 and w.max() <= 1.0


def test_fitness_kernel():
  pop = [_ind([0, 1], 10.0), _ind([1, 0], 20.0), _ind([0, 1], 15.0)]
  w = build_matrix(pop, SimilarityKind.FITNESS)
  np.testing.assert_allclose(w, [[1.0, 0.0, 0.5], [0.0, 1.0, 0.5], [0.5, 0.5, 1.0]])
  flat = build_matrix([_ind([0], 3.0), _ind([0], 3.0)], SimilarityKind.FITNESS)
  assert flat.tolist() == [[1.0, 1.0], [1.0, 1.0]]
