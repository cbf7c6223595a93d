import numpy as np
import pytest

from dimsp.errors import ConvergenceFailure, ZeroDegree
from dimsp.models import EigenSolver
from dimsp.rngdet import RngStream
from dimsp.spectral import (
  choose_k,
  cluster,
  jacobi_eigh,
  kmeans,
  normalized_laplacian,
  smallest_eigenpairs,
)


def _block_matrix(sizes, order=None):
  """0/1 similarity matrix of species with the given sizes, optionally permuted."""
  labels = np.repeat(np.arange(len(sizes)), sizes)
  if order is not None:
    labels = labels[order]
  return (labels[:, None] == labels[None, :]).astype(float), labels


def _same_partition(a, b):
  pairs_a = np.asarray(a)[:, None] == np.asarray(a)[None, :]
  pairs_b = np.asarray(b)[:, None] == np.asarray(b)[None, :]
  return bool(np.array_equal(pairs_a, pairs_b))


def test_laplacian_examples():
  assert normalized_laplacian(np.array([[1.0]])).tolist() == [[0.0]]
  lap = normalized_laplacian(np.ones((2, 2)))
  np.testing.assert_allclose(lap, [[0.5, -0.5], [-0.5, 0.5]], atol=1e-15)
  values, _ = smallest_eigenpairs(lap, 2)
  np.testing.assert_allclose(values, [0.0, 1.0], atol=1e-12)


def test_laplacian_zero_degree():
  with pytest.raises(ZeroDegree):
    normalized_laplacian(np.zeros((2, 2)))


def test_block_diagonal_zero_multiplicity():
  w, _ = _block_matrix([3, 2, 4])
  values, _ = smallest_eigenpairs(normalized_laplacian(w), 9, EigenSolver.JACOBI)
  assert int(np.sum(np.abs(values) < 1e-6)) == 3


def test_eigenpairs_of_diagonal_matrix():
  values, vectors = smallest_eigenpairs(np.diag([0.0, 1.0, 2.0]), 2, EigenSolver.JACOBI)
  np.testing.assert_allclose(values, [0.0, 1.0])
  np.testing.assert_allclose(np.abs(vectors), [[1, 0], [0, 1], [0, 0]])


def test_eigenpairs_of_one_by_one():
  values, vectors = smallest_eigenpairs(np.array([[0.0]]), 1)
  assert values.tolist() == [0.0]
  assert vectors.tolist() == [[1.0]]


@pytest.mark.parametrize("method", [EigenSolver.JACOBI, EigenSolver.LAPACK])
def test_eigenpair_residuals(method):
  gen = RngStream(1).generator
  for n in (1, 2, 7, 20):
    a = gen.normal(size=(n, n))
    a = (a + a.T) / 2
    values, vectors = smallest_eigenpairs(a, n, method)
    assert np.all(np.diff(values) >= 0)
    residual = np.abs(a @ vectors - vectors * values).max()
    assert residual <= 1e-7 * n
    np.testing.assert_allclose(vectors.T @ vectors, np.eye(n), atol=1e-7)


@pytest.mark.slow
def test_eigensolver_on_random_matrices():
  gen = RngStream(2).generator
  for trial in range(100):
    n = int(gen.integers(2, 51))
    a = gen.normal(size=(n, n))
    a = (a + a.T) / 2
    values, vectors = smallest_eigenpairs(a, n, EigenSolver.JACOBI)
    assert np.abs(a @ vectors - vectors * values).max() <= 1e-7 * n
    gram = vectors.T @ vectors - np.eye(n)
    assert np.abs(gram).max() <= 1e-7
    w = np.abs(a) / np.abs(a).max()
    np.fill_diagonal(w, 1.0)
    lap_values, _ = smallest_eigenpairs(normalized_laplacian(w), n)
    assert lap_values.min() >= -1e-8 and lap_values.max() <= 2 + 1e-8


def test_jacobi_matches_lapack():
  gen = RngStream(3).generator
  a = gen.normal(size=(12, 12))
  a = a + a.T
  jacobi, _ = smallest_eigenpairs(a, 12, EigenSolver.JACOBI)
  lapack, _ = smallest_eigenpairs(a, 12, EigenSolver.LAPACK)
  np.testing.assert_allclose(jacobi, lapack, atol=1e-9)


def test_jacobi_reports_non_convergence():
  a = np.array([[1.0, 2.0], [2.0, 1.0]])
  with pytest.raises(ConvergenceFailure):
    jacobi_eigh(a, max_sweeps=0)


def test_smallest_eigenpairs_rejects_bad_k():
  with pytest.raises(ValueError):
    smallest_eigenpairs(np.eye(3), 4)


def test_choose_k_examples():
  assert choose_k([0, 0, 0.9, 1.0], 10) == 2
  assert choose_k([0, 1], 10) == 1
  assert choose_k([0, 0, 0, 0.8, 0.9, 1.0], 2) == 2


def test_choose_k_ties_prefer_smaller_k():
  assert choose_k([0, 1, 2, 3], 10) == 1


def test_cluster_examples():
  single = cluster(np.array([[1.0]]), 10, RngStream(0))
  assert single.k == 1 and single.labels.tolist() == [0]

  w, _ = _block_matrix([2, 2])
  two = cluster(w, 10, RngStream(0))
  assert two.k == 2 and two.labels.tolist() == [0, 0, 1, 1]

  clones = cluster(np.ones((6, 6)), 10, RngStream(0))
  assert clones.k == 1 and clones.labels.tolist() == [0] * 6


def test_cluster_labels_are_canonical():
  w, _ = _block_matrix([3, 3], order=np.array([3, 0, 4, 1, 5, 2]))
  result = cluster(w, 10, RngStream(5))
  assert result.labels.tolist() == [0, 1, 0, 1, 0, 1]


def test_cluster_respects_k_max():
  w, _ = _block_matrix([2, 2, 2, 2])
  result = cluster(w, 2, RngStream(0))
  assert 1 <= result.k <= 2
  for label in range(result.k):
    assert len(result.members(label)) >= 2


def test_cluster_is_deterministic():
  gen = RngStream(9).generator
  w = gen.random((15, 15))
  w = (w + w.T) / 2
  np.fill_diagonal(w, 1.0)
  a = cluster(w, 5, RngStream(1))
  b = cluster(w, 5, RngStream(1))
  assert a.k == b.k
  assert a.labels.tolist() == b.labels.tolist()


def test_auto_above_the_jacobi_limit_matches_the_reference():
  gen = RngStream(6).generator
  w = gen.random((40, 40))
  w = (w + w.T) / 2
  np.fill_diagonal(w, 1.0)
  lap = normalized_laplacian(w)
  reference, _ = smallest_eigenpairs(lap, 11, EigenSolver.JACOBI)
  auto, _ = smallest_eigenpairs(lap, 11, EigenSolver.AUTO)
  np.testing.assert_allclose(auto, reference, atol=1e-9)

  blocks, truth = _block_matrix([12, 10, 18], order=gen.permutation(40))
  for method in (EigenSolver.JACOBI, EigenSolver.AUTO):
    result = cluster(blocks, 10, RngStream(2), method)
    assert result.k == 3
    assert _same_partition(result.labels, truth)


@pytest.mark.slow
def test_cluster_recovers_species():
  gen = RngStream(10).generator
  for trial in range(200):
    species = int(gen.integers(2, 6))
    total = int(gen.integers(20, 61))
    cuts = np.sort(gen.choice(np.arange(1, total // 2), size=species - 1, replace=False)) * 2
    sizes = np.diff(np.r_[0, cuts, total])
    assert sizes.min() >= 2  # cuts are distinct even numbers in [2, total - 2]
    w, truth = _block_matrix(sizes.tolist(), order=gen.permutation(total))
    result = cluster(w, 10, RngStream(trial))
    assert result.k == species
    assert _same_partition(result.labels, truth)


def test_kmeans_separates_obvious_groups():
  points = np.array([[0.0, 0.0], [0.1, 0.0], [10.0, 10.0], [10.1, 10.0]])
  labels, centroids = kmeans(points, 2, RngStream(0))
  assert labels[0] == labels[1] != labels[2] == labels[3]
  assert centroids.shape == (2, 2)
