"""Normalized spectral clustering of a similarity matrix.

Pipeline: L = I - D^-1/2 W D^-1/2, smallest eigenpairs, eigengap choice of
k, row-normalized spectral embedding, k-means with k-means++ seeding, then
singleton clusters folded into their nearest neighbour and labels put in
first-occurrence order.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure, ZeroDegree
from .models import EigenSolver
from .rngdet import RngStream
from .similarity import SimilarityMatrix

logger = logging.getLogger(__name__)

JACOBI_TOLERANCE = 1e-10
JACOBI_MAX_SWEEPS = 100
AUTO_JACOBI_MAX_ORDER = 32
KMEANS_MAX_ITER = 200
_GAP_TIE = 1e-12


@dataclass(frozen=True)
class Clustering:
  k: int
  labels: np.ndarray  # one label in [0, k) per individual

  def members(self, label: int) -> np.ndarray:
    return np.flatnonzero(self.labels == label)


def normalized_laplacian(w: SimilarityMatrix) -> np.ndarray:
  w = np.asarray(w, dtype=np.float64)
  degree = w.sum(axis=1)
  if np.any(degree <= 0):
    raise ZeroDegree(f"node {int(np.argmin(degree))} has no positive degree")
  scale = 1.0 / np.sqrt(degree)
  laplacian = np.eye(len(w)) - scale[:, None] * w * scale[None, :]
  return (laplacian + laplacian.T) / 2.0


def jacobi_eigh(a: np.ndarray, tol: float = JACOBI_TOLERANCE,
                max_sweeps: int = JACOBI_MAX_SWEEPS) -> tuple[np.ndarray, np.ndarray]:
  """Cyclic Jacobi eigendecomposition of a symmetric matrix.

  Sweeps visit (p, q) pairs in row-major order. Returns unsorted
  eigenvalues and the matching eigenvectors as columns.
  """
  a = np.array(a, dtype=np.float64)
  n = len(a)
  v = np.eye(n)
  for sweep in range(max_sweeps):
    off = np.sqrt(2.0 * np.sum(np.triu(a, 1) ** 2))
    if off < tol:
      logger.debug("jacobi converged after %d sweeps (n=%d)", sweep, n)
      return np.diag(a).copy(), v
    for p in range(n - 1):
      for q in range(p + 1, n):
        apq = a[p, q]
        if abs(apq) < 1e-300:
          continue
        theta = (a[q, q] - a[p, p]) / (2.0 * apq)
        t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
        c = 1.0 / np.sqrt(t * t + 1.0)
        s = t * c
        rot = np.array([[c, s], [-s, c]])
        pq = [p, q]
        a[:, pq] = a[:, pq] @ rot
        a[pq, :] = rot.T @ a[pq, :]
        a[p, q] = a[q, p] = 0.0
        v[:, pq] = v[:, pq] @ rot
  raise ConvergenceFailure(f"jacobi did not reach off-diagonal norm {tol} in {max_sweeps} sweeps")


def _orient(vectors: np.ndarray) -> np.ndarray:
  """Flip each column so its largest-magnitude entry is positive."""
  if vectors.size == 0:
    return vectors
  lead = np.argmax(np.abs(vectors), axis=0)
  signs = np.sign(vectors[lead, np.arange(vectors.shape[1])])
  signs[signs == 0] = 1.0
  return vectors * signs


def smallest_eigenpairs(laplacian: np.ndarray, k: int,
                        method: EigenSolver = EigenSolver.AUTO) -> tuple[np.ndarray, np.ndarray]:
  """The k smallest eigenvalues (ascending) and their orthonormal eigenvectors."""
  n = len(laplacian)
  if not 1 <= k <= n:
    raise ValueError(f"k must lie in [1, {n}], got {k}")
  method = EigenSolver(method)
  if method is EigenSolver.AUTO:
    method = EigenSolver.JACOBI if n <= AUTO_JACOBI_MAX_ORDER else EigenSolver.LAPACK
  if method is EigenSolver.JACOBI:
    values, vectors = jacobi_eigh(laplacian)
  else:
    try:
      values, vectors = np.linalg.eigh(laplacian)
    except np.linalg.LinAlgError as e:
      raise ConvergenceFailure(str(e)) from e
  order = np.argsort(values, kind="stable")[:k]
  return values[order], _orient(vectors[:, order])


def choose_k(eigenvalues, k_max: int) -> int:
  """Eigengap heuristic: k at the largest gap between consecutive eigenvalues.

  Ties go to the smaller k; the result is capped at k_max.
  """
  values = np.asarray(eigenvalues, dtype=np.float64)
  if len(values) < 2:
    raise ValueError("need at least two eigenvalues to measure a gap")
  if k_max < 1:
    raise ValueError(f"k_max must be positive, got {k_max}")
  gaps = np.diff(values)
  k = int(np.flatnonzero(gaps >= gaps.max() - _GAP_TIE)[0]) + 1
  return min(k, k_max)


def kmeans_plusplus(points: np.ndarray, k: int, rng: RngStream) -> np.ndarray:
  n = len(points)
  chosen = [int(rng.integers(0, n))]
  closest = ((points - points[chosen[0]]) ** 2).sum(axis=1)
  for _ in range(1, k):
    total = closest.sum()
    if total > 0:
      nxt = int(rng.choice(n, p=closest / total))
    else:
      nxt = int(rng.integers(0, n))
    chosen.append(nxt)
    closest = np.minimum(closest, ((points - points[nxt]) ** 2).sum(axis=1))
  return points[chosen].copy()


def _distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
  return ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)


def kmeans(points: np.ndarray, k: int, rng: RngStream,
           max_iter: int = KMEANS_MAX_ITER) -> tuple[np.ndarray, np.ndarray]:
  """Lloyd iterations until assignments stop changing.

  Equidistant points go to the lower centroid index; a centroid that loses
  all its points keeps its position.
  """
  centroids = kmeans_plusplus(points, k, rng)
  labels = np.argmin(_distances(points, centroids), axis=1)
  for _ in range(max_iter):
    for j in range(k):
      mask = labels == j
      if mask.any():
        centroids[j] = points[mask].mean(axis=0)
    updated = np.argmin(_distances(points, centroids), axis=1)
    if np.array_equal(updated, labels):
      break
    labels = updated
  return labels, centroids


def _fold_singletons(points: np.ndarray, labels: np.ndarray) -> np.ndarray:
  labels = labels.copy()
  for label in np.unique(labels):
    members = np.flatnonzero(labels == label)
    others = [c for c in np.unique(labels) if c != label]
    if len(members) != 1 or not others:
      continue
    centroids = np.stack([points[labels == c].mean(axis=0) for c in others])
    nearest = int(np.argmin(_distances(points[members], centroids)[0]))
    labels[members] = others[nearest]
  return labels


def _canonical(labels: np.ndarray) -> np.ndarray:
  _, first = np.unique(labels, return_index=True)
  order = labels[np.sort(first)]
  remap = {int(old): new for new, old in enumerate(order)}
  return np.array([remap[int(x)] for x in labels], dtype=np.int64)


def cluster(w: SimilarityMatrix, k_max: int, rng: RngStream,
            method: EigenSolver = EigenSolver.AUTO) -> Clustering:
  """Partition the individuals behind W into at most k_max clusters."""
  n = len(w)
  if n == 1:
    return Clustering(1, np.zeros(1, dtype=np.int64))
  values, vectors = smallest_eigenpairs(normalized_laplacian(w), min(k_max + 1, n), method)
  k = choose_k(values, k_max)
  logger.debug("eigengap chose k=%d from %s", k, np.round(values, 6).tolist())

  embedding = vectors[:, :k]
  norms = np.linalg.norm(embedding, axis=1, keepdims=True)
  embedding = np.divide(embedding, norms, out=np.zeros_like(embedding), where=norms > 0)

  labels, _ = kmeans(embedding, k, rng)
  labels = _canonical(_fold_singletons(embedding, labels))
  return Clustering(int(labels.max()) + 1, labels)
