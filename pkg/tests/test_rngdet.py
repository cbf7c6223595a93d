import numpy as np
import pytest

from dimsp.rngdet import RngStream, split


def test_equal_lineage_replays():
  a = split(RngStream(42), 0)
  b = split(RngStream(42), 0)
  assert a.lineage == b.lineage == (42, (0,))
  np.testing.assert_array_equal(a.raw64(100), b.raw64(100))


def test_child_ignores_parent_draws():
  parent = RngStream(7)
  before = parent.split(3).raw64(10)
  parent.raw64(1000)
  np.testing.assert_array_equal(parent.split(3).raw64(10), before)


def test_nested_paths():
  stream = RngStream(1).split(2).split(5)
  assert stream.lineage == (1, (2, 5))
  assert stream.split(0).lineage == (1, (2, 5, 0))


def test_sibling_streams_avalanche():
  a = split(RngStream(2026), 0).raw64(10_000)
  b = split(RngStream(2026), 1).raw64(10_000)
  differing = np.unpackbits((a ^ b).view(np.uint8)).mean()
  assert differing >= 0.45


def test_different_seeds_differ():
  assert not np.array_equal(RngStream(0).raw64(8), RngStream(1).raw64(8))


def test_negative_split_rejected():
  with pytest.raises(ValueError):
    RngStream(0).split(-1)


def test_large_and_negative_seeds_are_accepted():
  assert RngStream(-1).raw64(1).shape == (1,)
  assert RngStream(2**80).raw64(1).shape == (1,)


def test_wrappers_draw_in_range():
  rng = RngStream(3)
  assert 0 <= int(rng.integers(0, 5)) < 5
  assert sorted(rng.permutation(6).tolist()) == list(range(6))
  assert len(set(rng.choice(10, size=4, replace=False).tolist())) == 4
  assert 0.0 <= float(rng.random()) < 1.0
