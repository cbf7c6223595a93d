"""Shared fixtures: tiny instances with hand-checked optima."""

from pathlib import Path

import pytest

from dimsp.models import JsspInstance, QmkpInstance, TspInstance
from dimsp.problems import build_problem
from dimsp.rngdet import RngStream

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture
def data_dir() -> Path:
  return DATA_DIR


@pytest.fixture
def rng() -> RngStream:
  return RngStream(12345)


@pytest.fixture
def square_tsp():
  """Four corners of a 10x10 square; optimal tour length 40."""
  return build_problem(TspInstance(
    name="square",
    coordinates=[(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0)],
  ))


@pytest.fixture
def jssp_2x2():
  """Optimal makespan 6, first reached by the sequence (0, 1, 0, 1)."""
  return build_problem(JsspInstance(
    name="two-by-two",
    num_jobs=2,
    num_machines=2,
    operations=[[(0, 3), (1, 2)], [(1, 4), (0, 1)]],
  ))


@pytest.fixture
def tiny_qmkp():
  """Three objects, two knapsacks of capacity 3; optimum 11 with (1, 2, 0)."""
  return build_problem(QmkpInstance(
    name="tiny",
    weights=[2, 3, 4],
    profits=[5, 6, 7],
    pair_profits=[[1, 2], [3]],
    capacity=6,
    num_knapsacks=2,
  ))
