import pytest

from dimsp.errors import ParseError, UnsupportedEdgeWeightType
from dimsp.instances import (
  format_instance,
  format_jssp,
  format_qkp,
  format_tsplib,
  generate_jssp,
  generate_qkp,
  generate_tsp,
  parse_instance,
  parse_jssp,
  parse_qkp,
  parse_tsplib,
)
from dimsp.models import ProblemKind
from dimsp.problems import JsspProblem, QmkpProblem, TspProblem

TSP_ONE_CITY = """NAME : one
TYPE : TSP
DIMENSION : 1
EDGE_WEIGHT_TYPE : EUC_2D
NODE_COORD_SECTION
1 5 7
EOF
"""

QKP_THREE = """three
3
4 0 9
2 5
1

0
10
3 4 5
"""


# -- bundled files ----------------------------------------------------------


def test_bundled_jssp(data_dir):
  problem = parse_instance(data_dir / "jssp_20x5.txt", ProblemKind.JSSP)
  assert isinstance(problem, JsspProblem)
  assert problem.instance.num_jobs == 20
  assert problem.instance.num_machines == 5
  assert problem.layout.length == 100


def test_bundled_tsp(data_dir):
  problem = parse_instance(data_dir / "tiny8.tsp", ProblemKind.TSP)
  assert isinstance(problem, TspProblem)
  assert problem.instance.num_cities == 8
  assert problem.instance.rounded
  assert problem.name == "tiny8"


def test_bundled_qkp(data_dir):
  problem = parse_instance(data_dir / "tiny10.qkp", ProblemKind.QMKP, knapsacks=2)
  assert isinstance(problem, QmkpProblem)
  assert problem.instance.num_objects == 10
  assert problem.instance.capacities == [30, 30]


@pytest.mark.parametrize("name,kind", [
  ("jssp_20x5.txt", ProblemKind.JSSP),
  ("jssp_3x3.txt", ProblemKind.JSSP),
  ("tiny8.tsp", ProblemKind.TSP),
  ("tiny10.qkp", ProblemKind.QMKP),
])
def test_bundled_files_round_trip(data_dir, name, kind):
  text = (data_dir / name).read_text()
  problem = parse_instance(data_dir / name, kind)
  assert format_instance(problem) == text


# -- round trips ------------------------------------------------------------


def test_one_city_tsplib():
  instance = parse_tsplib(TSP_ONE_CITY)
  assert instance.coordinates == [(5.0, 7.0)]
  assert format_tsplib(instance) == TSP_ONE_CITY


def test_three_object_qkp_round_trip():
  instance = parse_qkp(QKP_THREE)
  assert instance.profits == [4, 0, 9]
  assert instance.pair_profits == [[2, 5], [1]]
  assert instance.capacity == 10
  assert instance.weights == [3, 4, 5]
  assert format_qkp(instance) == QKP_THREE


def test_crlf_and_trailing_whitespace():
  text = "2 1  \r\n0 3\r\n0 5   \r\n\r\n"
  instance = parse_jssp(text)
  assert instance.operations == [[(0, 3)], [(0, 5)]]


def test_fractional_coordinates_round_trip():
  text = TSP_ONE_CITY.replace("1 5 7", "1 5.25 -7.5")
  instance = parse_tsplib(text)
  assert instance.coordinates == [(5.25, -7.5)]
  assert format_tsplib(instance) == text


@pytest.mark.parametrize("make", [
  lambda: generate_tsp(9, seed=3),
  lambda: generate_jssp(4, 3, seed=3),
  lambda: generate_qkp(7, 0.4, seed=3),
])
def test_generated_instances_round_trip(make):
  instance = make()
  text = format_instance(instance)
  kind = {"TspInstance": parse_tsplib, "JsspInstance": parse_jssp, "QmkpInstance": parse_qkp}
  again = kind[type(instance).__name__](text)
  assert format_instance(again) == text


def test_generators_are_seeded():
  assert generate_tsp(10, seed=1) == generate_tsp(10, seed=1)
  assert generate_tsp(10, seed=1) != generate_tsp(10, seed=2)
  assert generate_qkp(10, 0.5, seed=4) == generate_qkp(10, 0.5, seed=4)
  assert generate_jssp(3, 3, seed=5) == generate_jssp(3, 3, seed=5)


def test_format_jssp_layout():
  instance = generate_jssp(2, 2, seed=0)
  lines = format_jssp(instance).splitlines()
  assert lines[0] == "2 2"
  assert len(lines) == 3


# -- malformed input --------------------------------------------------------


@pytest.mark.parametrize("text,line", [
  ("2\n0 3\n0 5\n", 1),
  ("2 1\n0 3\n", 3),
  ("2 1\n0 3\n0 x\n", 3),
  ("2 2\n0 3 1 4\n0 3 0 4\n", 3),
  ("1 1\n0 3\n0 5\n", 3),
])
def test_jssp_parse_errors(text, line):
  with pytest.raises(ParseError) as info:
    parse_jssp(text)
  assert info.value.line == line


@pytest.mark.parametrize("text,line", [
  (TSP_ONE_CITY.replace("NAME : one", "NAME one"), 1),
  (TSP_ONE_CITY.replace("1 5 7", "2 5 7"), 6),
  (TSP_ONE_CITY.replace("DIMENSION : 1", "DIMENSION : one"), 5),
  (TSP_ONE_CITY.replace("TYPE : TSP", "TYPE : ATSP"), 2),
  (TSP_ONE_CITY.replace("EOF", "EOF\n2 1 1"), 8),
])
def test_tsplib_parse_errors(text, line):
  with pytest.raises(ParseError) as info:
    parse_tsplib(text)
  assert info.value.line == line


def test_tsplib_rejects_other_weight_types():
  text = TSP_ONE_CITY.replace("EUC_2D", "GEO")
  with pytest.raises(UnsupportedEdgeWeightType) as info:
    parse_tsplib(text)
  assert info.value.line == 4


@pytest.mark.parametrize("text,line", [
  (QKP_THREE.replace("three\n", "\n", 1), 1),
  (QKP_THREE.replace("4 0 9", "4 0"), 3),
  (QKP_THREE.replace("2 5\n", "2 5 6\n"), 4),
  (QKP_THREE.replace("\n0\n10\n", "\n1\n10\n"), 7),
  (QKP_THREE.replace("3 4 5", "3 4"), 9),
])
def test_qkp_parse_errors(text, line):
  with pytest.raises(ParseError) as info:
    parse_qkp(text)
  assert info.value.line == line


def test_parse_error_names_the_file(tmp_path):
  path = tmp_path / "broken.txt"
  path.write_text("2 1\n0 3\n")
  with pytest.raises(ParseError) as info:
    parse_instance(path, ProblemKind.JSSP)
  assert info.value.path == path
  assert str(path) in str(info.value)


def test_undecodable_bytes_are_a_parse_error(tmp_path):
  path = tmp_path / "latin.txt"
  path.write_bytes(b"2 1\n0 3\n0 \xff\n")
  with pytest.raises(ParseError) as info:
    parse_instance(path, ProblemKind.JSSP)
  assert info.value.line == 3
  assert info.value.path == path
