"""Instance file formats: OR-library JSSP, TSPLIB EUC_2D and Billionnet-Soutif QKP.

Parsers tolerate trailing whitespace, trailing blank lines and both LF and
CRLF line endings. Anything else out of place is a ParseError carrying the
1-based line number.
"""

import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np
from pydantic import ValidationError

from .errors import ParseError, UnsupportedEdgeWeightType
from .models import JsspInstance, ProblemKind, QmkpInstance, TspInstance
from .problems import Problem, build_problem
from .rngdet import RngStream

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class _Lines:
  """Right-stripped lines with 1-based positions; trailing blank lines dropped."""

  def __init__(self, text: str, path: Optional[Path]) -> None:
    self.path = path
    self.lines = [line.rstrip() for line in text.splitlines()]
    while self.lines and not self.lines[-1]:
      self.lines.pop()
    self.pos = 0

  @property
  def line_no(self) -> int:
    return self.pos + 1

  def error(self, message: str, line: Optional[int] = None, cls=ParseError) -> ParseError:
    return cls(message, line if line is not None else self.line_no, self.path)

  def done(self) -> bool:
    return self.pos >= len(self.lines)

  def peek(self) -> str:
    return self.lines[self.pos]

  def next(self, what: str) -> str:
    if self.done():
      raise self.error(f"unexpected end of file, expected {what}")
    line = self.lines[self.pos]
    self.pos += 1
    return line

  def ints(self, what: str, count: Optional[int] = None) -> list[int]:
    line = self.next(what)
    try:
      values = [int(tok) for tok in line.split()]
    except ValueError:
      raise self.error(f"expected integers for {what}", self.pos) from None
    if count is not None and len(values) != count:
      raise self.error(f"expected {count} values for {what}, got {len(values)}", self.pos)
    return values

  def expect_end(self) -> None:
    if not self.done():
      raise self.error("unexpected content after the end of the instance")


def _read(path: PathLike) -> tuple[str, Path]:
  path = Path(path)
  data = path.read_bytes()
  try:
    return data.decode("utf-8"), path
  except UnicodeDecodeError as e:
    line = data[:e.start].count(b"\n") + 1
    raise ParseError(f"invalid UTF-8 byte 0x{data[e.start]:02x}", line, path) from e


# -- JSSP -------------------------------------------------------------------


def parse_jssp(text: str, path: Optional[Path] = None, name: str = "") -> JsspInstance:
  """First line `J M`, then one line per job of M `(machine, time)` pairs."""
  lines = _Lines(text, path)
  header = lines.ints("'jobs machines' header", 2)
  num_jobs, num_machines = header
  if num_jobs < 1 or num_machines < 1:
    raise lines.error("job and machine counts must be positive", 1)
  operations = []
  for j in range(num_jobs):
    values = lines.ints(f"job {j}", 2 * num_machines)
    route = list(zip(values[0::2], values[1::2]))
    if sorted(m for m, _ in route) != list(range(num_machines)):
      raise lines.error(f"job {j} must visit machines 0..{num_machines - 1} exactly once", lines.pos)
    if any(t <= 0 for _, t in route):
      raise lines.error(f"job {j} has a non-positive processing time", lines.pos)
    operations.append(route)
  lines.expect_end()
  return JsspInstance(
    name=name or (path.stem if path else ""),
    num_jobs=num_jobs,
    num_machines=num_machines,
    operations=operations,
  )


def format_jssp(instance: JsspInstance) -> str:
  out = [f"{instance.num_jobs} {instance.num_machines}"]
  for route in instance.operations:
    out.append(" ".join(f"{m} {t}" for m, t in route))
  return "\n".join(out) + "\n"


# -- TSPLIB -----------------------------------------------------------------


def parse_tsplib(text: str, path: Optional[Path] = None) -> TspInstance:
  """TSPLIB TSP file with EUC_2D weights and a NODE_COORD_SECTION."""
  lines = _Lines(text, path)
  header: dict[str, str] = {}
  while True:
    line = lines.next("NODE_COORD_SECTION")
    if line.strip() == "NODE_COORD_SECTION":
      section_line = lines.pos
      break
    if ":" not in line:
      raise lines.error("expected 'KEY : VALUE' header line", lines.pos)
    key, value = (part.strip() for part in line.split(":", 1))
    header[key.upper()] = value
    if key.upper() == "EDGE_WEIGHT_TYPE" and value != "EUC_2D":
      raise lines.error(f"unsupported edge weight type {value!r}", lines.pos, UnsupportedEdgeWeightType)
    if key.upper() == "TYPE" and value != "TSP":
      raise lines.error(f"unsupported problem type {value!r}", lines.pos)

  if "EDGE_WEIGHT_TYPE" not in header:
    raise lines.error("missing EDGE_WEIGHT_TYPE", section_line)
  try:
    dimension = int(header.get("DIMENSION", ""))
  except ValueError:
    raise lines.error("missing or invalid DIMENSION", section_line) from None
  if dimension < 1:
    raise lines.error("DIMENSION must be positive", section_line)

  coordinates = []
  for i in range(1, dimension + 1):
    tokens = lines.next(f"coordinates of node {i}").split()
    try:
      if len(tokens) != 3 or int(tokens[0]) != i:
        raise ValueError
      coordinates.append((float(tokens[1]), float(tokens[2])))
    except ValueError:
      raise lines.error(f"expected '{i} x y'", lines.pos) from None
  if not lines.done() and lines.peek().strip() == "EOF":
    lines.next("EOF")
  lines.expect_end()
  return TspInstance(
    name=header.get("NAME", path.stem if path else ""),
    comment=header.get("COMMENT", ""),
    coordinates=coordinates,
    rounded=True,
  )


def _number(value: float) -> str:
  return str(int(value)) if float(value).is_integer() else repr(float(value))


def format_tsplib(instance: TspInstance) -> str:
  if instance.coordinates is None:
    raise ValueError("only coordinate instances can be written as TSPLIB EUC_2D")
  out = [f"NAME : {instance.name or 'unnamed'}"]
  if instance.comment:
    out.append(f"COMMENT : {instance.comment}")
  out += [
    "TYPE : TSP",
    f"DIMENSION : {instance.num_cities}",
    "EDGE_WEIGHT_TYPE : EUC_2D",
    "NODE_COORD_SECTION",
  ]
  for i, (x, y) in enumerate(instance.coordinates, start=1):
    out.append(f"{i} {_number(x)} {_number(y)}")
  out.append("EOF")
  return "\n".join(out) + "\n"


# -- QKP --------------------------------------------------------------------


def parse_qkp(text: str, path: Optional[Path] = None, knapsacks: int = 3) -> QmkpInstance:
  """Billionnet-Soutif layout.

  name / n / n linear profits / n-1 rows of the upper-triangular quadratic
  profits / blank line / constraint type 0 / capacity / n weights.
  """
  lines = _Lines(text, path)
  name = lines.next("instance name").strip()
  if not name:
    raise lines.error("instance name must not be empty", 1)
  (n,) = lines.ints("object count", 1)
  if n < 1:
    raise lines.error("object count must be positive", lines.pos)
  profits = lines.ints("linear profits", n)
  pair_profits = [lines.ints(f"quadratic row {i}", n - 1 - i) for i in range(n - 1)]
  if not lines.done() and not lines.peek().strip():
    lines.next("blank separator")
  (constraint,) = lines.ints("constraint type", 1)
  if constraint != 0:
    raise lines.error("only '<=' constraints (type 0) are supported", lines.pos)
  (capacity,) = lines.ints("capacity", 1)
  weights = lines.ints("weights", n)
  lines.expect_end()
  try:
    return QmkpInstance(
      name=name,
      weights=weights,
      profits=profits,
      pair_profits=pair_profits,
      capacity=capacity,
      num_knapsacks=knapsacks,
    )
  except ValidationError as e:
    raise lines.error(e.errors()[0]["msg"], lines.pos) from None


def format_qkp(instance: QmkpInstance) -> str:
  out = [instance.name or "unnamed", str(instance.num_objects)]
  out.append(" ".join(map(str, instance.profits)))
  out += [" ".join(map(str, row)) for row in instance.pair_profits]
  out += ["", "0", str(instance.capacity), " ".join(map(str, instance.weights))]
  return "\n".join(out) + "\n"


# -- dispatch ---------------------------------------------------------------


def parse_instance(path: PathLike, kind: ProblemKind, knapsacks: int = 3) -> Problem:
  """Parse an instance file of the given kind into a ready-to-run problem."""
  text, path = _read(path)
  kind = ProblemKind(kind)
  if kind is ProblemKind.JSSP:
    instance = parse_jssp(text, path)
  elif kind is ProblemKind.TSP:
    instance = parse_tsplib(text, path)
  else:
    instance = parse_qkp(text, path, knapsacks)
  logger.debug("parsed %s instance %s", kind.value, instance.name)
  return build_problem(instance)


def format_instance(instance) -> str:
  if isinstance(instance, Problem):
    instance = instance.instance
  if isinstance(instance, JsspInstance):
    return format_jssp(instance)
  if isinstance(instance, TspInstance):
    return format_tsplib(instance)
  if isinstance(instance, QmkpInstance):
    return format_qkp(instance)
  raise TypeError(f"not a problem instance: {type(instance).__name__}")


# -- generators -------------------------------------------------------------


def generate_tsp(size: int, seed: int = 0, extent: int = 1000) -> TspInstance:
  """Integer cities uniform in an `extent` square, TSPLIB EUC_2D rounding."""
  rng = RngStream.from_seed(seed)
  xy = rng.integers(0, extent, size=(size, 2))
  return TspInstance(
    name=f"synthetic-tsp{size}-s{seed}",
    comment="synthetic stand-in",
    coordinates=[(float(x), float(y)) for x, y in xy],
    rounded=True,
  )


def generate_qkp(size: int, density: float = 0.5, seed: int = 0, knapsacks: int = 3) -> QmkpInstance:
  """QKP benchmark-family generator.

  Each profit coefficient is non-zero with probability `density` and then
  uniform in [1, 100]; weights uniform in [1, 50]; capacity uniform in
  [50, sum of weights].
  """
  rng = RngStream.from_seed(seed)
  def coefficients(count: int) -> np.ndarray:
    mask = rng.random(count) < density
    return np.where(mask, rng.integers(1, 101, size=count), 0)

  profits = coefficients(size)
  pair_profits = [coefficients(size - 1 - i).tolist() for i in range(size - 1)]
  weights = rng.integers(1, 51, size=size)
  total = int(weights.sum())
  capacity = int(rng.integers(min(50, total), total + 1))
  return QmkpInstance(
    name=f"r_{size}_{round(density * 100)}_{seed}",
    weights=weights.tolist(),
    profits=profits.tolist(),
    pair_profits=pair_profits,
    capacity=max(capacity, knapsacks),
    num_knapsacks=knapsacks,
  )


def generate_jssp(jobs: int, machines: int = 5, seed: int = 0) -> JsspInstance:
  """Random machine routes and processing times in [1, 99]."""
  rng = RngStream.from_seed(seed)
  operations = []
  for _ in range(jobs):
    route = rng.permutation(machines)
    times = rng.integers(1, 100, size=machines)
    operations.append([(int(m), int(t)) for m, t in zip(route, times)])
  return JsspInstance(
    name=f"synthetic-jssp{jobs}x{machines}-s{seed}",
    num_jobs=jobs,
    num_machines=machines,
    operations=operations,
  )
