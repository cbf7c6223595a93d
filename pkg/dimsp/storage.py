"""File storage: run configs, instances, per-generation traces and summaries."""

import csv
import io
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Iterable, Optional, Union

from pydantic import ValidationError

from .errors import ConfigError, ParseError
from .instances import generate_jssp, generate_qkp, generate_tsp, parse_instance
from .models import ProblemKind, RunConfig, RunTrace, SummaryRow
from .problems import Problem, build_problem

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

TRACE_COLUMNS = ["generation", "num_islands", "best_score", "avg_score", "diversity"]
SUMMARY_COLUMNS = ["model", "problem", "avg_score", "best_score", "diversity"]


def _dotted(location: tuple) -> str:
  return ".".join(str(part) for part in location) or "config"


def config_error(error: ValidationError) -> ConfigError:
  """First validation failure as a ConfigError naming its dotted key."""
  first = error.errors()[0]
  return ConfigError(first["msg"], key=_dotted(first["loc"]))


def parse_config(data: dict, base_dir: PathLike = ".") -> RunConfig:
  try:
    config = RunConfig.model_validate(data)
  except ValidationError as e:
    raise config_error(e) from e
  instance = config.problem.instance
  if instance is not None and not instance.is_absolute():
    problem = config.problem.model_copy(update={"instance": Path(base_dir) / instance})
    config = config.model_copy(update={"problem": problem})
  return config


def load_config(path: PathLike, overrides: Optional[dict] = None) -> RunConfig:
  """Load a JSON run config; relative instance paths resolve next to the file.

  `overrides` replace top-level keys before validation, so flag values are
  checked exactly like file values.
  """
  path = Path(path)
  try:
    with open(path, "r") as f:
      data = json.load(f)
  except FileNotFoundError as e:
    raise ConfigError(f"no such file: {path}", key="config") from e
  except json.JSONDecodeError as e:
    raise ParseError(e.msg, e.lineno, path) from e
  if not isinstance(data, dict):
    raise ConfigError("top level must be a JSON object", key="config")
  data.update(overrides or {})
  return parse_config(data, path.parent)


def build_problem_from_config(config: RunConfig) -> Problem:
  """Parse the configured instance file or generate the configured instance."""
  source = config.problem
  if source.instance is not None:
    try:
      return parse_instance(source.instance, source.kind, source.knapsacks)
    except FileNotFoundError as e:
      raise ConfigError(f"no such instance file: {source.instance}", key="problem.instance") from e
  gen = source.generator
  if source.kind is ProblemKind.TSP:
    instance = generate_tsp(gen.size, gen.seed)
  elif source.kind is ProblemKind.JSSP:
    instance = generate_jssp(gen.size, gen.machines, gen.seed)
  else:
    instance = generate_qkp(gen.size, gen.density, gen.seed, source.knapsacks)
  return build_problem(instance)


def write_atomic(path: PathLike, text: str) -> Path:
  """Write through a temp file in the same directory, then rename over `path`."""
  path = Path(path)
  path.parent.mkdir(parents=True, exist_ok=True)
  fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
  try:
    with os.fdopen(fd, "w", newline="") as f:
      f.write(text)
    os.replace(tmp, path)
  except BaseException:
    Path(tmp).unlink(missing_ok=True)
    raise
  return path


def _number(value: float) -> str:
  return f"{value:.6f}"


def _csv(header: list[str], rows: Iterable[list[str]]) -> str:
  buffer = io.StringIO()
  writer = csv.writer(buffer, lineterminator="\n")
  writer.writerow(header)
  writer.writerows(rows)
  return buffer.getvalue()


def format_trace_csv(trace: RunTrace) -> str:
  return _csv(TRACE_COLUMNS, (
    [str(r.generation), str(r.num_islands), _number(r.best_score), _number(r.avg_score),
     _number(r.diversity)]
    for r in trace.records
  ))


def write_trace_csv(trace: RunTrace, path: PathLike) -> Path:
  return write_atomic(path, format_trace_csv(trace))


def write_trace_json(trace: RunTrace, path: PathLike) -> Path:
  """Sidecar with lineage, config fingerprint and top solutions; records stay in the CSV."""
  payload = trace.model_dump(mode="json", exclude={"records"})
  payload["generations"] = len(trace.records) - 1
  return write_atomic(path, json.dumps(payload, indent=2) + "\n")


def format_summary_csv(rows: Iterable[SummaryRow]) -> str:
  return _csv(SUMMARY_COLUMNS, (
    [r.model, r.problem, _number(r.avg_score), _number(r.best_score), _number(r.diversity)]
    for r in rows
  ))


def write_summary_csv(rows: Iterable[SummaryRow], path: PathLike) -> Path:
  return write_atomic(path, format_summary_csv(rows))


def read_summary_csv(path: PathLike) -> list[SummaryRow]:
  path = Path(path)
  with open(path, "r", newline="") as f:
    reader = csv.DictReader(f)
    if reader.fieldnames != SUMMARY_COLUMNS:
      raise ParseError(f"expected header {','.join(SUMMARY_COLUMNS)}", 1, path)
    rows = []
    for row in reader:
      try:
        rows.append(SummaryRow.model_validate(row))
      except ValidationError as e:
        raise ParseError(e.errors()[0]["msg"], reader.line_num, path) from e
  logger.debug("read %d summary rows from %s", len(rows), path)
  return rows
