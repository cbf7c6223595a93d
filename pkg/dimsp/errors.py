"""Exception hierarchy shared by the library and the CLI."""

from pathlib import Path
from typing import Optional


class DimspError(Exception):
  """Base class for every error raised by the package."""


class ConfigError(DimspError, ValueError):
  """Invalid run configuration. `key` names the offending setting."""

  def __init__(self, message: str, key: str = "") -> None:
    self.key = key
    self.message = message
    super().__init__(f"{key}: {message}" if key else message)

  def __reduce__(self):
    return type(self), (self.message, self.key)


class ParseError(DimspError, ValueError):
  """Malformed instance file."""

  def __init__(self, message: str, line: int, path: Optional[Path] = None) -> None:
    self.line = line
    self.path = path
    self.message = message
    where = f"{path}:{line}" if path else f"line {line}"
    super().__init__(f"{where}: {message}")

  def __reduce__(self):
    return type(self), (self.message, self.line, self.path)


class UnsupportedEdgeWeightType(ParseError):
  """TSPLIB file with an edge weight type other than EUC_2D."""


class InvalidGenome(DimspError, ValueError):
  pass


class LengthMismatch(DimspError, ValueError):
  pass


class EmptyPopulation(DimspError, ValueError):
  pass


class EmptyPool(DimspError, ValueError):
  pass


class PopulationTooSmall(DimspError, ValueError):
  pass


class ConvergenceFailure(DimspError, ArithmeticError):
  pass


class ZeroDegree(DimspError, ArithmeticError):
  pass


class SpaceTooLarge(DimspError):
  """Search space exceeds the brute-force guard rail."""


class MismatchedConfigs(DimspError, ValueError):
  pass
