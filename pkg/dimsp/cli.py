"""CLI interface for the dynamic island model experiments."""

import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import NoReturn, Optional

import typer
from rich import box
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from rich.table import Table

from . import storage
from .engine import run_configured
from .errors import ConfigError, DimspError, ParseError, SpaceTooLarge
from .instances import format_instance, generate_jssp, generate_qkp, generate_tsp, parse_instance
from .metrics import summarize
from .models import ModelKind, ProblemKind, RunConfig, RunTrace
from .problems import Problem, brute_force_optimum

app = typer.Typer(
  name="dimsp",
  help="Dynamic island model GA with spectral clustering, plus classic island baselines",
  no_args_is_help=True,
)
console = Console()
err_console = Console(stderr=True)
logger = logging.getLogger(__name__)

EXIT_INPUT = 1
EXIT_RUNTIME = 2


def _fail(message: str, code: int = EXIT_INPUT) -> NoReturn:
  err_console.print(f"[red]Error:[/red] {escape(message)}")
  raise typer.Exit(code)


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
  level = logging.ERROR if quiet else logging.DEBUG if verbose else logging.WARNING
  root = logging.getLogger("dimsp")
  for handler in list(root.handlers):
    root.removeHandler(handler)
  root.addHandler(RichHandler(console=err_console, show_path=False))
  root.setLevel(level)


@app.callback()
def main(
  verbose: bool = typer.Option(False, "--verbose", "-v", help="Log every generation and epoch"),
  quiet: bool = typer.Option(False, "--quiet", "-q", help="Only log errors"),
):
  """Run, compare and check island-model genetic algorithms."""
  configure_logging(verbose, quiet)


# -- config handling --------------------------------------------------------


def _parse_seeds(text: str) -> list[int]:
  try:
    seeds = [int(part) for part in text.split(",") if part.strip()]
  except ValueError:
    raise ConfigError(f"expected a comma-separated list of integers, got {text!r}", key="seeds")
  if not seeds:
    raise ConfigError("at least one seed is required", key="seeds")
  return seeds


def _load(config: Path, generations: Optional[int], capacity: Optional[int],
          seeds: Optional[str]) -> tuple[RunConfig, Problem]:
  overrides = {}
  if generations is not None:
    overrides["max_generations"] = generations
  if capacity is not None:
    overrides["island_capacity"] = capacity
  if seeds is not None:
    overrides["seeds"] = _parse_seeds(seeds)
  cfg = storage.load_config(config, overrides)
  return cfg, storage.build_problem_from_config(cfg)


def _check_cross_setting(cfg: RunConfig) -> None:
  """Reject knobs that the selected model would silently ignore."""
  if cfg.model.is_baseline and "k_max" in cfg.model_fields_set:
    raise ConfigError(f"{cfg.model.value} uses num_islands, not k_max", key="k_max")
  if cfg.model is ModelKind.DIMSP and "num_islands" in cfg.model_fields_set:
    raise ConfigError("dimsp sizes itself by clustering; set k_max instead", key="num_islands")


def _run_job(cfg: RunConfig, problem: Problem, model: ModelKind, seed: int) -> RunTrace:
  return run_configured(cfg, problem, model, seed)


def _execute(cfg: RunConfig, problem: Problem, jobs: list[tuple[ModelKind, int]],
             workers: int) -> list[RunTrace]:
  """Run every (model, seed) job; results come back in job order."""
  if workers <= 1 or len(jobs) == 1:
    traces = []
    with console.status("[bold green]Evolving...") as status:
      for model, seed in jobs:
        status.update(f"[bold green]Evolving {model.value} seed {seed}...")
        traces.append(_run_job(cfg, problem, model, seed))
    return traces
  with ProcessPoolExecutor(max_workers=workers) as pool:
    futures = [pool.submit(_run_job, cfg, problem, model, seed) for model, seed in jobs]
    with console.status(f"[bold green]Evolving {len(jobs)} runs on {workers} workers..."):
      return [future.result() for future in futures]


def _summary_table(rows, title: str) -> Table:
  table = Table(title=title, box=box.ROUNDED)
  table.add_column("Model", style="bold")
  table.add_column("Problem", style="cyan")
  table.add_column("Avg score", justify="right")
  table.add_column("Best score", justify="right", style="green")
  table.add_column("Diversity", justify="right")
  for row in rows:
    table.add_row(row.model, row.problem, f"{row.avg_score:,.3f}", f"{row.best_score:,.3f}",
                  f"{row.diversity:.3f}")
  return table


def _run_and_write(cfg: RunConfig, problem: Problem, models: list[ModelKind], jobs: int,
                   out: Path, tag_model: bool) -> None:
  work = [(model, seed) for model in models for seed in cfg.seeds]
  try:
    traces = _execute(cfg, problem, work, jobs)
    rows = summarize(traces)
  except (ConfigError, ParseError) as e:
    _fail(str(e))
  except DimspError as e:
    _fail(str(e), EXIT_RUNTIME)

  for trace in traces:
    stem = f"trace_{trace.model.value}_seed{trace.seed}" if tag_model else f"trace_seed{trace.seed}"
    storage.write_trace_csv(trace, out / f"{stem}.csv")
    storage.write_trace_json(trace, out / f"{stem}.json")
  summary = storage.write_summary_csv(rows, out / "summary.csv")

  console.print(_summary_table(rows, f"{problem.name} - {len(cfg.seeds)} seeds"))
  console.print(f"[green]Wrote[/green] {len(traces)} traces and {summary}")


# -- commands ---------------------------------------------------------------


@app.command()
def run(
  config: Path = typer.Option(..., "--config", "-c", help="JSON run configuration"),
  generations: Optional[int] = typer.Option(None, "--generations", help="Override max_generations"),
  capacity: Optional[int] = typer.Option(None, "--capacity", help="Override island_capacity"),
  seeds: Optional[str] = typer.Option(None, "--seeds", help="Comma-separated seeds"),
  jobs: int = typer.Option(1, "--jobs", "-j", min=1, help="Seeds to run in parallel"),
  out: Path = typer.Option(Path("out"), "--out", "-o", help="Output directory"),
):
  """Run one model once per seed; write trace_seed<k>.csv and summary.csv."""
  try:
    cfg, problem = _load(config, generations, capacity, seeds)
    _check_cross_setting(cfg)
  except (ConfigError, ParseError) as e:
    _fail(str(e))
  _run_and_write(cfg, problem, [cfg.model], jobs, out, tag_model=False)


@app.command()
def compare(
  config: Path = typer.Option(..., "--config", "-c", help="JSON run configuration"),
  models: Optional[str] = typer.Option(None, "--models", help="Comma-separated models, overrides the config"),
  generations: Optional[int] = typer.Option(None, "--generations", help="Override max_generations"),
  capacity: Optional[int] = typer.Option(None, "--capacity", help="Override island_capacity"),
  seeds: Optional[str] = typer.Option(None, "--seeds", help="Comma-separated seeds"),
  jobs: int = typer.Option(1, "--jobs", "-j", min=1, help="Runs to execute in parallel"),
  out: Path = typer.Option(Path("out"), "--out", "-o", help="Output directory"),
):
  """Run several models on the same problem, seeds and operators."""
  try:
    cfg, problem = _load(config, generations, capacity, seeds)
    chosen = cfg.models
    if models is not None:
      try:
        chosen = [ModelKind(m.strip()) for m in models.split(",") if m.strip()]
      except ValueError:
        raise ConfigError(f"unknown model in {models!r}", key="models")
    chosen = list(dict.fromkeys(chosen))
    if len(chosen) < 2:
      raise ConfigError("compare needs at least two distinct models", key="models")
  except (ConfigError, ParseError) as e:
    _fail(str(e))
  _run_and_write(cfg, problem, chosen, jobs, out, tag_model=True)


@app.command()
def oracle(
  instance: Path = typer.Argument(..., help="Instance file"),
  kind: ProblemKind = typer.Option(..., "--kind", "-k", help="Problem kind"),
  knapsacks: int = typer.Option(3, "--knapsacks", min=1, help="Knapsacks for qmkp"),
):
  """Exhaustively solve a tiny instance and print its optimum."""
  try:
    problem = parse_instance(instance, kind, knapsacks)
    fitness, genome = brute_force_optimum(problem)
  except FileNotFoundError:
    _fail(f"no such file: {instance}")
  except (ParseError, SpaceTooLarge) as e:
    _fail(str(e))
  console.print(f"[bold]{escape(problem.name)}[/bold] optimum: [green]{fitness:g}[/green]")
  console.print(f"  genome: [dim]{' '.join(map(str, genome.tolist()))}[/dim]")


@app.command(name="gen-instance")
def gen_instance(
  kind: ProblemKind = typer.Option(..., "--kind", "-k", help="Problem kind"),
  size: int = typer.Option(..., "--size", "-n", min=1, help="Cities, objects or jobs"),
  seed: int = typer.Option(0, "--seed", help="Generator seed"),
  density: float = typer.Option(0.5, "--density", min=0.0, max=1.0, help="Profit density (qmkp)"),
  machines: int = typer.Option(5, "--machines", min=1, help="Machines (jssp)"),
  knapsacks: int = typer.Option(3, "--knapsacks", min=1, help="Knapsacks (qmkp)"),
  out: Optional[Path] = typer.Option(None, "--out", "-o", help="Write here instead of stdout"),
):
  """Generate a seeded synthetic instance in its native file format."""
  if kind is ProblemKind.TSP:
    instance = generate_tsp(size, seed)
  elif kind is ProblemKind.JSSP:
    instance = generate_jssp(size, machines, seed)
  else:
    if density <= 0.0:
      _fail("density must be positive")
    instance = generate_qkp(size, density, seed, knapsacks)
  text = format_instance(instance)
  if out is None:
    typer.echo(text, nl=False)
    return
  storage.write_atomic(out, text)
  console.print(f"[green]Wrote[/green] {instance.name} to {out}")


@app.command()
def show(
  summary: Path = typer.Argument(..., help="summary.csv written by run or compare"),
):
  """Render a summary CSV as a table."""
  try:
    rows = storage.read_summary_csv(summary)
  except FileNotFoundError:
    _fail(f"no such file: {summary}")
  except ParseError as e:
    _fail(str(e))
  if not rows:
    console.print("[yellow]Summary is empty.[/yellow]")
    return
  console.print(_summary_table(rows, str(summary)))


if __name__ == "__main__":
  app()
