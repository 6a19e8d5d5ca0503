"""Command-line interface.

Usage:
    twistshear twist-explicit --a 1 --b 2 --N 1
    twistshear shear-weak --n 64 --emit csv --emit json --emit svg
    twistshear verify --suite all --seed 42

Exit status: 0 when every claim passes, 1 on a failed claim or solver
failure, 2 on a usage error (invalid flags, config file or parameters).
"""

import asyncio
import json
from collections.abc import Callable
from pathlib import Path
from typing import Any

import click
import logfire
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from twistshear import __version__
from twistshear.errors import ParameterRangeError
from twistshear.experiments.suite import run_experiment, run_suite
from twistshear.observability.setup import setup_observability
from twistshear.reporting.models import InvariantReport, RunConfig

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def _fmt(value: float | None) -> str:
    return "-" if value is None else f"{value:.3e}"


def render_report(report: InvariantReport, console: Console | None = None) -> None:
    """Print the claims of a report as a rich table."""
    console = console or Console()
    table = Table(title=f"{report.experiment} (seed {report.seed})")
    table.add_column("claim")
    table.add_column("anchor")
    table.add_column("value", justify="right")
    table.add_column("test")
    table.add_column("result")
    for claim in report.claims:
        test = "true" if claim.comparison == "true" else f"{claim.comparison} {claim.threshold:g}"
        table.add_row(
            claim.claim_id,
            claim.anchor,
            _fmt(claim.value),
            test,
            "[green]pass[/green]" if claim.passed else "[red]FAIL[/red]",
        )
    console.print(table)
    if report.error:
        console.print(f"[red]error:[/red] {report.error}")
    status = "[green]PASSED[/green]" if report.passed else "[red]FAILED[/red]"
    console.print(f"{report.experiment}: {status} ({len(report.failed())} failed)")


def run(config: RunConfig, console: Console | None = None) -> int:
    """Run the configured experiment (or suite), print its table, return the exit status."""
    try:
        if config.experiment == "verify":
            report = asyncio.run(run_suite(config))
        else:
            report = run_experiment(config)
    except ParameterRangeError as e:
        logfire.error("parameter out of range: {error}", error=str(e))
        (console or Console(stderr=True)).print(f"[red]usage error:[/red] {e}")
        return EXIT_USAGE

    render_report(report, console)
    return EXIT_OK if report.passed else EXIT_FAILED


def run_options(command: Callable[..., Any]) -> Callable[..., Any]:
    """Flags shared by every subcommand; unset flags fall through to --config."""
    options = [
        click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False,
                     path_type=Path), help="JSON file mirroring the flags"),
        click.option("--a", "a", type=float, help="Inner radius"),
        click.option("--b", "b", type=float, help="Outer radius"),
        click.option("--N", "winding", type=int, help="Winding number"),
        click.option("--n", "resolution", type=int, help="Shear grid resolution"),
        click.option("--penalty", type=click.Choice(["default", "negcontrol"]),
                     help="Jacobian penalty h0"),
        click.option("--tol", type=float, help="Solver tolerance override"),
        click.option("--out", type=click.Path(file_okay=False, path_type=Path),
                     help="Output directory"),
        click.option("--emit", type=click.Choice(["csv", "json", "svg"]), multiple=True,
                     help="Artifact kinds (repeatable)"),
        click.option("--seed", type=int, help="Seed for random batteries"),
        click.option("--battery", type=int, help="Perturbations per minimality battery"),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def _invoke(ctx: click.Context, experiment: str, config_file: Path | None, **flags: Any) -> None:
    overrides = {
        "experiment": experiment,
        "a": flags.pop("a"),
        "b": flags.pop("b"),
        "N": flags.pop("winding"),
        "n": flags.pop("resolution"),
        "emit": tuple(flags.pop("emit")) or None,
        **flags,
    }
    try:
        config = RunConfig.from_sources(config_file, overrides)
    except (ValidationError, json.JSONDecodeError) as e:
        Console(stderr=True).print(f"[red]invalid configuration:[/red]\n{e}")
        ctx.exit(EXIT_USAGE)
    logfire.info("resolved configuration", **config.summary())
    ctx.exit(run(config))


@click.group()
@click.version_option(__version__, prog_name="twistshear")
def main() -> None:
    """Twist and shear equilibria of planar nonlinear elasticity."""
    setup_observability()


@main.command("twist-explicit")
@run_options
@click.pass_context
def twist_explicit(ctx: click.Context, **flags: Any) -> None:
    """Explicit twist on the annulus (no Jacobian penalty)."""
    _invoke(ctx, "twist-explicit", **flags)


@main.command("twist-penalized")
@run_options
@click.pass_context
def twist_penalized(ctx: click.Context, **flags: Any) -> None:
    """Penalized twist on the annulus, solved by shooting."""
    _invoke(ctx, "twist-penalized", **flags)


@main.command("shear-weak")
@run_options
@click.pass_context
def shear_weak(ctx: click.Context, **flags: Any) -> None:
    """Constrained shear minimizer on the square."""
    _invoke(ctx, "shear-weak", **flags)


@main.command("shear-strong")
@run_options
@click.pass_context
def shear_strong(ctx: click.Context, **flags: Any) -> None:
    """Penalized shear with mixed boundary conditions."""
    _invoke(ctx, "shear-strong", **flags)


@main.command("verify")
@click.option("--suite", type=click.Choice(["all", "twist", "shear"]), default=None,
              help="Which experiments to run")
@run_options
@click.pass_context
def verify(ctx: click.Context, **flags: Any) -> None:
    """Run the default experiments concurrently and aggregate their verdicts."""
    _invoke(ctx, "verify", **flags)


if __name__ == "__main__":
    main()
