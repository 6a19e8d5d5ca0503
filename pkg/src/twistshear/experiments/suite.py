"""Experiment dispatch and the concurrent verification suite.

Each run owns its output directory, so the suite can fan runs out to worker
threads without coordinating writes.
"""

import asyncio
from collections.abc import Callable

import logfire

from twistshear.errors import ParameterRangeError, TwistShearError
from twistshear.experiments import shear_strong, shear_weak, twist_explicit, twist_penalized
from twistshear.experiments.common import new_report
from twistshear.reporting.emit import write_report
from twistshear.reporting.models import Experiment, InvariantReport, RunConfig, table_row

Builder = Callable[[RunConfig], InvariantReport]

BUILDERS: dict[str, Builder] = {
    "twist-explicit": twist_explicit.build_report,
    "twist-penalized": twist_penalized.build_report,
    "shear-weak": shear_weak.build_report,
    "shear-strong": shear_strong.build_report,
}

SUITE_WINDINGS = (1, 2, 3, 4, 5)
SUITE_PENALIZED_WINDINGS = (1, 2)


def run_experiment(config: RunConfig, label: str | None = None) -> InvariantReport:
    """Run one experiment and always leave ``report.json`` behind.

    Solver failures are recorded in the report's ``error`` field instead of
    propagating.

    Raises:
        ParameterRangeError: If the configuration is outside the admissible
            parameter range (a usage error, not a solver failure).
    """
    builder = BUILDERS[config.experiment]
    label = label or config.experiment
    config.out.mkdir(parents=True, exist_ok=True)

    with logfire.span("run {label}", label=label, seed=config.seed):
        try:
            report = builder(config)
        except ParameterRangeError:
            raise
        except TwistShearError as e:
            logfire.error("run {label} failed: {error}", label=label, error=str(e))
            report = new_report(config)
            report.error = f"{type(e).__name__}: {e}"

    write_report(config.out / "report.json", report)
    logfire.info(
        "run {label} finished",
        label=label,
        passed=report.passed,
        failed=len(report.failed()),
    )
    return report


def suite_runs(config: RunConfig) -> list[tuple[str, RunConfig]]:
    """Labelled configurations making up ``verify --suite``."""
    runs: list[tuple[str, RunConfig]] = []

    def add(label: str, experiment: Experiment, **update: object) -> None:
        runs.append((label, config.for_experiment(experiment, label, **update)))

    if config.suite in ("all", "twist"):
        for N in SUITE_WINDINGS:  # noqa: N806
            add(f"twist-explicit-N{N}", "twist-explicit", N=N)
        for N in SUITE_PENALIZED_WINDINGS:  # noqa: N806
            add(
                f"twist-penalized-N{N}",
                "twist-penalized",
                N=N,
                penalty="default",
            )
    if config.suite in ("all", "shear"):
        add("shear-weak", "shear-weak")
        add("shear-strong", "shear-strong", penalty="default")
        add("shear-strong-negcontrol", "shear-strong", penalty="negcontrol")
    return runs


async def run_suite(config: RunConfig) -> InvariantReport:
    """Run the suite concurrently and aggregate one claim per run.

    The aggregate report is written to ``config.out / "report.json"``; every
    run also writes its own report below its label.
    """
    runs = suite_runs(config)
    with logfire.span("verify suite={suite}", suite=config.suite, runs=len(runs)):
        reports = await asyncio.gather(
            *(asyncio.to_thread(run_experiment, cfg, label) for label, cfg in runs)
        )

    aggregate = new_report(config, "verify")
    for (label, _), report in zip(runs, reports, strict=True):
        aggregate.check(f"{label}.passed", f"every claim of {label} holds", report.passed,
                        comparison="true")
    aggregate.tables["runs"] = [
        table_row(
            run=label,
            experiment=report.experiment,
            claims=len(report.claims),
            failed=len(report.failed()),
            passed=report.passed,
            error=report.error,
        )
        for (label, _), report in zip(runs, reports, strict=True)
    ]

    config.out.mkdir(parents=True, exist_ok=True)
    write_report(config.out / "report.json", aggregate)
    return aggregate
