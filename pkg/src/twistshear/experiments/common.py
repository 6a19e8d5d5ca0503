"""Shared plumbing for the report builders."""

from collections.abc import Mapping
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import ArrayLike

from twistshear.reporting.emit import write_csv
from twistshear.reporting.models import InvariantReport, RunConfig
from twistshear.reporting.svg import AnnulusMap, emit_svg
from twistshear.shear.grid import ShearGridField


def new_report(config: RunConfig, experiment: str | None = None) -> InvariantReport:
    return InvariantReport(
        experiment=experiment or config.experiment,
        seed=config.seed,
        config=config.summary(),
    )


def rng_for(config: RunConfig, stream: int = 0) -> np.random.Generator:
    """Independent deterministic stream per use site."""
    return np.random.default_rng([config.seed, stream])


def emit_table(config: RunConfig, name: str, columns: Mapping[str, ArrayLike]) -> Path | None:
    """Write ``name``.csv when CSV output is enabled."""
    if "csv" not in config.emit:
        return None
    header = list(columns)
    rows = np.column_stack([np.asarray(columns[h], dtype=float).ravel() for h in header])
    return write_csv(config.out / f"{name}.csv", rows, header)


def emit_rows(config: RunConfig, name: str, rows: ArrayLike, header: list[str]) -> Path | None:
    if "csv" not in config.emit:
        return None
    return write_csv(config.out / f"{name}.csv", rows, header)


def emit_figure(config: RunConfig, name: str, artifact: AnnulusMap | ShearGridField) -> Path | None:
    """Write ``name``.svg when SVG output is enabled."""
    if "svg" not in config.emit:
        return None
    return emit_svg(artifact, config.out / f"{name}.svg")


def as_float(value: Any) -> float:
    return float(np.asarray(value))
