"""CSV and JSON writers with byte-stable output."""

import json
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import ArrayLike

from twistshear.reporting.models import InvariantReport

CSV_FORMAT = "%.12e"


def _write_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    return path


def canonical_json(obj: Any) -> str:
    """Sorted-key, indented JSON with a trailing newline."""
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False) + "\n"


def write_report(path: Path, report: InvariantReport) -> Path:
    """Write report.json."""
    return _write_text(path, canonical_json(report.to_json_dict()))


def write_csv(path: Path, rows: ArrayLike, header: Sequence[str]) -> Path:
    """Header row plus numeric rows, '.' decimal, comma separated.

    Raises:
        ValueError: If the column count does not match the header
    """
    data = np.atleast_2d(np.asarray(rows, dtype=float))
    if data.shape[1] != len(header):
        raise ValueError(f"{data.shape[1]} columns but {len(header)} header names")
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, data, fmt=CSV_FORMAT, delimiter=",", header=",".join(header), comments="")
    return path


def read_csv(path: Path) -> tuple[list[str], np.ndarray]:
    """Inverse of write_csv."""
    header = path.read_text(encoding="utf-8").splitlines()[0].split(",")
    return header, np.atleast_2d(np.loadtxt(path, delimiter=",", skiprows=1))
