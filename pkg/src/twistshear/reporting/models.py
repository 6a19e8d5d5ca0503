"""Pydantic models for run configuration and invariant reports.

The JSON layout of InvariantReport is versioned by its "schema" field.
DO NOT rename fields without bumping REPORT_SCHEMA.
"""

import json
import math
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator, model_validator

REPORT_SCHEMA = 1

Experiment = Literal["twist-explicit", "twist-penalized", "shear-weak", "shear-strong", "verify"]
EmitKind = Literal["csv", "json", "svg"]
Comparison = Literal["<", "<=", ">", ">=", "true"]


class RunConfig(BaseModel):
    """Resolved configuration of one CLI run."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    experiment: Experiment = "verify"
    a: float = Field(default=1.0, gt=0, description="Inner radius")
    b: float = Field(default=2.0, gt=0, description="Outer radius")
    n: int = Field(default=64, description="Shear grid resolution (nodes per unit length)")
    N: int = Field(default=1, ge=0, description="Winding number")
    penalty: Literal["default", "negcontrol"] = "default"
    tol: float | None = Field(default=None, gt=0, description="Solver tolerance override")
    out: Path = Path("out")
    emit: tuple[EmitKind, ...] = ("csv", "json")
    seed: int = 42
    battery: int = Field(default=100, ge=1, description="Random perturbations per battery")
    suite: Literal["all", "twist", "shear"] = "all"

    @field_validator("n")
    @classmethod
    def validate_resolution(cls, v: int) -> int:
        if v < 16 or v % 2:
            raise ValueError(f"n must be even and >= 16, got {v}")
        return v

    @model_validator(mode="after")
    def validate_geometry(self) -> "RunConfig":
        if not self.a < self.b:
            raise ValueError(f"need 0 < a < b, got a={self.a}, b={self.b}")
        return self

    @classmethod
    def from_sources(
        cls, config_file: Path | None = None, overrides: dict[str, Any] | None = None
    ) -> "RunConfig":
        """Merge a JSON config file with explicit overrides; overrides win.

        ``None`` overrides are ignored so that unset CLI flags fall through.
        """
        data: dict[str, Any] = {}
        if config_file is not None:
            data.update(json.loads(Path(config_file).read_text(encoding="utf-8")))
        data.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return cls.model_validate(data)

    def for_experiment(
        self, experiment: Experiment, label: str | None = None, **update: Any
    ) -> "RunConfig":
        """Copy targeting one experiment with its own output subdirectory.

        The subdirectory is ``label`` when given, else the experiment name.
        """
        out = self.out / (label or experiment)
        return self.model_copy(update={**update, "experiment": experiment, "out": out})

    def summary(self) -> dict[str, Any]:
        """JSON-safe dump recorded in reports."""
        return self.model_dump(mode="json")


def _compare(value: float | None, threshold: float, op: Comparison) -> bool:
    if value is None:
        return False
    match op:
        case "<":
            return value < threshold
        case "<=":
            return value <= threshold
        case ">":
            return value > threshold
        case ">=":
            return value >= threshold
        case "true":
            return bool(value)
    return False


class ClaimResult(BaseModel):
    """One measured claim with its anchor and threshold."""

    claim_id: str
    anchor: str
    value: float | None
    threshold: float
    comparison: Comparison
    passed: bool

    @field_validator("value", mode="before")
    @classmethod
    def finite_or_none(cls, v: Any) -> float | None:
        if v is None:
            return None
        v = float(v)
        return v if math.isfinite(v) else None

    @classmethod
    def check(
        cls,
        claim_id: str,
        anchor: str,
        value: float | bool | None,
        threshold: float = 0.0,
        comparison: Comparison = "<=",
    ) -> "ClaimResult":
        """Build a claim and evaluate ``value <comparison> threshold``."""
        numeric = None if value is None else float(value)
        if numeric is not None and not math.isfinite(numeric):
            numeric = None
        return cls(
            claim_id=claim_id,
            anchor=anchor,
            value=numeric,
            threshold=threshold,
            comparison=comparison,
            passed=_compare(numeric, threshold, comparison),
        )


class InvariantReport(BaseModel):
    """Pass/fail record of every claim checked by one experiment."""

    model_config = ConfigDict(populate_by_name=True)

    schema_version: int = Field(default=REPORT_SCHEMA, alias="schema")
    experiment: str
    seed: int
    config: dict[str, Any] = Field(default_factory=dict)
    claims: list[ClaimResult] = Field(default_factory=list)
    tables: dict[str, list[dict[str, float | int | str | None]]] = Field(default_factory=dict)
    error: str | None = None

    @computed_field  # type: ignore[prop-decorator]
    @property
    def passed(self) -> bool:
        """Conjunction of all claims; False when the run errored or checked nothing."""
        return self.error is None and bool(self.claims) and all(c.passed for c in self.claims)

    def add(self, claim: ClaimResult) -> ClaimResult:
        """Append a claim; claim ids are unique within a report."""
        if any(c.claim_id == claim.claim_id for c in self.claims):
            raise ValueError(f"duplicate claim id {claim.claim_id!r}")
        self.claims.append(claim)
        return claim

    def check(self, *args: Any, **kwargs: Any) -> ClaimResult:
        """Shorthand for add(ClaimResult.check(...))."""
        return self.add(ClaimResult.check(*args, **kwargs))

    def failed(self) -> list[ClaimResult]:
        return [c for c in self.claims if not c.passed]

    def to_json_dict(self) -> dict[str, Any]:
        return self.model_dump(mode="json", by_alias=True)


def table_row(**values: Any) -> dict[str, float | int | str | None]:
    """Table entry with non-finite floats replaced by None."""
    row: dict[str, float | int | str | None] = {}
    for key, v in values.items():
        if isinstance(v, bool):
            row[key] = int(v)
        elif isinstance(v, int | str) or v is None:
            row[key] = v
        else:
            f = float(v)
            row[key] = f if math.isfinite(f) else None
    return row
