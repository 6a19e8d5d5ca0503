"""Stage 5.3: Verification Suite Tests.

These tests verify the suite layout, the concurrent aggregate report, error
capture and byte-identical artifacts for a fixed seed.
Run with: uv run pytest tests/stage_5/test_suite.py -v
"""

import json
from pathlib import Path

import pytest

from twistshear.errors import NonlinearSolveError
from twistshear.experiments import suite
from twistshear.experiments.common import new_report
from twistshear.reporting.models import InvariantReport, RunConfig

pytestmark = pytest.mark.stage5


def _stub(config: RunConfig) -> InvariantReport:
    report = new_report(config)
    report.check("stub.ok", "stub claim", 0.0)
    report.tables["echo"] = [{"N": config.N, "penalty": config.penalty}]
    return report


@pytest.fixture
def stubbed(monkeypatch: pytest.MonkeyPatch) -> None:
    for name in list(suite.BUILDERS):
        monkeypatch.setitem(suite.BUILDERS, name, _stub)


class TestSuiteLayout:
    """Which runs make up each suite."""

    def test_all(self, tmp_path: Path) -> None:
        """Test five explicit windings, two penalized ones and three shear runs."""
        runs = suite.suite_runs(RunConfig(out=tmp_path))
        labels = [label for label, _ in runs]

        assert labels == [
            "twist-explicit-N1", "twist-explicit-N2", "twist-explicit-N3",
            "twist-explicit-N4", "twist-explicit-N5",
            "twist-penalized-N1", "twist-penalized-N2",
            "shear-weak", "shear-strong", "shear-strong-negcontrol",
        ]
        assert len({cfg.out for _, cfg in runs}) == len(runs)
        assert all(cfg.out.parent == tmp_path for _, cfg in runs)

    def test_run_parameters(self, tmp_path: Path) -> None:
        """Test the winding and penalty each run receives."""
        runs = dict(suite.suite_runs(RunConfig(out=tmp_path)))

        assert runs["twist-explicit-N3"].N == 3
        assert runs["twist-penalized-N2"].experiment == "twist-penalized"
        assert runs["shear-strong-negcontrol"].penalty == "negcontrol"
        assert runs["shear-strong"].penalty == "default"

    @pytest.mark.parametrize(("name", "count"), [("twist", 7), ("shear", 3)])
    def test_partial_suites(self, tmp_path: Path, name: str, count: int) -> None:
        """Test that --suite twist and --suite shear select their halves."""
        runs = suite.suite_runs(RunConfig(out=tmp_path, suite=name))  # type: ignore[arg-type]

        assert len(runs) == count
        assert all(cfg.experiment.startswith(name) for _, cfg in runs)


class TestRunSuite:
    """Concurrent execution and aggregation."""

    async def test_aggregate(self, stubbed: None, tmp_path: Path) -> None:
        """Test one claim per run, the runs table and the written reports."""
        report = await suite.run_suite(RunConfig(out=tmp_path, suite="shear"))

        assert report.experiment == "verify"
        assert report.passed
        assert [c.claim_id for c in report.claims] == [
            "shear-weak.passed", "shear-strong.passed", "shear-strong-negcontrol.passed",
        ]
        assert [row["run"] for row in report.tables["runs"]] == [
            "shear-weak", "shear-strong", "shear-strong-negcontrol",
        ]
        assert json.loads((tmp_path / "report.json").read_text())["passed"] is True
        negcontrol = json.loads((tmp_path / "shear-strong-negcontrol" / "report.json").read_text())
        assert negcontrol["tables"]["echo"] == [{"N": 1, "penalty": "negcontrol"}]

    async def test_failed_run_fails_aggregate(self, monkeypatch: pytest.MonkeyPatch,
                                              stubbed: None, tmp_path: Path) -> None:
        """Test that one solver failure fails the suite and is tabulated."""

        def broken(config: RunConfig) -> InvariantReport:
            raise NonlinearSolveError("Newton stalled", history=[])

        monkeypatch.setitem(suite.BUILDERS, "shear-strong", broken)

        report = await suite.run_suite(RunConfig(out=tmp_path, suite="shear"))

        assert not report.passed
        assert [c.claim_id for c in report.failed()] == [
            "shear-strong.passed", "shear-strong-negcontrol.passed",
        ]
        errors = {row["run"]: row["error"] for row in report.tables["runs"]}
        assert errors["shear-weak"] is None
        assert errors["shear-strong"].startswith("NonlinearSolveError")

    async def test_aggregate_bytes_are_stable(self, stubbed: None, tmp_path: Path) -> None:
        """Test that rerunning the suite rewrites identical bytes."""
        config = RunConfig(out=tmp_path, suite="all")

        await suite.run_suite(config)
        first = (tmp_path / "report.json").read_bytes()
        await suite.run_suite(config)

        assert (tmp_path / "report.json").read_bytes() == first


def test_verify_command(stubbed: None, tmp_path: Path) -> None:
    """Test that the verify subcommand exits 0 on a passing suite."""
    from click.testing import CliRunner

    from twistshear.cli import main

    result = CliRunner().invoke(main, ["verify", "--suite", "shear", "--out", str(tmp_path)])

    assert result.exit_code == 0, result.output
    assert (tmp_path / "shear-weak" / "report.json").exists()


def test_shear_weak_artifacts_are_byte_identical(tmp_path: Path) -> None:
    """Test that a real run with a fixed seed reproduces every artifact byte for byte."""
    config = RunConfig(
        experiment="shear-weak", n=16, out=tmp_path, emit=("csv", "json", "svg"), battery=4
    )
    names = ("report.json", "field.csv", "shear_weak.svg")

    first = suite.run_experiment(config)
    snapshot = {name: (tmp_path / name).read_bytes() for name in names}
    second = suite.run_experiment(config)

    assert first.passed, [c.claim_id for c in first.failed()]
    assert second.to_json_dict() == first.to_json_dict()
    for name in names:
        assert (tmp_path / name).read_bytes() == snapshot[name]
