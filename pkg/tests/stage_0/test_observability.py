"""Stage 0.2: Observability Tests.

These tests verify Logfire setup without sending any telemetry.
Run with: uv run pytest tests/stage_0/test_observability.py -v
"""

import pytest

pytestmark = pytest.mark.stage0


def test_observability_setup_idempotent() -> None:
    """Test that observability setup can be called multiple times."""
    from twistshear.observability.setup import setup_observability

    setup_observability()
    result = setup_observability()

    assert result == {"configured": True, "status": "already_configured"}


def test_observability_returns_configured_status(monkeypatch: pytest.MonkeyPatch) -> None:
    """Test that a fresh setup reports success and no remote export without a token."""
    from twistshear.config import Settings
    from twistshear.observability import setup as observability_setup

    monkeypatch.setattr(observability_setup, "_configured", False)

    result = observability_setup.setup_observability(Settings(log_level="ERROR"))

    assert isinstance(result, dict)
    assert result["configured"] is True
    assert result["status"] == "success"
    assert result["remote"] is False
