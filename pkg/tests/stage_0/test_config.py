"""Stage 0.1: Configuration Tests.

These tests verify that Settings loads tolerances from TWISTSHEAR_* variables.
Run with: uv run pytest tests/stage_0/test_config.py -v
"""

import pytest

pytestmark = pytest.mark.stage0


def test_settings_defaults() -> None:
    """Test that Settings exposes the documented default tolerances."""
    from twistshear.config import Settings

    settings = Settings()

    assert settings.quad_tol == 1e-10
    assert settings.root_tol == 1e-12
    assert settings.newton_tol == 1e-10
    assert settings.jacobian_floor == 1e-10
    assert settings.seed == 42


def test_settings_loads_from_environment(monkeypatch: pytest.MonkeyPatch) -> None:
    """Test that Settings reads TWISTSHEAR_ prefixed variables."""
    from twistshear.config import Settings

    monkeypatch.setenv("TWISTSHEAR_QUAD_TOL", "1e-8")
    monkeypatch.setenv("TWISTSHEAR_LOG_LEVEL", "debug")

    settings = Settings()

    assert settings.quad_tol == 1e-8
    assert settings.log_level == "DEBUG"
    assert settings.console_level == "debug"


def test_settings_rejects_non_positive_tolerance(monkeypatch: pytest.MonkeyPatch) -> None:
    """Test that a zero tolerance fails validation."""
    from pydantic import ValidationError

    from twistshear.config import Settings

    monkeypatch.setenv("TWISTSHEAR_CG_TOL", "0")

    with pytest.raises(ValidationError):
        Settings()


def test_settings_rejects_unknown_log_level(monkeypatch: pytest.MonkeyPatch) -> None:
    """Test that an unknown log level fails validation."""
    from pydantic import ValidationError

    from twistshear.config import Settings

    monkeypatch.setenv("TWISTSHEAR_LOG_LEVEL", "chatty")

    with pytest.raises(ValidationError):
        Settings()


def test_warning_level_maps_to_logfire_name() -> None:
    """Test that WARNING is translated to logfire's 'warn'."""
    from twistshear.config import Settings

    assert Settings(log_level="warning").console_level == "warn"


def test_settings_singleton_pattern() -> None:
    """Test that get_settings returns the cached instance."""
    from twistshear.config import get_settings

    assert get_settings() is get_settings()


def test_solvers_pick_up_settings_default(monkeypatch: pytest.MonkeyPatch) -> None:
    """Test that an omitted tol falls back to the configured value."""
    import numpy as np

    from twistshear.config import get_settings
    from twistshear.numerics.quadrature import integrate_1d

    monkeypatch.setenv("TWISTSHEAR_QUAD_TOL", "1e-4")
    get_settings.cache_clear()

    value = integrate_1d(np.sin, 0.0, np.pi)

    assert get_settings().quad_tol == 1e-4
    assert abs(value - 2.0) < 1e-4
