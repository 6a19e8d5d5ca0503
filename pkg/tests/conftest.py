"""Shared fixtures.

Logfire is configured once with console output and remote export disabled,
and setup_observability() is marked as done so the CLI does not reconfigure.
"""

from collections.abc import Iterator

import logfire
import numpy as np
import pytest

from twistshear.config import get_settings
from twistshear.observability import setup as observability_setup


@pytest.fixture(scope="session", autouse=True)
def quiet_logfire() -> None:
    logfire.configure(send_to_logfire=False, console=False)
    observability_setup._configured = True


@pytest.fixture(autouse=True)
def fresh_settings() -> Iterator[None]:
    """Drop the cached Settings so env changes in one test do not leak."""
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def spec():
    from twistshear.twist.models import AnnulusSpec

    return AnnulusSpec(a=1.0, b=2.0)


@pytest.fixture(scope="session")
def default_h():
    from twistshear.twist.penalty import default_penalty

    return default_penalty()


@pytest.fixture(scope="session")
def negcontrol_h():
    from twistshear.twist.penalty import negative_control_penalty

    return negative_control_penalty()
