"""Observability setup using Logfire.

Logfire provides:
- Structured console logging for solver progress
- Spans around every solve (root, ODE, CG, Newton, shooting)
- Remote export only when a token is configured
"""

from typing import Any

from twistshear import __version__
from twistshear.config import Settings, get_settings

_configured = False


def setup_observability(settings: Settings | None = None) -> dict[str, Any]:
    """Configure Logfire observability.

    Safe to call multiple times - will only configure once.

    Args:
        settings: Settings to use. Defaults to the cached settings.

    Returns:
        Dict with configuration status
    """
    global _configured

    if _configured:
        return {"configured": True, "status": "already_configured"}

    settings = settings or get_settings()

    try:
        import logfire

        logfire.configure(
            send_to_logfire="if-token-present",
            token=settings.logfire_token,
            service_name="twistshear",
            service_version=__version__,
            environment=settings.environment,
            console=logfire.ConsoleOptions(min_log_level=settings.console_level),
        )

        _configured = True
        remote = settings.logfire_token is not None
        return {"configured": True, "status": "success", "remote": remote}

    except Exception as e:
        _configured = True
        return {"configured": False, "status": "error", "error": str(e)}
