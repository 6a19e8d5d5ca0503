"""Solver configuration loaded from environment variables.

All variables use the TWISTSHEAR_ prefix (e.g. TWISTSHEAR_QUAD_TOL=1e-12).
No .env files are read.
"""

from functools import lru_cache

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

_LOG_LEVELS = ("TRACE", "DEBUG", "INFO", "NOTICE", "WARN", "WARNING", "ERROR", "FATAL")


class Settings(BaseSettings):
    """Numerical tolerances and runtime options.

    Every solver entry point accepts an explicit ``tol``; when it is omitted
    the matching default below is used.
    """

    model_config = SettingsConfigDict(
        env_prefix="TWISTSHEAR_",
        env_file=None,
        case_sensitive=False,
        extra="ignore",
    )

    # Tolerances
    quad_tol: float = Field(default=1e-10, description="Adaptive quadrature tolerance")
    root_tol: float = Field(default=1e-12, description="Scalar root-finding tolerance")
    ode_rtol: float = Field(default=1e-10, description="ODE relative tolerance")
    ode_atol: float = Field(default=1e-12, description="ODE absolute tolerance")
    cg_tol: float = Field(default=1e-10, description="Conjugate gradient relative residual")
    newton_tol: float = Field(default=1e-10, description="Newton residual tolerance")
    shooting_tol: float = Field(default=1e-8, description="Shooting boundary residual tolerance")
    jacobian_floor: float = Field(
        default=1e-10,
        description="Shots with d = rho*rhodot/r at or below this value are aborted",
    )

    # Application
    seed: int = Field(default=42, description="Seed for perturbation batteries")
    output_dir: str = Field(default="out", description="Default artifact directory")
    environment: str = Field(
        default="development",
        description="Environment name (development, ci, production)",
    )
    log_level: str = Field(default="INFO", description="Console log level")
    logfire_token: str | None = Field(
        default=None,
        description="Logfire token; telemetry is only sent when present",
    )

    @field_validator(
        "quad_tol", "root_tol", "ode_rtol", "ode_atol", "cg_tol",
        "newton_tol", "shooting_tol", "jacobian_floor",
    )
    @classmethod
    def validate_positive(cls, v: float) -> float:
        """Tolerances must be strictly positive."""
        if not v > 0:
            raise ValueError("tolerance must be positive")
        return v

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Normalize and validate the log level name."""
        level = v.upper()
        if level not in _LOG_LEVELS:
            raise ValueError(f"unknown log level {v!r}")
        return level

    @property
    def console_level(self) -> str:
        """Log level in the lowercase form logfire's console expects."""
        return {"WARNING": "warn", "FATAL": "fatal"}.get(self.log_level, self.log_level.lower())


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance.

    Settings are loaded once and reused across the process.
    """
    return Settings()
