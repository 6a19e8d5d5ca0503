"""Exception hierarchy.

Solver failures carry their diagnostic payload (best estimate, last state,
residual, iterate history) as attributes so callers can report instead of
re-running.
"""

from typing import Any


class TwistShearError(Exception):
    """Base class for all library errors."""

    pass


class DomainError(TwistShearError, ValueError):
    """Raised when a point lies outside the annulus/square or r <= 0."""

    pass


class ParameterRangeError(TwistShearError, ValueError):
    """Raised when twist parameters leave their admissible range."""

    pass


class InfeasibleGradientError(TwistShearError, ValueError):
    """Raised when a shear gradient has 1 + p2 <= 0."""

    pass


class UndefinedWindingError(TwistShearError):
    """Raised when a curve's winding number cannot be trusted."""

    def __init__(self, message: str, value: float | None = None):
        super().__init__(message)
        self.value = value


class QuadratureError(TwistShearError):
    """Raised when adaptive quadrature exhausts its refinement depth."""

    def __init__(self, message: str, best_estimate: float, error_estimate: float):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error_estimate = error_estimate


class BracketError(TwistShearError, ValueError):
    """Raised when a bracket shows no sign change."""

    def __init__(self, message: str, samples: list[tuple[float, float]] | None = None):
        super().__init__(message)
        self.samples = samples or []


class IntegrationError(TwistShearError):
    """Raised when the ODE integrator fails."""

    def __init__(self, message: str, last_state: Any = None):
        super().__init__(message)
        self.last_state = last_state


class InadmissibleStateError(IntegrationError):
    """Raised when a shooting trajectory reaches d <= d_min."""

    pass


class LinearSolveError(TwistShearError):
    """Raised when conjugate gradients hit the iteration cap."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class NonlinearSolveError(TwistShearError):
    """Raised when damped Newton stagnates."""

    def __init__(self, message: str, history: list[Any] | None = None):
        super().__init__(message)
        self.history = history or []


class ShootingError(NonlinearSolveError):
    """Raised when every multi-start shooting attempt fails."""

    def __init__(
        self,
        message: str,
        history: list[Any] | None = None,
        landscape: list[dict[str, float]] | None = None,
    ):
        super().__init__(message, history)
        self.landscape = landscape or []
