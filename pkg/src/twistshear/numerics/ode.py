"""Embedded Runge-Kutta 4(5) integration with dense output.

Wraps scipy's RK45. Exceptions raised by the right-hand side (for example an
inadmissible-state guard) are re-raised with the last state the integrator
evaluated successfully.
"""

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any

import logfire
import numpy as np
from numpy.typing import NDArray
from scipy.integrate import solve_ivp

from twistshear.config import get_settings
from twistshear.errors import IntegrationError

Rhs = Callable[[float, NDArray[np.float64]], NDArray[np.float64]]


@dataclass(frozen=True)
class OdeState:
    """Point (r, y) of an initial value problem together with its rhs."""

    r: float
    y: NDArray[np.float64]
    rhs: Rhs | None = field(default=None, repr=False, compare=False)

    @property
    def dim(self) -> int:
        """State dimension."""
        return int(np.asarray(self.y).size)


@dataclass
class OdeTrajectory:
    """Solution samples plus the dense interpolant.

    Attributes:
        r: Sample abscissae (caller grid, or the accepted steps)
        y: States, shape (dim, len(r))
        dense: Continuous interpolant, callable as dense(r) -> (dim,) or (dim, m)
        steps: Number of accepted steps
    """

    r: NDArray[np.float64]
    y: NDArray[np.float64]
    dense: Any
    steps: int

    @property
    def final(self) -> OdeState:
        """State at the last sample."""
        return OdeState(r=float(self.r[-1]), y=self.y[:, -1].copy())


def ode_solve(
    s0: OdeState,
    r_end: float,
    tol: float | None = None,
    atol: float | None = None,
    r_eval: Sequence[float] | NDArray[np.float64] | None = None,
) -> OdeTrajectory:
    """Integrate y' = rhs(r, y) from s0 to r_end.

    Args:
        s0: Initial state carrying the rhs evaluator
        r_end: End of the integration interval
        tol: Relative tolerance. Defaults to settings.ode_rtol.
        atol: Absolute tolerance. Defaults to settings.ode_atol.
        r_eval: Optional output grid inside [s0.r, r_end]

    Returns:
        OdeTrajectory sampled at r_eval (or at the accepted steps)

    Raises:
        IntegrationError: On step-size underflow or any rhs failure;
            ``last_state`` holds the last successfully evaluated state.
    """
    if s0.rhs is None:
        raise ValueError("initial state has no rhs evaluator")
    settings = get_settings()
    rtol = tol if tol is not None else settings.ode_rtol
    atol = atol if atol is not None else settings.ode_atol
    rhs = s0.rhs
    last: dict[str, Any] = {"state": OdeState(r=s0.r, y=np.asarray(s0.y, dtype=float))}

    def guarded(r: float, y: NDArray[np.float64]) -> NDArray[np.float64]:
        dy = rhs(r, y)
        last["state"] = OdeState(r=float(r), y=np.array(y, dtype=float))
        return dy

    with logfire.span("ode_solve", r0=s0.r, r_end=r_end, rtol=rtol):
        try:
            sol = solve_ivp(
                guarded,
                (s0.r, r_end),
                np.asarray(s0.y, dtype=float),
                method="RK45",
                rtol=rtol,
                atol=atol,
                dense_output=True,
                t_eval=None if r_eval is None else np.asarray(r_eval, dtype=float),
            )
        except IntegrationError as e:
            e.last_state = last["state"]
            raise
        except (ArithmeticError, ValueError) as e:
            raise IntegrationError(f"rhs evaluation failed: {e}", last["state"]) from e

        if not sol.success:
            raise IntegrationError(f"integration failed: {sol.message}", last["state"])
        logfire.debug("ode steps", nfev=sol.nfev, steps=len(sol.sol.ts) - 1)

    return OdeTrajectory(r=sol.t, y=sol.y, dense=sol.sol, steps=len(sol.sol.ts) - 1)
