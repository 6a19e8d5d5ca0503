"""Damped Newton iteration with backtracking line search.

The default merit is 1/2 ||F||^2 with an Armijo condition. Callers that
minimize an energy pass it as ``merit``; the step is then accepted on plain
decrease (with round-off slack). Inadmissible or non-finite trial points
halve the step.
"""

from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

import logfire
import numpy as np
from numpy.typing import NDArray

from twistshear.config import get_settings
from twistshear.errors import NonlinearSolveError

Vector = NDArray[np.float64]

ARMIJO = 1e-4
MERIT_SLACK = 1e-13


@dataclass
class NewtonResult:
    """Converged Newton iterate and its history."""

    x: Vector
    iterations: int
    residual_history: list[float] = field(default_factory=list)
    merit_history: list[float] = field(default_factory=list)
    iterates: list[Vector] = field(default_factory=list, repr=False)

    @property
    def residual(self) -> float:
        """Final residual norm."""
        return self.residual_history[-1]


def _dense_solve(jac: Any, rhs: Vector) -> Vector:
    return np.atleast_1d(np.linalg.solve(np.atleast_2d(np.asarray(jac, dtype=float)), rhs))


def newton_solve(
    F: Callable[[Vector], Any],  # noqa: N803
    J: Callable[[Vector], Any],  # noqa: N803
    x0: Any,
    tol: float | None = None,
    merit: Callable[[Vector], float] | None = None,
    admissible: Callable[[Vector, Vector], bool] | None = None,
    linear_solver: Callable[[Any, Vector], Vector] | None = None,
    norm: Callable[[Vector], float] | None = None,
    max_iters: int = 60,
    max_backtracks: int = 40,
) -> NewtonResult:
    """Solve F(x) = 0 by damped Newton.

    Args:
        F: Residual map
        J: Jacobian evaluator (dense array or anything ``linear_solver`` accepts)
        x0: Initial iterate (scalar or vector)
        tol: Target for norm(F(x)). Defaults to settings.newton_tol.
        merit: Optional merit function replacing 1/2 ||F||^2
        admissible: Optional feasibility predicate admissible(trial, current)
        linear_solver: Solves J dx = rhs. Defaults to a dense solve.
        norm: Convergence norm. Defaults to the Euclidean norm.
        max_iters: Newton iteration cap
        max_backtracks: Step halvings per iteration before stagnation

    Returns:
        NewtonResult with the converged iterate

    Raises:
        NonlinearSolveError: On stagnation or iteration cap; ``history``
            holds (iterate, residual) pairs.
    """
    tol = tol if tol is not None else get_settings().newton_tol
    solve = linear_solver or _dense_solve
    measure = norm or (lambda v: float(np.linalg.norm(v)))

    def merit_of(x: Vector, f: Vector) -> float:
        return float(merit(x)) if merit is not None else 0.5 * float(f @ f)

    x = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    f = np.atleast_1d(np.asarray(F(x), dtype=float))
    m = merit_of(x, f)
    result = NewtonResult(x=x, iterations=0)
    history: list[tuple[Vector, float]] = []

    with logfire.span("newton_solve", size=x.size, tol=tol):
        for k in range(max_iters + 1):
            res = measure(f)
            result.residual_history.append(res)
            result.merit_history.append(m)
            result.iterates.append(x.copy())
            history.append((x.copy(), res))
            logfire.debug("newton iterate", k=k, residual=res, merit=m)
            if res <= tol:
                result.x = x
                result.iterations = k
                return result
            if k == max_iters:
                break

            dx = np.atleast_1d(np.asarray(solve(J(x), -f), dtype=float))
            if not np.all(np.isfinite(dx)):
                raise NonlinearSolveError("non-finite Newton step", history=history)
            t = 1.0
            for _ in range(max_backtracks):
                trial = x + t * dx
                if admissible is not None and not admissible(trial, x):
                    t *= 0.5
                    continue
                f_trial = np.atleast_1d(np.asarray(F(trial), dtype=float))
                if not np.all(np.isfinite(f_trial)):
                    t *= 0.5
                    continue
                m_trial = merit_of(trial, f_trial)
                if merit is None:
                    accepted = m_trial <= (1.0 - 2.0 * ARMIJO * t) * m
                else:
                    accepted = m_trial <= m + MERIT_SLACK * (1.0 + abs(m))
                if accepted or (t == 1.0 and measure(f_trial) < 0.5 * res):
                    x, f, m = trial, f_trial, m_trial
                    break
                t *= 0.5
            else:
                logfire.warn("newton line search stagnated", k=k, residual=res)
                raise NonlinearSolveError(
                    f"line search stagnated at residual {res:.3e}", history=history
                )

    raise NonlinearSolveError(
        f"no convergence after {max_iters} iterations (residual {result.residual:.3e})",
        history=history,
    )
