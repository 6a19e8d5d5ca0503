"""Conjugate gradients for sparse symmetric positive definite systems."""

from dataclasses import dataclass, field

import logfire
import numpy as np
import scipy.sparse as sp
from numpy.typing import NDArray
from scipy.sparse.linalg import LinearOperator, cg

from twistshear.config import get_settings
from twistshear.errors import LinearSolveError


@dataclass
class CgMonitor:
    """Per-iteration record of a CG solve.

    ``energy`` holds the quadratic functional 1/2 x^T A x - b^T x, which CG
    decreases monotonically; ``residual`` holds relative residual norms.
    """

    residual: list[float] = field(default_factory=list)
    energy: list[float] = field(default_factory=list)
    iterations: int = 0


def jacobi_preconditioner(a: sp.spmatrix | NDArray[np.float64]) -> LinearOperator:
    """Inverse-diagonal preconditioner."""
    diag = np.asarray(a.diagonal(), dtype=float)
    if np.any(diag <= 0):
        raise LinearSolveError("matrix diagonal is not positive", residual=float("nan"))
    inv = 1.0 / diag
    n = diag.size
    return LinearOperator((n, n), matvec=lambda v: inv * np.ravel(v), dtype=float)


def solve_spd(
    a: sp.spmatrix | NDArray[np.float64],
    b: NDArray[np.float64],
    tol: float | None = None,
    x0: NDArray[np.float64] | None = None,
    preconditioner: str | None = "jacobi",
    maxiter: int | None = None,
    monitor: CgMonitor | None = None,
) -> NDArray[np.float64]:
    """Solve A x = b by (preconditioned) conjugate gradients.

    Args:
        a: Symmetric positive definite matrix (sparse or dense)
        b: Right-hand side
        tol: Relative residual target ||Ax - b|| / ||b||. Defaults to settings.cg_tol.
        x0: Initial guess
        preconditioner: "jacobi" or None
        maxiter: Iteration cap. Defaults to 10 * n.
        monitor: Optional CgMonitor filled with per-iteration diagnostics

    Returns:
        Solution vector

    Raises:
        LinearSolveError: If the iteration cap is reached; ``residual`` holds
            the final relative residual.
    """
    tol = tol if tol is not None else get_settings().cg_tol
    rhs = np.asarray(b, dtype=float)
    n = rhs.size
    bnorm = float(np.linalg.norm(rhs))
    if bnorm == 0.0:
        return np.zeros(n)
    maxiter = maxiter if maxiter is not None else 10 * n
    m = jacobi_preconditioner(a) if preconditioner == "jacobi" else None

    def record(xk: NDArray[np.float64]) -> None:
        if monitor is None:
            return
        ax = a @ xk
        monitor.iterations += 1
        monitor.residual.append(float(np.linalg.norm(ax - rhs)) / bnorm)
        monitor.energy.append(float(0.5 * xk @ ax - rhs @ xk))

    with logfire.span("solve_spd", n=n, tol=tol):
        x, info = cg(a, rhs, x0=x0, rtol=tol, atol=0.0, maxiter=maxiter, M=m, callback=record)
        residual = float(np.linalg.norm(a @ x - rhs)) / bnorm
        if info != 0:
            logfire.warn("cg did not converge", info=info, residual=residual)
            raise LinearSolveError(
                f"conjugate gradients stopped after {maxiter} iterations", residual=residual
            )
        logfire.debug("cg converged", residual=residual)
    return np.asarray(x, dtype=float)
