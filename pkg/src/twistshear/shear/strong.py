"""Mixed-boundary nonlinear shear problem on the square.

Minimizes I_s(sigma) = int_Q 1/2 |grad u_sigma|^2 + h0(det grad u_sigma) with
sigma clamped on the sides x1 = +-1 and traction-free on the top and bottom.
Writing W = 1/2 + 1/2 sigma_1^2 + G(sigma_2) with G(t) = 1/2 (1+t)^2 + h0(1+t),
the flux is L(p) = (p1, G'(p2)) = (p1, 1 + p2 + h0'(1 + p2)).

CRITICAL: horizontal-difference terms are weighted only on the non-free rows,
so stationarity at a free-boundary node is exactly L2(D2 sigma) = 0.
"""

from collections.abc import Sequence
from dataclasses import dataclass, field
from itertools import combinations

import logfire
import numpy as np
import scipy.sparse as sp
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field

from twistshear.config import get_settings
from twistshear.errors import InfeasibleGradientError, NonlinearSolveError
from twistshear.numerics.linear import solve_spd
from twistshear.numerics.newton import newton_solve
from twistshear.numerics.roots import Bracket, find_root
from twistshear.shear.grid import FloatArray, ShearGrid, ShearGridField, trapezoid_weights
from twistshear.twist.penalty import PenaltyFunction

FEASIBILITY_FLOOR = 1e-6
FORCING_MAX = 1e-2
FORCING_MIN = 1e-13
CORNER_SAMPLES = 4
EDGE_MARGIN = 0.1


class MixedBCSpec(BaseModel):
    """Clamped data sigma1 on x1 = +-1; top and bottom edges are traction-free.

    Only constant clamped data is supported.
    """

    model_config = ConfigDict(frozen=True)

    sigma1: float = Field(default=0.0, description="Clamped value on the sides x1 = +-1")


def flux_L(p: ArrayLike, h: PenaltyFunction) -> FloatArray:  # noqa: N802
    """L(p) = (p1, 1 + p2 + h0'(1 + p2)) for p of shape (..., 2).

    Raises:
        InfeasibleGradientError: If 1 + p2 <= 0 anywhere
    """
    q = np.asarray(p, dtype=float)
    d = 1.0 + q[..., 1]
    if np.any(d <= 0):
        raise InfeasibleGradientError("flux undefined for 1 + p2 <= 0")
    return np.stack([q[..., 0], d + h.dh0(d)], axis=-1)


def flux_jacobian(p: ArrayLike, h: PenaltyFunction) -> FloatArray:
    """DL(p) = diag(1, 1 + h0''(1 + p2)).

    Raises:
        InfeasibleGradientError: If 1 + p2 <= 0 anywhere
    """
    q = np.asarray(p, dtype=float)
    d = 1.0 + q[..., 1]
    if np.any(d <= 0):
        raise InfeasibleGradientError("flux undefined for 1 + p2 <= 0")
    out = np.zeros(q.shape[:-1] + (2, 2))
    out[..., 0, 0] = 1.0
    out[..., 1, 1] = 1.0 + h.d2h0(d)
    return out


def ellipticity_floor(h: PenaltyFunction, samples: int = 4000) -> float:
    """lambda = min(1, 1 + inf h0''), sampled on (0, 1e6]."""
    d = np.geomspace(1e-6, 1e6, samples)
    return float(min(1.0, 1.0 + np.min(h.d2h0(d))))


def natural_bc_root(h: PenaltyFunction, tol: float | None = None) -> float:
    """d* solving d + h0'(d) = 0, the free-boundary Jacobian."""

    def f(d: float) -> float:
        return float(d + h.dh0(np.asarray(d)))

    bracket = Bracket.scan(f, np.geomspace(1e-3, 1e3, 121))
    return find_root(f, bracket, tol=tol)


class ShearEnergy:
    """Discrete I_s with gradient and Hessian on the nodal grid.

    Usage:
        energy = ShearEnergy(64, default_penalty())
        value = energy.value(sigma)
    """

    def __init__(self, n: int, h: PenaltyFunction, bc: MixedBCSpec | None = None):
        self.grid = ShearGrid(n)
        self.penalty = h
        self.bc = bc or MixedBCSpec()
        size = self.grid.size
        self.col_weights = trapezoid_weights(size)
        self.row_weights = np.ones(size)
        self.row_weights[0] = self.row_weights[-1] = 0.0
        self.free = np.zeros((size, size), dtype=bool)
        self.free[1:-1, :] = True
        self._x_laplacian = self._edge_laplacian(
            np.broadcast_to(self.row_weights[None, :], (size - 1, size)), axis=0
        )

    @property
    def h(self) -> float:
        return self.grid.h

    def embed(self, x: FloatArray) -> FloatArray:
        """Full nodal array from the free unknowns."""
        s = np.full((self.grid.size, self.grid.size), self.bc.sigma1)
        s[self.free] = x
        return s

    def jacobian_field(self, s: FloatArray) -> FloatArray:
        """1 + D2 sigma on the vertical faces, shape (size, size - 1)."""
        return 1.0 + np.diff(s, axis=1) / self.h

    def floor(self, s: FloatArray) -> float:
        return float(np.min(self.jacobian_field(s)))

    def _g(self, d: FloatArray) -> FloatArray:
        return 0.5 * d**2 + np.asarray(self.penalty.energy(d))

    def _dg(self, d: FloatArray) -> FloatArray:
        return d + self.penalty.dh0(d)

    def _d2g(self, d: FloatArray) -> FloatArray:
        return 1.0 + self.penalty.d2h0(d)

    def value(self, s: FloatArray) -> float:
        """Energy; +inf when 1 + D2 sigma <= 0 on some face."""
        d = self.jacobian_field(s)
        if np.any(d <= 0):
            return float("inf")
        dx = np.diff(s, axis=0)
        horizontal = 0.5 * float(np.sum(self.row_weights[None, :] * dx**2))
        vertical = self.h**2 * float(np.sum(self.col_weights[:, None] * self._g(d)))
        return 2.0 + horizontal + vertical

    def gradient(self, s: FloatArray) -> FloatArray:
        """Nodal gradient of the energy (full grid)."""
        d = self.jacobian_field(s)
        g = np.zeros_like(s)
        dx = np.diff(s, axis=0) * self.row_weights[None, :]
        g[:-1, :] -= dx
        g[1:, :] += dx
        flux = self.h * self.col_weights[:, None] * self._dg(d)
        g[:, :-1] -= flux
        g[:, 1:] += flux
        return g

    def _edge_laplacian(self, weights: FloatArray, axis: int) -> sp.csr_matrix:
        size = self.grid.size
        index = np.arange(size * size).reshape(size, size)
        if axis == 0:
            p, q = index[:-1, :].ravel(), index[1:, :].ravel()
        else:
            p, q = index[:, :-1].ravel(), index[:, 1:].ravel()
        w = np.asarray(weights).ravel()
        rows = np.concatenate([p, q, p, q])
        cols = np.concatenate([p, q, q, p])
        vals = np.concatenate([w, w, -w, -w])
        return sp.coo_matrix((vals, (rows, cols)), shape=(size * size, size * size)).tocsr()

    def hessian(self, s: FloatArray) -> sp.csr_matrix:
        """Hessian restricted to the free unknowns (SPD on feasible fields)."""
        d = self.jacobian_field(s)
        vertical = self._edge_laplacian(self.col_weights[:, None] * self._d2g(d), axis=1)
        full = (self._x_laplacian + vertical).tocsr()
        idx = np.flatnonzero(self.free.ravel())
        return full[idx][:, idx].tocsr()

    def scaled(self, g: FloatArray) -> FloatArray:
        """Gradient in PDE units: interior / h^2, free rows / (h c_i)."""
        out = g / self.h**2
        out[:, 0] = g[:, 0] / (self.h * self.col_weights)
        out[:, -1] = g[:, -1] / (self.h * self.col_weights)
        return out

    def flux_faces(self, s: FloatArray) -> FloatArray:
        """L2 on the vertical faces."""
        return self._dg(self.jacobian_field(s))


def energy_Is(sigma: ShearGridField, h: PenaltyFunction) -> float:  # noqa: N802
    """Discrete I_s; +inf when the nodal constraint fails."""
    return ShearEnergy(sigma.n, h).value(sigma.sigma)


@dataclass
class NonlinearShearSolution:
    """Converged mixed-BVP field with Newton metadata."""

    field: ShearGridField
    penalty: PenaltyFunction = field(repr=False)
    iterations: int
    residual: float
    d_star: float
    residual_history: list[float] = field(default_factory=list, repr=False)
    energy_history: list[float] = field(default_factory=list, repr=False)

    @property
    def n(self) -> int:
        return self.field.n

    @property
    def energy(self) -> float:
        return energy_Is(self.field, self.penalty)

    @property
    def jacobian(self) -> FloatArray:
        return self.field.constraint()

    @property
    def floor(self) -> float:
        """Reported c with 1 + D2 sigma >= c > 0 at every node."""
        return float(np.min(self.jacobian))

    def columns(self) -> NDArray[np.float64]:
        """Rows (x1, x2, sigma, 1 + D2 sigma, L1, L2) for CSV output."""
        grid = self.field.grid
        s = self.field.sigma
        d1 = np.gradient(s, grid.h, axis=0)
        flux = flux_L(np.stack([d1, self.field.d2()], axis=-1), self.penalty)
        return np.column_stack(
            [
                grid.X1.ravel(),
                grid.X2.ravel(),
                s.ravel(),
                self.jacobian.ravel(),
                flux[..., 0].ravel(),
                flux[..., 1].ravel(),
            ]
        )


def solve_mixed_bvp(
    n: int,
    h: PenaltyFunction,
    tol: float | None = None,
    initial: FloatArray | None = None,
    bc: MixedBCSpec | None = None,
    max_iters: int = 60,
) -> NonlinearShearSolution:
    """Damped Newton on the discrete weak form with energy line search.

    Args:
        n: Grid resolution (even, >= 16)
        h: Penalty function
        tol: Target for the scaled residual sup norm. Defaults to settings.newton_tol.
        initial: Feasible starting field (full nodal array); zero by default
        bc: Clamped data
        max_iters: Newton iteration cap

    Returns:
        NonlinearShearSolution

    Raises:
        NonlinearSolveError: On stagnation or iteration cap
        ValueError: If the initial field is infeasible
    """
    tol = tol if tol is not None else get_settings().newton_tol
    energy = ShearEnergy(n, h, bc)
    start = np.zeros((energy.grid.size,) * 2) if initial is None else np.asarray(initial, float)
    if energy.floor(start) <= 0:
        raise ValueError("initial field violates 1 + D2 sigma > 0")
    x0 = start[energy.free]

    def residual(x: FloatArray) -> FloatArray:
        s = energy.embed(x)
        if energy.floor(s) <= 0:
            return np.full(x.shape, np.inf)
        return energy.gradient(s)[energy.free]

    def scaled_norm(f: FloatArray) -> float:
        full = np.zeros((energy.grid.size,) * 2)
        full[energy.free] = f
        return float(np.max(np.abs(energy.scaled(full))))

    def hessian(x: FloatArray) -> sp.csr_matrix:
        return energy.hessian(energy.embed(x))

    def linear_solver(jac: sp.csr_matrix, rhs: FloatArray) -> FloatArray:
        forcing = min(FORCING_MAX, max(FORCING_MIN, 0.1 * scaled_norm(rhs)))
        return solve_spd(jac, rhs, tol=forcing, preconditioner="jacobi")

    def admissible(trial: FloatArray, current: FloatArray) -> bool:
        floor = energy.floor(energy.embed(current))
        return energy.floor(energy.embed(trial)) >= max(FEASIBILITY_FLOOR, 0.5 * floor)

    with logfire.span("solve_mixed_bvp", n=n, penalty=h.name, tol=tol):
        result = newton_solve(
            residual,
            hessian,
            x0,
            tol=tol,
            merit=lambda x: energy.value(energy.embed(x)),
            admissible=admissible,
            linear_solver=linear_solver,
            norm=scaled_norm,
            max_iters=max_iters,
        )
        logfire.info(
            "mixed bvp converged", n=n, iterations=result.iterations, residual=result.residual
        )

    sol_field = ShearGridField(n=n, sigma=energy.embed(result.x))
    return NonlinearShearSolution(
        field=sol_field,
        penalty=h,
        iterations=result.iterations,
        residual=result.residual,
        d_star=natural_bc_root(h),
        residual_history=result.residual_history,
        energy_history=result.merit_history,
    )


def natural_bc_residual(sol: NonlinearShearSolution, margin: float = EDGE_MARGIN) -> float:
    """max |L2| on the top and bottom faces for |x1| <= 1 - margin."""
    energy = ShearEnergy(sol.n, sol.penalty)
    flux = energy.flux_faces(sol.field.sigma)
    cols = np.abs(energy.grid.x) <= 1.0 - margin
    return float(max(np.max(np.abs(flux[cols, 0])), np.max(np.abs(flux[cols, -1]))))


def weak_form_residual(sol: NonlinearShearSolution, eta: FloatArray) -> float:
    """Discrete int_Q L(grad sigma) . grad eta for eta vanishing on the clamped sides.

    Raises:
        ValueError: If eta is non-zero on a clamped column
    """
    eta = np.asarray(eta, dtype=float)
    if np.any(eta[0] != 0.0) or np.any(eta[-1] != 0.0):
        raise ValueError("eta must vanish on the clamped sides")
    energy = ShearEnergy(sol.n, sol.penalty)
    return float(np.sum(energy.gradient(sol.field.sigma) * eta))


@dataclass
class CornerMismatch:
    """Limits of L2(grad sigma) approaching the corner (1, 1)."""

    top: float
    side: float
    top_d2: float
    side_d2: float

    @property
    def gap(self) -> float:
        return abs(self.side - self.top)


def corner_mismatch(sol: NonlinearShearSolution, samples: int = CORNER_SAMPLES) -> CornerMismatch:
    """Sample L2 approaching (1, 1) along the top edge and along the clamped side.

    Both limits are read from the computed field, never from the clamped
    column itself (where sigma = 0 fixes L2 = 1 + h0'(1)):

    - top: traction on the top faces of the ``samples`` interior columns
      nearest the side.
    - side: L2 on the two interior columns next to the side, over the faces
      ``samples`` to ``2 samples`` cells below the top edge, extrapolated
      linearly to the side.
    """
    energy = ShearEnergy(sol.n, sol.penalty)
    s = sol.field.sigma
    flux = energy.flux_faces(s)
    d2 = np.diff(s, axis=1) / energy.h
    top = slice(-1 - samples, -1)
    side = slice(-2 * samples, -samples)

    def to_side(values: FloatArray) -> float:
        return float(2.0 * np.mean(values[-2, side]) - np.mean(values[-3, side]))

    return CornerMismatch(
        top=float(np.mean(flux[top, -1])),
        side=to_side(flux),
        top_d2=float(np.mean(d2[top, -1])),
        side_d2=to_side(d2),
    )


def initial_fields(n: int, rng: np.random.Generator) -> dict[str, FloatArray]:
    """Zero, random smooth and scaled-bump starts, all feasible and clamped to 0."""
    grid = ShearGrid(n)
    x1, x2 = grid.X1, grid.X2
    smooth = np.zeros_like(x1)
    coeffs = rng.standard_normal((3, 3))
    for p in range(3):
        for q in range(3):
            smooth += coeffs[p, q] * np.sin((p + 1) * np.pi * (x1 + 1) / 2) * np.cos(q * np.pi * x2 / 2)
    slope = float(np.max(np.abs(np.diff(smooth, axis=1)))) / grid.h
    smooth *= 0.3 / max(slope, 1e-300)
    smooth[0] = smooth[-1] = 0.0
    return {
        "zero": np.zeros_like(x1),
        "random_smooth": smooth,
        "scaled_bump": 0.3 * (1.0 - x1**2) * x2,
    }


@dataclass
class UniquenessResult:
    """Solutions from several starts and their spread."""

    solutions: dict[str, NonlinearShearSolution] = field(repr=False)
    failures: dict[str, str]
    distance: float
    energy_spread: float


def uniqueness_check(
    n: int,
    h: PenaltyFunction,
    inits: dict[str, FloatArray] | Sequence[FloatArray],
    tol: float | None = None,
) -> UniquenessResult:
    """Solve from every start and report the max pairwise sup distance.

    Non-convergent starts are listed in ``failures``.
    """
    starts = inits if isinstance(inits, dict) else {str(i): s for i, s in enumerate(inits)}
    solutions: dict[str, NonlinearShearSolution] = {}
    failures: dict[str, str] = {}
    for name, start in starts.items():
        try:
            solutions[name] = solve_mixed_bvp(n, h, tol=tol, initial=start)
        except (NonlinearSolveError, ValueError) as exc:
            logfire.warn("mixed bvp start failed", start=name, error=str(exc))
            failures[name] = str(exc)

    pairs = list(combinations(solutions.values(), 2))
    distance = max(
        (float(np.max(np.abs(a.field.sigma - b.field.sigma))) for a, b in pairs), default=0.0
    )
    energies = [s.energy for s in solutions.values()]
    spread = max(energies) - min(energies) if energies else 0.0
    return UniquenessResult(
        solutions=solutions, failures=failures, distance=distance, energy_spread=spread
    )
