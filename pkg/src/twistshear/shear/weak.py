"""Constrained shear minimizer on the square: harmonic on Omega, pinched on P.

The reduced energy I_w(sigma) = int_Q |grad u_sigma|^2 with u_sigma = x + sigma e2
is minimized over sigma = sigma0 on the boundary subject to 1 + d2 sigma >= 0.
Every admissible field equals -x2 on P; on Omega the minimizer is the harmonic
extension of sigma0. ``oracle_minimize`` solves the discrete constrained
problem independently by projected gradient descent.
"""

from collections.abc import Sequence
from dataclasses import dataclass, field

import logfire
import numpy as np
import scipy.sparse as sp
from numpy.typing import NDArray
from scipy.optimize import isotonic_regression

from twistshear.numerics.linear import CgMonitor, solve_spd
from twistshear.shear.grid import (
    FloatArray,
    ShearGrid,
    ShearGridField,
    SubdomainOmega,
    check_resolution,
    edge_energy,
    edge_form,
    trapezoid_weights,
)

HARMONIC_TOL = 1e-12
FEASIBILITY_SLACK = 1e-12
FLOOR_TOL = 1e-9
TRACE_EPS = 1e-6
ORACLE_STEP = 1.0 / 16.0
ORACLE_ENERGY_TOL = 1e-10
ORACLE_STEP_TOL = 1e-8
MAX_HALVINGS = 40


@dataclass
class HarmonicSolution:
    """Discrete harmonic extension of sigma0 on the closed columns of Omega."""

    n: int
    values: FloatArray = field(repr=False)
    cg_iterations: int = 0

    @property
    def omega(self) -> SubdomainOmega:
        return SubdomainOmega(self.n)

    @property
    def mean_value_residual(self) -> float:
        """max |Sigma - mean of its four neighbours| over interior nodes."""
        s = self.values
        mean = 0.25 * (s[:-2, 1:-1] + s[2:, 1:-1] + s[1:-1, :-2] + s[1:-1, 2:])
        return float(np.max(np.abs(s[1:-1, 1:-1] - mean)))


def _laplacian_1d(m: int) -> sp.csr_matrix:
    return sp.diags([-np.ones(m - 1), 2 * np.ones(m), -np.ones(m - 1)], [-1, 0, 1], format="csr")


def harmonic_solve(n: int, tol: float = HARMONIC_TOL) -> HarmonicSolution:
    """Solve the 5-point Laplace equation on Omega with Dirichlet data sigma0.

    On K the data is sigma0(1/2, x2) = -x2.

    Raises:
        ValueError: If n is odd or below 16
        LinearSolveError: If conjugate gradients does not converge
    """
    check_resolution(n)
    grid = ShearGrid(n)
    omega = SubdomainOmega(n)
    data = omega.restrict(grid.sigma0).copy()
    data[1:-1, 1:-1] = 0.0

    ni, nj = data.shape[0] - 2, data.shape[1] - 2
    a = sp.kron(_laplacian_1d(ni), sp.identity(nj)) + sp.kron(sp.identity(ni), _laplacian_1d(nj))
    rhs = data[:-2, 1:-1] + data[2:, 1:-1] + data[1:-1, :-2] + data[1:-1, 2:]

    monitor = CgMonitor()
    with logfire.span("harmonic_solve", n=n, unknowns=ni * nj):
        x = solve_spd(a.tocsr(), rhs.ravel(), tol=tol, monitor=monitor)
    data[1:-1, 1:-1] = x.reshape(ni, nj)
    logfire.debug("harmonic solve done", n=n, iterations=monitor.iterations)
    return HarmonicSolution(n=n, values=data, cg_iterations=monitor.iterations)


def compose_minimizer(harmonic: HarmonicSolution) -> ShearGridField:
    """Glue Sigma on Omega with -x2 on P."""
    grid = ShearGrid(harmonic.n)
    sigma = grid.sigma0.copy()
    sigma[: grid.i_k + 1, :] = harmonic.values
    return ShearGridField(n=harmonic.n, sigma=sigma)


def constraint_field(sigma: ShearGridField) -> FloatArray:
    """Nodal Jacobian det grad u_sigma = 1 + D2 sigma."""
    return sigma.constraint()


def dirichlet_energy_w(sigma: ShearGridField) -> float:
    """I_w = int_Q 2 + |grad sigma|^2 + 2 d2 sigma, edge-discretized."""
    s = sigma.sigma
    h = sigma.h
    w = trapezoid_weights(s.shape[0]) * h
    boundary_term = float(np.sum(w * (s[:, -1] - s[:, 0])))
    return 8.0 + edge_energy(s) + 2.0 * boundary_term


@dataclass
class EnvelopeCheck:
    """Nodewise envelope sigma(x1,-1) - 1 - x2 <= sigma <= sigma(x1,1) + 1 - x2."""

    lower: FloatArray = field(repr=False)
    upper: FloatArray = field(repr=False)
    violation: float

    @property
    def holds(self) -> bool:
        return self.violation <= FEASIBILITY_SLACK


def envelope_bounds(sigma: ShearGridField) -> EnvelopeCheck:
    """Envelope implied by integrating 1 + d2 sigma >= 0 from either end of a column."""
    grid = sigma.grid
    s = sigma.sigma
    lower = s[:, :1] - 1.0 - grid.X2
    upper = s[:, -1:] + 1.0 - grid.X2
    violation = max(float(np.max(lower - s)), float(np.max(s - upper)))
    return EnvelopeCheck(lower=lower, upper=upper, violation=violation)


def comparison_bounds(harmonic: HarmonicSolution) -> dict[str, float]:
    """Worst violation of the linear comparison functions on Omega.

    Sigma lies below z1 = 1 - x2 and z1 - 2 x1, and above z2 = -1 - x2 and
    z2 + 2 x1. Each entry is max(Sigma - upper) or max(lower - Sigma); all are
    <= 0 up to solver precision.
    """
    grid = ShearGrid(harmonic.n)
    omega = harmonic.omega
    x1 = omega.restrict(grid.X1)
    x2 = omega.restrict(grid.X2)
    s = harmonic.values
    return {
        "upper": float(np.max(s - (1.0 - x2))),
        "upper_shifted": float(np.max(s - (1.0 - x2 - 2.0 * x1))),
        "lower": float(np.max((-1.0 - x2) - s)),
        "lower_shifted": float(np.max((-1.0 - x2 + 2.0 * x1) - s)),
    }


@dataclass
class JumpTrace:
    """One-sided x1-derivative traces of sigma on K."""

    x2: FloatArray = field(repr=False)
    left: FloatArray = field(repr=False)
    right: FloatArray = field(repr=False)

    @property
    def max_left(self) -> float:
        """max |left trace| over nodes strictly inside K."""
        return float(np.max(np.abs(self.left[1:-1])))

    @property
    def max_right(self) -> float:
        return float(np.max(np.abs(self.right)))

    def discontinuous(self, threshold: float = 0.01) -> bool:
        return self.max_left > threshold and self.max_right < threshold


def jump_across_K(sigma: ShearGridField, harmonic: HarmonicSolution | None = None) -> JumpTrace:  # noqa: N802
    """Second-order one-sided traces of d1 sigma at x1 = 1/2 from Omega and from P."""
    grid = sigma.grid
    h = grid.h
    ik = grid.i_k
    left_vals = harmonic.values if harmonic is not None else sigma.sigma[: ik + 1]
    f0, f1, f2 = left_vals[ik], left_vals[ik - 1], left_vals[ik - 2]
    left = (3 * f0 - 4 * f1 + f2) / (2 * h)
    g0, g1, g2 = sigma.sigma[ik], sigma.sigma[ik + 1], sigma.sigma[ik + 2]
    right = (-3 * g0 + 4 * g1 - g2) / (2 * h)
    return JumpTrace(x2=grid.x.copy(), left=left, right=right)


def variational_inequality_residual(sigma: ShearGridField, eta: FloatArray) -> float:
    """Discrete int_Q grad sigma . grad eta.

    Raises:
        ValueError: If eta has the wrong shape or is non-zero on the boundary
    """
    eta = np.asarray(eta, dtype=float)
    if eta.shape != sigma.sigma.shape:
        raise ValueError(f"eta must have shape {sigma.sigma.shape}")
    if np.any(eta[sigma.grid.boundary] != 0.0):
        raise ValueError("eta must vanish on the boundary")
    return edge_form(sigma.sigma, eta)


def is_admissible(sigma: ShearGridField, eta: FloatArray) -> bool:
    """sigma + eta keeps 1 + D2 >= 0 wherever sigma does."""
    base = sigma.constraint()
    trial = 1.0 + (sigma.d2() + sigma.copy_with(eta).d2())
    return bool(np.all(trial >= np.minimum(base, 0.0) - FEASIBILITY_SLACK))


def random_admissible_eta(
    sigma: ShearGridField,
    rng: np.random.Generator,
    modes: int = 3,
    amplitude: float = 0.2,
    margin: float = 0.0,
) -> FloatArray:
    """Random smooth perturbation on Omega, zero on P and on the boundary.

    The support is x1 in [-1, 1/2 - margin]. The amplitude is halved until
    sigma + eta is admissible.
    """
    grid = sigma.grid
    right = 0.5 - margin
    s1 = np.clip((grid.X1 + 1.0) / (right + 1.0), 0.0, 1.0)
    s2 = (grid.X2 + 1.0) / 2.0
    eta = np.zeros_like(grid.X1)
    coeffs = rng.standard_normal((modes, modes))
    for p in range(modes):
        for q in range(modes):
            eta += coeffs[p, q] * np.sin((p + 1) * np.pi * s1) * np.sin((q + 1) * np.pi * s2)
    eta[grid.X1 > right] = 0.0
    eta[grid.boundary] = 0.0
    eta *= amplitude / max(float(np.max(np.abs(eta))), 1e-300)
    for _ in range(MAX_HALVINGS):
        if is_admissible(sigma, eta):
            return eta
        eta *= 0.5
    return np.zeros_like(eta)


@dataclass
class DichotomyResult:
    """The two mutually exclusive alternatives for a candidate minimizer."""

    positive_floor: bool
    trace_vanishes: bool
    min_jacobian: float
    trace_integrals: list[float]

    @property
    def at_most_one(self) -> bool:
        return not (self.positive_floor and self.trace_vanishes)


def _trace_weights(x2: FloatArray) -> list[FloatArray]:
    bump = (1.0 - x2**2) ** 2
    odd_even = [(1.0 - x2**2) ** 3 * x2**m for m in range(4)]
    trig = [np.sin(m * np.pi * x2) * bump for m in range(1, 5)]
    return odd_even + trig


def dichotomy_check(
    sigma: ShearGridField,
    harmonic: HarmonicSolution | None = None,
    eps: float = TRACE_EPS,
) -> DichotomyResult:
    """Evaluate (i) min over interior Omega of 1 + D2 sigma > 0 and
    (ii) int phi(x2) d1 Sigma(1/2-, x2) dx2 = 0 for a battery of cutoffs phi.
    """
    grid = sigma.grid
    ik = grid.i_k
    floor = float(np.min(sigma.constraint()[1:ik, 1:-1]))
    trace = jump_across_K(sigma, harmonic)
    w = trapezoid_weights(grid.size) * grid.h
    integrals = [float(np.sum(w * phi * trace.left)) for phi in _trace_weights(grid.x)]
    return DichotomyResult(
        positive_floor=floor > FLOOR_TOL,
        trace_vanishes=all(abs(v) < eps for v in integrals),
        min_jacobian=floor,
        trace_integrals=integrals,
    )


@dataclass
class OracleResult:
    """Outcome of the projected-gradient minimization."""

    field: ShearGridField
    energy: float
    iterations: int
    converged: bool
    energy_history: list[float] = field(default_factory=list, repr=False)


def _edge_gradient(s: FloatArray) -> FloatArray:
    g = np.zeros_like(s)
    dx = np.diff(s, axis=0)
    dx[:, 0] *= 0.5
    dx[:, -1] *= 0.5
    dy = np.diff(s, axis=1)
    dy[0, :] *= 0.5
    dy[-1, :] *= 0.5
    g[:-1, :] -= 2 * dx
    g[1:, :] += 2 * dx
    g[:, :-1] -= 2 * dy
    g[:, 1:] += 2 * dy
    return g


def project_columns(s: FloatArray, x2: FloatArray) -> FloatArray:
    """Euclidean projection onto {sigma + x2 non-decreasing along every column}.

    Boundary rows are fixed; violating columns are replaced by the isotonic
    regression of their interior values clipped to the end values.
    """
    out = s.copy()
    w = out + x2[None, :]
    bad = np.flatnonzero(np.any(np.diff(w[1:-1], axis=1) < 0, axis=1)) + 1
    for i in bad:
        fitted = isotonic_regression(w[i, 1:-1], increasing=True).x
        out[i, 1:-1] = np.clip(fitted, w[i, 0], w[i, -1]) - x2[1:-1]
    return out


def oracle_minimize(n: int, max_iters: int = 50_000) -> OracleResult:
    """Minimize the discrete I_w under 1 + D2 sigma >= 0 by FISTA with restart.

    Starts from sigma0. Stops when the energy change per step drops below
    1e-10 and the iterate stalls; on the iteration cap the last iterate is
    returned with ``converged=False``.
    """
    grid = ShearGrid(n)
    interior = ~grid.boundary
    x = grid.sigma0.copy()
    y = x.copy()
    t = 1.0
    energy = edge_energy(x)
    history = [energy]
    converged = False
    k = 0

    with logfire.span("oracle_minimize", n=n, max_iters=max_iters):
        for k in range(1, max_iters + 1):
            step = y - ORACLE_STEP * np.where(interior, _edge_gradient(y), 0.0)
            x_new = project_columns(step, grid.x)
            e_new = edge_energy(x_new)
            t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            if float(np.sum((y - x_new) * (x_new - x))) > 0:
                t_new = 1.0
                y = x_new.copy()
            else:
                y = x_new + ((t - 1.0) / t_new) * (x_new - x)
            change = float(np.max(np.abs(x_new - x)))
            stalled = abs(e_new - energy) < ORACLE_ENERGY_TOL and change < ORACLE_STEP_TOL
            x, t, energy = x_new, t_new, e_new
            history.append(energy)
            if stalled:
                converged = True
                break

    result_field = ShearGridField(n=n, sigma=x)
    if not converged:
        logfire.warn("oracle hit iteration cap", n=n, iterations=k, energy=energy)
    else:
        logfire.info("oracle converged", n=n, iterations=k)
    return OracleResult(
        field=result_field,
        energy=dirichlet_energy_w(result_field),
        iterations=k,
        converged=converged,
        energy_history=history,
    )


@dataclass
class RefinementStudy:
    """Composed-field energies over a sequence of resolutions."""

    ns: list[int]
    energies: list[float]

    @property
    def differences(self) -> list[float]:
        return [abs(a - b) for a, b in zip(self.energies, self.energies[1:], strict=False)]

    def eps_grid(self, n: int) -> float:
        """10 |E(n) - E(2n)| for a resolution n whose double was run."""
        idx = self.ns.index(n)
        return 10.0 * abs(self.energies[idx] - self.energies[idx + 1])

    @property
    def observed_rate(self) -> float:
        """log2 of successive difference ratios (last pair)."""
        d = self.differences
        if len(d) < 2 or d[-1] == 0.0:
            return float("nan")
        return float(np.log2(d[-2] / d[-1]))


def refinement_study(ns: Sequence[int] = (32, 64, 128)) -> RefinementStudy:
    """Energies of the composed minimizer at each resolution."""
    energies = []
    for n in ns:
        energies.append(dirichlet_energy_w(compose_minimizer(harmonic_solve(n))))
        logfire.debug("refinement level", n=n, energy=energies[-1])
    return RefinementStudy(ns=list(ns), energies=energies)


def interior_max_principle(harmonic: HarmonicSolution) -> tuple[float, float]:
    """(max interior - max boundary, min boundary - min interior); both <= 0."""
    s = harmonic.values
    inner = s[1:-1, 1:-1]
    mask = np.ones_like(s, dtype=bool)
    mask[1:-1, 1:-1] = False
    edge = s[mask]
    return float(inner.max() - edge.max()), float(edge.min() - inner.min())


def field_columns(sigma: ShearGridField) -> NDArray[np.float64]:
    """Rows (x1, x2, sigma, 1 + D2 sigma, region) for CSV output."""
    grid = sigma.grid
    return np.column_stack(
        [
            grid.X1.ravel(),
            grid.X2.ravel(),
            sigma.sigma.ravel(),
            sigma.constraint().ravel(),
            grid.regions.ravel().astype(float),
        ]
    )
