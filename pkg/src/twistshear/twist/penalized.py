"""Symmetric twists for the penalized energy I0 = int 1/2 |grad u|^2 + h0(det grad u).

The profile (rho, psi) solves

    [r rho' + rho h0'(d)]' = rho/r + r rho psi'^2 + rho' h0'(d),   r rho^2 psi' = w,

with d = rho rho'/r, rho(a) = a, rho(b) = b, psi(a) = 0, psi(b) = 2 pi N. It is
found by shooting on (rho'(a), w) with a 2D damped Newton iteration; the
Jacobian of the shooting map is taken by finite differences.
"""

from dataclasses import dataclass, field
from typing import Any

import logfire
import numpy as np
from numpy.typing import NDArray

from twistshear.config import get_settings
from twistshear.errors import (
    InadmissibleStateError,
    IntegrationError,
    NonlinearSolveError,
    ParameterRangeError,
    ShootingError,
)
from twistshear.numerics.newton import newton_solve
from twistshear.numerics.ode import OdeState, ode_solve
from twistshear.numerics.quadrature import integrate_1d
from twistshear.twist.explicit import solve_winding_params
from twistshear.twist.models import AnnulusSpec, RadialProfile
from twistshear.twist.penalty import PenaltyFunction

FloatArray = NDArray[np.float64]

SHOOT_RTOL = 1e-11
SHOOT_ATOL = 1e-13
GRID_POINTS = 2001
START_SLOPES = (1.0, 0.25, 0.5, 2.0)
START_OMEGA_SCALES = (1.0, 0.5, 2.0)
FD_STEP = 1e-6
# Second differences below this are treated as zero when counting sign changes
CURVATURE_NOISE = 1e-9


def el_rhs(
    r: float,
    rho: float,
    rhodot: float,
    omega: float,
    h: PenaltyFunction,
    d_min: float | None = None,
) -> float:
    """rho'' from the expanded Euler-Lagrange equation.

    rho'' = [(rho + w^2/rho^3)/r - rho' + (rho/r)(d - rho'^2) h0''(d)]
            / [r + (rho^2/r) h0''(d)]

    Raises:
        InadmissibleStateError: If d <= d_min or rho <= 0
    """
    d_min = d_min if d_min is not None else get_settings().jacobian_floor
    d = rho * rhodot / r
    if rho <= 0 or not d > d_min:
        raise InadmissibleStateError(f"inadmissible state at r={r:.6g}: d={d:.3e}")
    h2 = float(h.d2h0(np.asarray(d)))
    numerator = (rho + omega**2 / rho**3) / r - rhodot + (rho / r) * (d - rhodot**2) * h2
    return numerator / (r + rho**2 / r * h2)


@dataclass
class PenalizedSolution:
    """Converged shooting solution on a uniform radial grid.

    Attributes:
        profile: rho, rho', psi, psi' on the grid
        omega: Angular momentum r rho^2 psi'
        rhodot_a: Shooting slope rho'(a)
        d: Jacobian rho rho'/r
        z: 1/2 (rho'^2 + rho^2 psi'^2 + rho^2/r^2) + d h0'(d) - h0(d)
        rhoddot: rho'' from the Euler-Lagrange right-hand side
        residuals: (|rho(b) - b|, |psi(b) - 2 pi N|)
        dense: Continuous interpolant of (rho, rho', psi)
    """

    spec: AnnulusSpec
    N: int
    penalty: str
    profile: RadialProfile
    omega: float
    rhodot_a: float
    d: FloatArray
    z: FloatArray
    rhoddot: FloatArray
    residuals: tuple[float, float]
    iterations: int
    start: tuple[float, float]
    dense: Any = field(repr=False, default=None)

    @property
    def jacobian_floor(self) -> float:
        """min d over the grid."""
        return float(np.min(self.d))

    def columns(self) -> dict[str, FloatArray]:
        """CSV columns r, rho, rhodot, psi, d, z."""
        return {
            "r": self.profile.r,
            "rho": self.profile.rho,
            "rhodot": self.profile.rhodot,
            "psi": self.profile.psi,
            "d": self.d,
            "z": self.z,
        }


class Shooter:
    """Integrates the Euler-Lagrange system for given (rho'(a), w).

    Usage:
        shooter = Shooter(spec, N, penalty)
        mismatch = shooter.residual(np.array([1.0, 8.0]))
    """

    def __init__(
        self,
        spec: AnnulusSpec,
        N: int,  # noqa: N803
        h: PenaltyFunction,
        rtol: float = SHOOT_RTOL,
        atol: float = SHOOT_ATOL,
    ):
        self.spec = spec
        self.N = N
        self.h = h
        self.rtol = rtol
        self.atol = atol
        self.d_min = get_settings().jacobian_floor
        self.calls = 0

    def _rhs(self, omega: float) -> Any:
        h, d_min = self.h, self.d_min

        def rhs(r: float, y: FloatArray) -> FloatArray:
            rho, rhodot, _ = y
            return np.array([rhodot, el_rhs(r, rho, rhodot, omega, h, d_min), omega / (r * rho**2)])

        return rhs

    def integrate(self, x: FloatArray, r_eval: FloatArray | None = None) -> Any:
        """Integrate from r = a with rho = a, rho' = x[0], psi = 0 and w = x[1]."""
        self.calls += 1
        slope, omega = float(x[0]), float(x[1])
        s0 = OdeState(r=self.spec.a, y=np.array([self.spec.a, slope, 0.0]), rhs=self._rhs(omega))
        return ode_solve(s0, self.spec.b, tol=self.rtol, atol=self.atol, r_eval=r_eval)

    def residual(self, x: FloatArray) -> FloatArray:
        """(rho(b) - b, psi(b) - 2 pi N); +inf when the shot is inadmissible."""
        if not x[0] > 0:
            return np.full(2, np.inf)
        try:
            end = self.integrate(x).final.y
        except IntegrationError:
            return np.full(2, np.inf)
        return np.array([end[0] - self.spec.b, end[2] - 2 * np.pi * self.N])

    def jacobian(self, x: FloatArray) -> FloatArray:
        """Finite-difference Jacobian; steps flip sign when a side is inadmissible."""
        f0 = self.residual(x)
        jac = np.empty((2, 2))
        for j in range(2):
            step = FD_STEP * max(1.0, abs(x[j]))
            for sign in (1.0, -1.0):
                xp = x.copy()
                xp[j] += sign * step
                fp = self.residual(xp)
                if np.all(np.isfinite(fp)):
                    jac[:, j] = (fp - f0) / (sign * step)
                    break
            else:
                jac[:, j] = np.nan
        return jac


def _initial_omega(spec: AnnulusSpec, N: int) -> float:  # noqa: N803
    return solve_winding_params(spec, N).omega if N >= 1 else 0.0


def shoot(
    spec: AnnulusSpec,
    N: int,  # noqa: N803
    h: PenaltyFunction,
    tol: float | None = None,
    rtol: float = SHOOT_RTOL,
    grid_points: int = GRID_POINTS,
) -> PenalizedSolution:
    """Solve the penalized symmetric twist by multi-start shooting.

    Starts from rho'(a) = 1 and the explicit twist's w, then cycles through
    rho'(a) in {1, 0.25, 0.5, 2} and w scaled by {1, 0.5, 2}.

    Raises:
        ParameterRangeError: If N < 0
        ShootingError: If every start fails; carries the residual landscape
    """
    if N < 0:
        raise ParameterRangeError(f"winding number must be non-negative, got {N}")
    tol = tol if tol is not None else get_settings().shooting_tol
    shooter = Shooter(spec, N, h, rtol=rtol)
    omega0 = _initial_omega(spec, N)
    if N == 0:
        starts = [(slope, 0.0) for slope in START_SLOPES]
    else:
        starts = [(slope, omega0 * scale) for scale in START_OMEGA_SCALES for slope in START_SLOPES]

    landscape: list[dict[str, float]] = []
    history: list[Any] = []
    with logfire.span("shoot", N=N, penalty=h.name, a=spec.a, b=spec.b):
        for start in starts:
            x0 = np.array(start)
            f0 = shooter.residual(x0)
            landscape.append(
                {"rhodot_a": start[0], "omega": start[1], "residual": float(np.linalg.norm(f0))}
            )
            if not np.all(np.isfinite(f0)):
                continue
            if N == 0:
                # w stays 0; the angular equation is satisfied identically
                result = _shoot_radial_only(shooter, x0, 0.1 * tol)
            else:
                try:
                    result = newton_solve(
                        shooter.residual, shooter.jacobian, x0, tol=0.1 * tol, max_iters=40,
                        admissible=lambda x, _: bool(x[0] > 0),
                        norm=lambda f: float(np.max(np.abs(f))),
                    )
                except NonlinearSolveError as e:
                    history.extend(e.history)
                    logfire.info("shooting start failed", start=start, reason=str(e))
                    continue
            solution = _assemble(shooter, result.x, result.iterations, start, grid_points)
            logfire.info(
                "shooting converged", N=N, rhodot_a=solution.rhodot_a, omega=solution.omega,
                residuals=solution.residuals, shots=shooter.calls,
            )
            return solution

    raise ShootingError(
        f"shooting failed from all {len(starts)} starts", history=history, landscape=landscape
    )


def _shoot_radial_only(shooter: Shooter, x0: FloatArray, tol: float) -> Any:
    def residual(v: FloatArray) -> FloatArray:
        return shooter.residual(np.array([v[0], 0.0]))[:1]

    def jacobian(v: FloatArray) -> FloatArray:
        return shooter.jacobian(np.array([v[0], 0.0]))[:1, :1]

    result = newton_solve(residual, jacobian, x0[:1], tol=tol, admissible=lambda v, _: bool(v[0] > 0))
    result.x = np.array([result.x[0], 0.0])
    return result


def _assemble(
    shooter: Shooter, x: FloatArray, iterations: int, start: tuple[float, float], n: int
) -> PenalizedSolution:
    spec, h = shooter.spec, shooter.h
    r = np.linspace(spec.a, spec.b, n)
    traj = shooter.integrate(x, r_eval=r)
    rho, rhodot, psi = traj.y
    omega = float(x[1])
    psidot = omega / (r * rho**2)
    d = rho * rhodot / r
    z = 0.5 * (rhodot**2 + rho**2 * psidot**2 + rho**2 / r**2) + d * h.dh0(d) - h.h0(d)
    rhoddot = np.array(
        [el_rhs(ri, pi, qi, omega, h, shooter.d_min) for ri, pi, qi in zip(r, rho, rhodot)]
    )
    return PenalizedSolution(
        spec=spec,
        N=shooter.N,
        penalty=h.name,
        profile=RadialProfile(r=r, rho=rho, rhodot=rhodot, psi=psi, psidot=psidot),
        omega=omega,
        rhodot_a=float(x[0]),
        d=d,
        z=z,
        rhoddot=rhoddot,
        residuals=(abs(rho[-1] - spec.b), abs(psi[-1] - 2 * np.pi * shooter.N)),
        iterations=iterations,
        start=start,
        dense=traj.dense,
    )


# ---------------------------------------------------------------------------
# Monitors
# ---------------------------------------------------------------------------


def _fd4(values: FloatArray, step: float) -> FloatArray:
    """Fourth-order central first derivative at interior nodes 2..n-3."""
    v = values
    return (v[:-4] - 8 * v[1:-3] + 8 * v[3:-1] - v[4:]) / (12 * step)


def monotonicity_monitor(sol: PenalizedSolution, h: PenaltyFunction) -> tuple[float, float]:
    """(min forward difference of d, max forward difference of z)."""
    r, rho, rhodot = sol.profile.r, sol.profile.rho, sol.profile.rhodot
    psidot = sol.omega / (r * rho**2)
    d = rho * rhodot / r
    z = 0.5 * (rhodot**2 + rho**2 * psidot**2 + rho**2 / r**2) + d * h.dh0(d) - h.h0(d)
    return float(np.min(np.diff(d))), float(np.max(np.diff(z)))


def z_derivative_check(sol: PenalizedSolution, h: PenaltyFunction) -> float:
    """max |dz/dr (finite differences) + (1/r)[(rho' - rho/r)^2 + w^2/(r^2 rho^2)]|."""
    r, rho, rhodot = sol.profile.r, sol.profile.rho, sol.profile.rhodot
    psidot = sol.omega / (r * rho**2)
    d = rho * rhodot / r
    z = 0.5 * (rhodot**2 + rho**2 * psidot**2 + rho**2 / r**2) + d * h.dh0(d) - h.h0(d)
    closed = -((rhodot - rho / r) ** 2 + sol.omega**2 / (r**2 * rho**2)) / r
    return float(np.max(np.abs(_fd4(z, r[1] - r[0]) - closed[2:-2])))


def flux_consistency(sol: PenalizedSolution, h: PenaltyFunction) -> float:
    """max |(r rho' + rho h0'(d))' - (rho/r + r rho psi'^2 + rho' h0'(d))| by finite differences."""
    r, rho, rhodot = sol.profile.r, sol.profile.rho, sol.profile.rhodot
    d = sol.d
    flux = r * rhodot + rho * h.dh0(d)
    source = rho / r + sol.omega**2 / (r * rho**3) + rhodot * h.dh0(d)
    return float(np.max(np.abs(_fd4(flux, r[1] - r[0]) - source[2:-2])))


def angular_momentum_residual(sol: PenalizedSolution) -> float:
    """max |r rho^2 psi' - w| with psi' differentiated from the integrated psi."""
    r, rho, psi = sol.profile.r, sol.profile.rho, sol.profile.psi
    psidot = _fd4(psi, r[1] - r[0])
    return float(np.max(np.abs(r[2:-2] * rho[2:-2] ** 2 * psidot - sol.omega)))


@dataclass
class MaxPrincipleCheck:
    """Shape of q = rho/r along the solution.

    Attributes:
        q_a, q_b: Endpoint values (both 1)
        q_min: Interior minimum, within [a/b, 1)
        interior_maxima: Count of interior strict local maxima (expected 0)
        inflections: Sign changes of the second differences of q (expected 1)
    """

    q_a: float
    q_b: float
    q_min: float
    q_max_interior: float
    lower_bound: float
    interior_maxima: int
    inflections: int

    @property
    def passed(self) -> bool:
        """All maximum-principle checks hold."""
        return (
            abs(self.q_a - 1.0) < 1e-8
            and abs(self.q_b - 1.0) < 1e-8
            and self.lower_bound <= self.q_min
            and self.q_max_interior < 1.0
            and self.interior_maxima == 0
            and self.inflections == 1
        )


def max_principle_monitor(sol: PenalizedSolution) -> MaxPrincipleCheck:
    """Check that rho/r has no interior maximum, stays in [a/b, 1) and bends once."""
    r, rho = sol.profile.r, sol.profile.rho
    q = rho / r
    interior = q[1:-1]
    is_max = (interior > q[:-2]) & (interior > q[2:])
    second = np.diff(q, 2)
    signs = np.sign(second[np.abs(second) > CURVATURE_NOISE])
    inflections = int(np.count_nonzero(signs[1:] != signs[:-1]))
    return MaxPrincipleCheck(
        q_a=float(q[0]),
        q_b=float(q[-1]),
        q_min=float(interior.min()),
        q_max_interior=float(interior.max()),
        lower_bound=sol.spec.a / sol.spec.b,
        interior_maxima=int(np.count_nonzero(is_max)),
        inflections=inflections,
    )


def energy_I0(sol: PenalizedSolution, h: PenaltyFunction, tol: float | None = None) -> float:  # noqa: N802
    """I0 = 2 pi int_a^b r [1/2 (rho'^2 + rho^2 psi'^2 + rho^2/r^2) + h0(d)] dr on the dense output."""
    tol = tol if tol is not None else get_settings().quad_tol
    omega, dense = sol.omega, sol.dense

    def density(r: float) -> float:
        rho, rhodot, _ = dense(r)
        d = rho * rhodot / r
        kinetic = 0.5 * (rhodot**2 + omega**2 / (r**2 * rho**2) + rho**2 / r**2)
        return float(r * (kinetic + h.energy(d)))

    scale = max(1.0, float(np.max(np.abs(sol.z))) * sol.spec.b**2)
    with logfire.span("energy_I0", N=sol.N):
        return float(2 * np.pi * integrate_1d(density, sol.spec.a, sol.spec.b, tol * scale))


def tolerance_stability(spec: AnnulusSpec, N: int, h: PenaltyFunction) -> float:  # noqa: N803
    """Sup-norm change of rho when the ODE tolerance is halved."""
    coarse = shoot(spec, N, h, rtol=2 * SHOOT_RTOL)
    fine = shoot(spec, N, h, rtol=SHOOT_RTOL)
    return float(np.max(np.abs(coarse.profile.rho - fine.profile.rho)))
