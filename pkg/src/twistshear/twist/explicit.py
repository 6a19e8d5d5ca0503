"""Explicit twist solutions of the energy-momentum equations (h = h_inf).

The map is u(r, t) = rho(r) e_r(t + psi(r)) on the annulus a < r < b. On the
hedgehog annulus [a, k] the profile is the plateau rho = a, so the whole
region is crushed onto the inner circle and det grad u = 0 there. On (k, b]
rho follows the closed form below and u is harmonic.

With A = a^2 + w^2/a^2 and B = a^2 - w^2/a^2:
    rho^2 = (A (r^2/k^2 + k^2/r^2) + 2B) / 4                  on (k, b]
    psi   = (w/a^2) ln(r/a)                                    on [a, k]
    psi   = (w/a^2) ln(k/a) + atan((A r^2/k^2 + B) / (2w)) - atan(a^2/w)
    w^2   = (4 b^4 k^2 a^2 - a^4 (b^2 + k^2)^2) / (b^2 - k^2)^2

CRITICAL: on the hedgehog annulus Laplacian u = -(a/r^2) kappa e~_r with
kappa = 1 + w^2/a^4. Every stability constant below (the weight of the
hedgehog integral, r*) is written with a * kappa, which is the
dimensionally consistent form and coincides with the usual a = 1 formulas.
"""

from collections.abc import Callable
from dataclasses import dataclass
from functools import cached_property

import logfire
import numpy as np
from numpy.polynomial.legendre import leggauss
from numpy.typing import ArrayLike, NDArray

from twistshear.config import get_settings
from twistshear.errors import DomainError, NonlinearSolveError, ParameterRangeError
from twistshear.kernel.algebra2d import (
    PlanarCurve,
    apply_J,
    cof2,
    det2,
    e_r,
    e_tau,
    frobenius,
    outer,
    polar_gradient,
    winding_number,
)
from twistshear.numerics.quadrature import integrate_1d
from twistshear.numerics.roots import Bracket, find_root
from twistshear.twist.models import AnnulusSpec, ExplicitTwistParams, RadialProfile
from twistshear.twist.perturbations import (
    PerturbationField,
    ScaledField,
    combine,
    random_cone_field,
    random_fourier_field,
    rising_bump,
)

FloatArray = NDArray[np.float64]

BRACKET_SAMPLES = 64
BRACKET_MARGIN = 1e-6
K_XTOL = 1e-15
BOUNDARY_TOL = 1e-10
MAX_HALVINGS = 40
ADMISSIBLE_RTOL = 1e-12
EPS_FLOOR = 1e-12


# ---------------------------------------------------------------------------
# Closed-form profile
# ---------------------------------------------------------------------------


def _radii(spec: AnnulusSpec, r: ArrayLike) -> FloatArray:
    rr = np.asarray(r, dtype=float)
    slack = 1e-12 * spec.b
    if np.any(rr < spec.a - slack) or np.any(rr > spec.b + slack):
        raise DomainError(f"radius outside [{spec.a}, {spec.b}]")
    return np.clip(rr, spec.a, spec.b)


def _out(value: FloatArray) -> FloatArray | float:
    return float(value) if np.ndim(value) == 0 else value


def omega_squared(spec: AnnulusSpec, k: float) -> float:
    """Right-hand side of the w^2(k) relation, without range checks."""
    a, b = spec.a, spec.b
    return (4 * b**4 * k**2 * a**2 - a**4 * (b**2 + k**2) ** 2) / (b**2 - k**2) ** 2


def omega_from_k(spec: AnnulusSpec, k: float) -> float:
    """Angular momentum w > 0 fixed by rho(b) = b for hedgehog radius k.

    Raises:
        ParameterRangeError: If k is outside [a, b) or w^2 <= 0
    """
    if not spec.a <= k < spec.b:
        raise ParameterRangeError(f"hedgehog radius k={k} outside [{spec.a}, {spec.b})")
    w2 = omega_squared(spec, k)
    if not w2 > 0:
        raise ParameterRangeError(f"omega^2 = {w2} is not positive at k={k}")
    return float(np.sqrt(w2))


def _rho_sq(a: float, k: float, omega: float, r: FloatArray) -> FloatArray:
    big_a = a**2 + omega**2 / a**2
    big_b = a**2 - omega**2 / a**2
    return 0.25 * (big_a * (r**2 / k**2 + k**2 / r**2) + 2 * big_b)


def _psi_outer(a: float, k: float, omega: float, r: FloatArray) -> FloatArray:
    big_a = a**2 + omega**2 / a**2
    big_b = a**2 - omega**2 / a**2
    return (
        omega / a**2 * np.log(k / a)
        + np.arctan((big_a * r**2 / k**2 + big_b) / (2 * omega))
        - np.arctan(a**2 / omega)
    )


def rho_eval(p: ExplicitTwistParams, spec: AnnulusSpec, r: ArrayLike) -> FloatArray | float:
    """Radial profile rho(r)."""
    rr = _radii(spec, r)
    outer_branch = np.sqrt(np.maximum(_rho_sq(spec.a, p.k, p.omega, rr), 0.0))
    return _out(np.where(rr <= p.k, spec.a, outer_branch))


def rhodot_eval(p: ExplicitTwistParams, spec: AnnulusSpec, r: ArrayLike) -> FloatArray | float:
    """rho'(r); zero on the plateau."""
    rr = _radii(spec, r)
    big_a = spec.a**2 + p.omega**2 / spec.a**2
    rho = np.sqrt(np.maximum(_rho_sq(spec.a, p.k, p.omega, rr), spec.a**2))
    rho_rhodot = 0.25 * big_a * (rr / p.k**2 - p.k**2 / rr**3)
    return _out(np.where(rr <= p.k, 0.0, rho_rhodot / rho))


def psi_eval(p: ExplicitTwistParams, spec: AnnulusSpec, r: ArrayLike) -> FloatArray | float:
    """Twist angle psi(r) with psi(a) = 0."""
    rr = _radii(spec, r)
    inner = p.omega / spec.a**2 * np.log(rr / spec.a)
    return _out(np.where(rr <= p.k, inner, _psi_outer(spec.a, p.k, p.omega, rr)))


def psidot_eval(p: ExplicitTwistParams, spec: AnnulusSpec, r: ArrayLike) -> FloatArray | float:
    """psi'(r) = w / (r rho^2)."""
    rr = _radii(spec, r)
    rho = np.asarray(rho_eval(p, spec, rr))
    return _out(p.omega / (rr * rho**2))


def psi_at_b(spec: AnnulusSpec, k: float) -> float:
    """Total twist psi(b; k) as a function of the hedgehog radius."""
    omega = omega_from_k(spec, k)
    return float(_psi_outer(spec.a, k, omega, np.asarray(spec.b)))


def sample_psi_b(spec: AnnulusSpec, count: int = 100) -> tuple[FloatArray, FloatArray]:
    """Sample k -> psi(b; k) on ``count`` interior points of (a, b)."""
    ks = np.linspace(spec.a, spec.b, count + 2)[1:-1]
    return ks, np.array([psi_at_b(spec, float(k)) for k in ks])


def radial_profile(p: ExplicitTwistParams, spec: AnnulusSpec, n: int = 1001) -> RadialProfile:
    """Sample the closed-form profile on n uniform radii."""
    r = np.linspace(spec.a, spec.b, n)
    return RadialProfile(
        r=r,
        rho=np.asarray(rho_eval(p, spec, r)),
        rhodot=np.asarray(rhodot_eval(p, spec, r)),
        psi=np.asarray(psi_eval(p, spec, r)),
        psidot=np.asarray(psidot_eval(p, spec, r)),
    )


# ---------------------------------------------------------------------------
# Parameter solve
# ---------------------------------------------------------------------------


def solve_winding_params(spec: AnnulusSpec, N: int) -> ExplicitTwistParams:  # noqa: N803
    """Find the unique hedgehog radius k with psi(b; k) = 2 pi N.

    The sign change is bracketed by 64 samples placed log-uniformly in the
    distance to b (where psi(b; .) has its pole), then refined with Brent.

    Raises:
        ParameterRangeError: If N < 1
        BracketError: If no sign change is found; carries the psi(b; .) samples
        NonlinearSolveError: If the root misses rho(b) = b or psi(b) = 2 pi N by more
            than BOUNDARY_TOL
    """
    if N < 1:
        raise ParameterRangeError(f"explicit twists need N >= 1, got {N}")
    a, b = spec.a, spec.b
    target = 2 * np.pi * N
    lo, hi = a + BRACKET_MARGIN * (b - a), b - BRACKET_MARGIN * (b - a)
    grid = b - np.geomspace(b - lo, b - hi, BRACKET_SAMPLES)

    with logfire.span("solve_winding_params", a=a, b=b, N=N):
        bracket = Bracket.scan(lambda k: psi_at_b(spec, k) - target, grid)
        k = find_root(lambda k: psi_at_b(spec, k) - target, bracket, tol=K_XTOL)
        omega = omega_from_k(spec, k)
        params = ExplicitTwistParams(N=N, omega=omega, k=k, c=-(a**2) + omega**2 / a**2)
        residual_rho = abs(float(rho_eval(params, spec, b)) - b)
        residual_psi = abs(float(psi_eval(params, spec, b)) - target)
        logfire.info(
            "explicit twist solved", N=N, k=k, omega=omega,
            residual_rho=residual_rho, residual_psi=residual_psi,
        )
        if max(residual_rho, residual_psi) > BOUNDARY_TOL:
            logfire.error("boundary residual above tolerance", rho=residual_rho, psi=residual_psi)
            raise NonlinearSolveError(
                f"explicit twist for N={N} misses the outer boundary: "
                f"rho residual {residual_rho:.3e}, psi residual {residual_psi:.3e}",
                history=[residual_rho, residual_psi],
            )
    return params


# ---------------------------------------------------------------------------
# Field, residuals, energy
# ---------------------------------------------------------------------------


def field_polar(
    p: ExplicitTwistParams, spec: AnnulusSpec, r: ArrayLike, theta: ArrayLike
) -> tuple[FloatArray, FloatArray, FloatArray]:
    """(u, grad u, det grad u) at polar coordinates."""
    rr, tt = np.broadcast_arrays(_radii(spec, r), np.asarray(theta, dtype=float))
    rho = np.asarray(rho_eval(p, spec, rr))
    rhodot = np.asarray(rhodot_eval(p, spec, rr))
    psidot = p.omega / (rr * rho**2)
    alpha = tt + np.asarray(psi_eval(p, spec, rr))
    er_t, et_t = e_r(alpha), e_tau(alpha)
    er, et = e_r(tt), e_tau(tt)
    grad = (
        outer(rhodot[..., None] * er_t, er)
        + outer((rho * psidot)[..., None] * et_t, er)
        + outer((rho / rr)[..., None] * et_t, et)
    )
    u = rho[..., None] * er_t
    return u, grad, rho * rhodot / rr


def field_eval(
    p: ExplicitTwistParams, spec: AnnulusSpec, x: ArrayLike
) -> tuple[FloatArray, FloatArray, FloatArray | float]:
    """Evaluate u, grad u and det grad u at cartesian point(s) x.

    Raises:
        DomainError: If a point lies outside the closed annulus
    """
    pts = np.asarray(x, dtype=float)
    r = np.hypot(pts[..., 0], pts[..., 1])
    theta = np.arctan2(pts[..., 1], pts[..., 0])
    u, grad, det = field_polar(p, spec, r, theta)
    return u, grad, _out(det)


def em_residuals(
    p: ExplicitTwistParams, spec: AnnulusSpec, grid: ArrayLike
) -> tuple[float, float]:
    """Energy-momentum residuals on a radial grid.

    Returns:
        (max |r^2 (rho'^2 + rho^2 psi'^2 - rho^2/r^2) - c|, max |r rho^2 psi' - w|)
    """
    r = _radii(spec, grid)
    rho = np.asarray(rho_eval(p, spec, r))
    rhodot = np.asarray(rhodot_eval(p, spec, r))
    psidot = np.asarray(psidot_eval(p, spec, r))
    first = r**2 * (rhodot**2 + rho**2 * psidot**2 - rho**2 / r**2) - p.c
    second = r * rho**2 * psidot - p.omega
    return float(np.max(np.abs(first))), float(np.max(np.abs(second)))


def eq15_residual(p: ExplicitTwistParams, spec: AnnulusSpec, grid: ArrayLike) -> float:
    """max |rho' - sqrt(rho^2 - w^2/rho^2 - a^2 + w^2/a^2) / r| on the outer part of grid."""
    r = _radii(spec, grid)
    r = r[r > p.k]
    if r.size == 0:
        return 0.0
    rho = np.asarray(rho_eval(p, spec, r))
    rhodot = np.asarray(rhodot_eval(p, spec, r))
    a2, w2 = spec.a**2, p.omega**2
    root = np.sqrt(np.maximum(rho**2 - w2 / rho**2 - a2 + w2 / a2, 0.0))
    return float(np.max(np.abs(rhodot - root / r)))


def _energy_density(p: ExplicitTwistParams, spec: AnnulusSpec) -> Callable[[float], float]:
    def density(r: float) -> float:
        rho = float(rho_eval(p, spec, r))
        rhodot = float(rhodot_eval(p, spec, r))
        return r * rhodot**2 + p.omega**2 / (r * rho**2) + rho**2 / r

    return density


def dirichlet_energy(p: ExplicitTwistParams, spec: AnnulusSpec, tol: float | None = None) -> float:
    """D(u) = 2 pi int_a^b r (rho'^2 + rho^2 psi'^2 + rho^2/r^2) dr.

    The quadrature is split at k; ``tol`` is relative to the energy scale.
    """
    tol = tol if tol is not None else get_settings().quad_tol
    scale = (p.omega**2 / spec.a**2 + spec.a**2) * np.log(spec.b / spec.a) + spec.b**2
    density = _energy_density(p, spec)
    with logfire.span("dirichlet_energy", N=p.N):
        inner = integrate_1d(density, spec.a, p.k, tol * scale)
        outer_part = integrate_1d(density, p.k, spec.b, tol * scale)
    return float(2 * np.pi * (inner + outer_part))


def identity_energy(spec: AnnulusSpec) -> float:
    """Dirichlet energy of the identity, 2 pi (b^2 - a^2)."""
    return float(2 * np.pi * (spec.b**2 - spec.a**2))


def linear_twist_energy(spec: AnnulusSpec, N: int) -> float:  # noqa: N803
    """Dirichlet energy of r e_r(t + 2 pi N (r - a)/(b - a)), an admissible competitor."""
    slope = 2 * np.pi * N / (spec.b - spec.a)
    return float(2 * np.pi * ((spec.b**2 - spec.a**2) + slope**2 * (spec.b**4 - spec.a**4) / 4))


def quarter_twist_check(p: ExplicitTwistParams, spec: AnnulusSpec) -> tuple[float, bool]:
    """Twist accumulated outside the hedgehog, psi(b) - psi(k), against pi/2."""
    value = float(psi_eval(p, spec, spec.b)) - float(psi_eval(p, spec, p.k))
    return value, bool(0.0 < value < np.pi / 2)


def hedgehog_coefficient(p: ExplicitTwistParams, spec: AnnulusSpec) -> float:
    """kappa = 1 + w^2/a^4 in Laplacian u = -(a/r^2) kappa e~_r on the hedgehog."""
    return 1.0 + p.omega**2 / spec.a**4


def r_star(p: ExplicitTwistParams, spec: AnnulusSpec) -> float:
    """Radius beyond which the hedgehog weight a kappa (1/k - 1/r) is >= -1."""
    return 1.0 / (1.0 / p.k + 1.0 / (spec.a * hedgehog_coefficient(p, spec)))


def hedgehog_weight(p: ExplicitTwistParams, spec: AnnulusSpec, r: ArrayLike) -> FloatArray:
    """2 a kappa (1/k - 1/r), the det grad phi weight in the hedgehog integral."""
    rr = np.asarray(r, dtype=float)
    return 2 * spec.a * hedgehog_coefficient(p, spec) * (1.0 / p.k - 1.0 / rr)


# ---------------------------------------------------------------------------
# Jacobian of test fields and the boundary-term identity
# ---------------------------------------------------------------------------


def _field_gradient(
    phi: PerturbationField, r: FloatArray, theta: FloatArray
) -> tuple[FloatArray, FloatArray, FloatArray]:
    value, d_r, d_theta = phi.evaluate(r, theta)
    return value, d_theta, polar_gradient(d_r, d_theta, r, theta)


def lemma5_identity(
    phi: PerturbationField,
    spec: AnnulusSpec,
    R: float,  # noqa: N803
    n_gauss: int = 48,
    n_theta: int = 128,
) -> tuple[float, float]:
    """Area integral of det grad phi over A(a, R) against the boundary term on S_R.

    lhs = int_{a<|x|<R} det grad phi dx uses Gauss-Legendre panels in r split
    at the field's breakpoints and the periodic trapezoid rule in theta.
    rhs = 1/2 int_{S_R} J phi . phi_tau dS.
    """
    if not spec.a < R < spec.b:
        raise DomainError(f"R={R} must lie strictly inside ({spec.a}, {spec.b})")
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    w_theta = 2 * np.pi / n_theta
    cuts = sorted({spec.a, R, *(bp for bp in phi.breakpoints if spec.a < bp < R)})
    nodes, weights = leggauss(n_gauss)

    lhs = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        r = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
        w_r = 0.5 * (hi - lo) * weights
        rr, tt = np.meshgrid(r, theta, indexing="ij")
        _, d_r, d_theta = phi.evaluate(rr, tt)
        # r det grad phi = J phi_r . phi_theta
        integrand = np.sum(apply_J(d_r) * d_theta, axis=-1)
        lhs += float(np.sum(w_r[:, None] * integrand) * w_theta)

    value, _, d_theta = phi.evaluate(np.full(n_theta, R), theta)
    rhs = 0.5 * float(np.sum(np.sum(apply_J(value) * d_theta, axis=-1)) * w_theta)
    return lhs, rhs


# ---------------------------------------------------------------------------
# Perturbation energetics
# ---------------------------------------------------------------------------


@dataclass
class PerturbationOutcome:
    """Energy change of u + phi against u.

    Attributes:
        admissible: det grad (u + phi) >= -gridtol at every quadrature node
        delta_I: I(u + phi) - I(u) on the fine grid, I = 1/2 int |grad u|^2
        h_integral: int_H |grad phi|^2 + 2 a kappa (1/k - 1/r) det grad phi
        eps_grid: 10 x the coarse/fine difference of delta_I
        min_det: smallest det grad (u + phi) on the fine grid
    """

    admissible: bool
    delta_I: float  # noqa: N815
    h_integral: float
    eps_grid: float
    min_det: float

    @property
    def passed(self) -> bool:
        """Energy does not drop beyond the measured discretization error."""
        return self.delta_I >= -self.eps_grid


class TwistQuadrature:
    """Tensor midpoint grid on the annulus with grad u cached.

    The radial cells are aligned so r = k is a cell edge.

    Usage:
        grid = TwistQuadrature(params, spec, n_r=200, n_theta=128)
        d_energy, ok, min_det, h_int = grid.evaluate(phi)
    """

    def __init__(self, p: ExplicitTwistParams, spec: AnnulusSpec, n_r: int, n_theta: int):
        self.p = p
        self.spec = spec
        n_inner = max(1, round(n_r * (p.k - spec.a) / (spec.b - spec.a)))
        n_outer = max(1, n_r - n_inner)
        edges = np.concatenate(
            [np.linspace(spec.a, p.k, n_inner + 1), np.linspace(p.k, spec.b, n_outer + 1)[1:]]
        )
        self.r = 0.5 * (edges[1:] + edges[:-1])
        self.dr = np.diff(edges)
        self.theta = 2 * np.pi * (np.arange(n_theta) + 0.5) / n_theta
        self.dtheta = 2 * np.pi / n_theta
        self.rr, self.tt = np.meshgrid(self.r, self.theta, indexing="ij")
        self.weight = (self.rr * self.dr[:, None]) * self.dtheta
        self.hedgehog = self.rr <= p.k

    @cached_property
    def _u(self) -> tuple[FloatArray, FloatArray, FloatArray]:
        _, grad, det = field_polar(self.p, self.spec, self.rr, self.tt)
        return grad, cof2(grad), det

    def evaluate(self, phi: PerturbationField) -> tuple[float, bool, float, float]:
        """Return (delta_I, admissible, min det grad(u+phi), hedgehog integral)."""
        grad_u, cof_u, det_u = self._u
        _, _, grad_phi = _field_gradient(phi, self.rr, self.tt)
        det_phi = det2(grad_phi)
        sq_phi = frobenius(grad_phi, grad_phi)
        det_sum = det_u + frobenius(cof_u, grad_phi) + det_phi
        tol = ADMISSIBLE_RTOL * (1.0 + np.sqrt(frobenius(grad_u, grad_u) * sq_phi))
        admissible = bool(np.all(det_sum >= -tol))
        delta = float(np.sum((frobenius(grad_u, grad_phi) + 0.5 * sq_phi) * self.weight))
        weight_h = hedgehog_weight(self.p, self.spec, self.rr)
        h_density = np.where(self.hedgehog, sq_phi + weight_h * det_phi, 0.0)
        h_integral = float(np.sum(h_density * self.weight))
        return delta, admissible, float(np.min(det_sum)), h_integral


class MinimalityProbe:
    """Coarse/fine pair of quadrature grids for energy-difference tests."""

    def __init__(self, p: ExplicitTwistParams, spec: AnnulusSpec, n_r: int = 200, n_theta: int = 128):
        self.p = p
        self.spec = spec
        self.coarse = TwistQuadrature(p, spec, n_r, n_theta)
        self.fine = TwistQuadrature(p, spec, 2 * n_r, 2 * n_theta)

    def admissible(self, phi: PerturbationField) -> bool:
        """Nodewise admissibility on the fine grid."""
        return self.fine.evaluate(phi)[1]

    def test(self, phi: PerturbationField) -> PerturbationOutcome:
        """Energy change with refinement-measured tolerance."""
        coarse_delta = self.coarse.evaluate(phi)[0]
        delta, admissible, min_det, h_integral = self.fine.evaluate(phi)
        eps = max(10.0 * abs(coarse_delta - delta), EPS_FLOOR)
        return PerturbationOutcome(
            admissible=admissible,
            delta_I=delta,
            h_integral=h_integral,
            eps_grid=eps,
            min_det=min_det,
        )

    def shrink(self, phi: PerturbationField) -> PerturbationField | None:
        """Halve phi until admissible; None after 40 halvings."""
        scale = 1.0
        for _ in range(MAX_HALVINGS + 1):
            trial = phi if scale == 1.0 else ScaledField(phi, scale)
            if self.admissible(trial):
                return trial
            scale *= 0.5
        return None


def perturbation_test(
    p: ExplicitTwistParams,
    spec: AnnulusSpec,
    phi: PerturbationField,
    n_r: int = 200,
    n_theta: int = 128,
) -> PerturbationOutcome:
    """Test u + phi for admissibility and energy change (phi vanishes on the boundary)."""
    return MinimalityProbe(p, spec, n_r, n_theta).test(phi)


def h_integral(
    p: ExplicitTwistParams,
    spec: AnnulusSpec,
    phi: PerturbationField,
    n_r: int = 200,
    n_theta: int = 128,
) -> float:
    """int_H |grad phi|^2 + 2 a kappa (1/k - 1/r) det grad phi on the fine grid."""
    return TwistQuadrature(p, spec, 2 * n_r, 2 * n_theta).evaluate(phi)[3]


@dataclass
class BatteryResult:
    """Summary of a random perturbation battery."""

    kind: str
    outcomes: list[PerturbationOutcome]
    discarded: int

    @property
    def worst_margin(self) -> float:
        """min(delta_I + eps_grid); non-negative when every test passes."""
        if not self.outcomes:
            return 0.0
        return min(o.delta_I + o.eps_grid for o in self.outcomes)

    @property
    def passed(self) -> bool:
        """Every admissible perturbation raised the energy up to eps_grid."""
        return bool(self.outcomes) and all(o.passed for o in self.outcomes)


def minimality_battery(
    p: ExplicitTwistParams,
    spec: AnnulusSpec,
    rng: np.random.Generator,
    count: int = 100,
    kind: str = "outer",
    n_r: int = 120,
    n_theta: int = 96,
) -> BatteryResult:
    """Random admissible perturbations of the explicit twist.

    kind="outer": fields supported in A(r*, b), a cone part rising
    across the hedgehog plus a free Fourier bump outside it.
    kind="cone": small multiples eps * phi of cone fields supported in A.
    """
    probe = MinimalityProbe(p, spec, n_r, n_theta)
    a, b, k = spec.a, spec.b, p.k
    rise_until = k + 0.25 * (b - k)
    lo = max(r_star(p, spec), a) if kind == "outer" else a

    def psi(r: FloatArray) -> FloatArray:
        return np.asarray(psi_eval(p, spec, np.clip(r, a, b)))

    def psidot(r: FloatArray) -> FloatArray:
        return np.asarray(psidot_eval(p, spec, np.clip(r, a, b)))

    outcomes: list[PerturbationOutcome] = []
    discarded = 0
    with logfire.span("minimality_battery", kind=kind, count=count, N=p.N):
        for _ in range(count):
            cone = random_cone_field(
                rng, rising_bump(lo, b, rise_until), psi, psidot,
                amplitude=float(rng.uniform(0.05, 0.5)),
            )
            if kind == "outer":
                free = random_fourier_field(
                    rng, rise_until, b, amplitude=float(rng.uniform(0.05, 0.5))
                )
                phi: PerturbationField = combine([cone, free])
            elif kind == "cone":
                phi = ScaledField(cone, float(10.0 ** rng.uniform(-3, -1)))
            else:
                raise ValueError(f"unknown battery kind {kind!r}")
            shrunk = probe.shrink(phi)
            if shrunk is None:
                discarded += 1
                continue
            outcomes.append(probe.test(shrunk))
        result = BatteryResult(kind=kind, outcomes=outcomes, discarded=discarded)
        logfire.info(
            "battery done", kind=kind, tested=len(outcomes), discarded=discarded,
            worst_margin=result.worst_margin,
        )
    return result


# ---------------------------------------------------------------------------
# Hedgehog Laplacian, winding
# ---------------------------------------------------------------------------


def hedgehog_laplacian_check(
    p: ExplicitTwistParams, spec: AnnulusSpec, points: ArrayLike, h: float = 1e-3
) -> float:
    """Max deviation of the 5-point Laplacian of u from its closed form.

    The closed form is -(a/r^2) kappa e~_r on the hedgehog and 0 outside it.
    Points must sit at least h away from |x| = a, k, b.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    shifts = np.array([[h, 0.0], [-h, 0.0], [0.0, h], [0.0, -h]])
    centre = field_eval(p, spec, pts)[0]
    lap = sum(field_eval(p, spec, pts + s)[0] for s in shifts) - 4 * centre
    lap = lap / h**2
    r = np.hypot(pts[:, 0], pts[:, 1])
    theta = np.arctan2(pts[:, 1], pts[:, 0])
    e_tilde = e_r(theta + np.asarray(psi_eval(p, spec, r)))
    magnitude = np.where(r <= p.k, spec.a / r**2 * hedgehog_coefficient(p, spec), 0.0)
    expected = -magnitude[:, None] * e_tilde
    return float(np.max(np.linalg.norm(lap - expected, axis=-1)))


def winding_of_map(
    u_map: Callable[[FloatArray, float], FloatArray],
    spec: AnnulusSpec,
    theta: float,
    samples: int = 4096,
) -> int:
    """Winding number of r -> u(r, theta)/|u(r, theta)| for r in [a, b]."""
    r = np.linspace(spec.a, spec.b, samples)
    u = np.asarray(u_map(r, theta), dtype=float)
    direction = u / np.linalg.norm(u, axis=-1, keepdims=True)
    return int(round(winding_number(PlanarCurve(direction))))


def winding_verify(
    p: ExplicitTwistParams, spec: AnnulusSpec, theta: float, samples: int = 4096
) -> int:
    """Winding number of the ray image; equals N for a solved twist."""

    def u_map(r: FloatArray, t: float) -> FloatArray:
        return field_polar(p, spec, r, np.full_like(r, t))[0]

    return winding_of_map(u_map, spec, theta, samples)
