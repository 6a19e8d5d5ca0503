"""Report builder for the explicit symmetric twist."""

import logfire
import numpy as np

from twistshear.experiments.common import emit_figure, emit_table, new_report, rng_for
from twistshear.reporting.models import InvariantReport, RunConfig, table_row
from twistshear.reporting.svg import AnnulusMap
from twistshear.twist import explicit as tx
from twistshear.twist.models import AnnulusSpec, ExplicitTwistParams
from twistshear.twist.perturbations import random_fourier_field

EM_TOL = 1e-8
BOUNDARY_TOL = 1e-10
IDENTITY_TOL = 1e-6
LAPLACIAN_RTOL = 1e-2
WINDING_ANGLES = 8
BOUNDARY_ANGLES = 64
EDGE_OFFSET = 1e-12
IDENTITY_FIELDS = 5
IDENTITY_RADII = 5


def _det_checks(p: ExplicitTwistParams, spec: AnnulusSpec) -> tuple[float, float]:
    """(max |det| on the hedgehog, min det on (k, b])."""
    inner = np.linspace(spec.a, p.k, 2001)
    outer = np.linspace(p.k, spec.b, 2001)[1:]
    _, _, det_in = tx.field_polar(p, spec, inner, np.zeros_like(inner))
    _, _, det_out = tx.field_polar(p, spec, outer, np.zeros_like(outer))
    return float(np.max(np.abs(det_in))), float(np.min(det_out))


def _boundary_displacement(p: ExplicitTwistParams, spec: AnnulusSpec) -> float:
    """max |u(x) - x| over both boundary circles."""
    theta = np.linspace(0.0, 2 * np.pi, BOUNDARY_ANGLES, endpoint=False)
    worst = 0.0
    for r in (spec.a, spec.b):
        x = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
        u, _, _ = tx.field_eval(p, spec, x)
        worst = max(worst, float(np.max(np.linalg.norm(u - x, axis=1))))
    return worst


def _laplacian_points(p: ExplicitTwistParams, spec: AnnulusSpec) -> np.ndarray:
    radii = [0.5 * (spec.a + p.k), 0.5 * (p.k + spec.b)]
    angles = np.linspace(0.0, 2 * np.pi, 4, endpoint=False) + 0.3
    return np.array([[r * np.cos(t), r * np.sin(t)] for r in radii for t in angles])


def _boundary_identity(spec: AnnulusSpec, rng: np.random.Generator) -> float:
    worst = 0.0
    for _ in range(IDENTITY_FIELDS):
        phi = random_fourier_field(rng, spec.a, spec.b)
        for R in rng.uniform(spec.a, spec.b, IDENTITY_RADII):  # noqa: N806
            lhs, rhs = tx.lemma5_identity(phi, spec, float(R))
            worst = max(worst, abs(lhs - rhs))
    return worst


def build_report(config: RunConfig) -> InvariantReport:
    """Solve the explicit twist for config.N and check every closed-form claim."""
    spec = AnnulusSpec(a=config.a, b=config.b)
    report = new_report(config, "twist-explicit")
    N = config.N  # noqa: N806

    with logfire.span("experiment twist-explicit", N=N, a=spec.a, b=spec.b):
        p = tx.solve_winding_params(spec, N)
        a, b = spec.a, spec.b
        report.check(
            "boundary.rho", "rho(b) = b", abs(float(tx.rho_eval(p, spec, b)) - b), BOUNDARY_TOL
        )
        report.check(
            "boundary.psi", "psi(b) = 2 pi N",
            abs(float(tx.psi_eval(p, spec, b)) - 2 * np.pi * N), BOUNDARY_TOL,
        )
        grid = np.linspace(a, b, 10_000)
        em_c, em_w = tx.em_residuals(p, spec, grid)
        report.check("em.radial", "energy-momentum radial constant c", em_c, EM_TOL)
        report.check("em.angular", "energy-momentum angular momentum w", em_w, EM_TOL)
        report.check(
            "boundary.identity", "u = id on both boundary circles",
            _boundary_displacement(p, spec), BOUNDARY_TOL * (1.0 + b),
        )
        report.check(
            "slope.hedgehog_edge", "rho'(k+) = 0",
            abs(float(tx.rhodot_eval(p, spec, p.k + EDGE_OFFSET * (b - a)))), EM_TOL,
        )
        report.check(
            "em.c_closed_form", "c = -a^2 + w^2/a^2",
            abs(p.c - (-(a**2) + p.omega**2 / a**2)), 1e-12,
        )
        report.check(
            "profile.sqrt_ode", "rho' square-root form on (k, b)",
            tx.eq15_residual(p, spec, np.linspace(p.k, b, 10_000)), EM_TOL,
        )
        quarter, _ = tx.quarter_twist_check(p, spec)
        report.check("twist.quarter", "psi(b) - psi(k) < pi/2", quarter, np.pi / 2, "<")

        k_grid, psi_b = tx.sample_psi_b(spec)
        report.check(
            "twist.psi_b_monotone", "k -> psi(b; k) strictly increasing",
            float(np.min(np.diff(psi_b))), 0.0, ">",
        )
        det_in, det_out = _det_checks(p, spec)
        report.check("det.hedgehog_zero", "det grad u = 0 on [a, k]", det_in, 1e-12)
        report.check("det.outer_positive", "det grad u > 0 on (k, b]", det_out, 0.0, ">")

        thetas = np.linspace(0.0, 2 * np.pi, WINDING_ANGLES, endpoint=False)
        windings = [tx.winding_verify(p, spec, float(t)) for t in thetas]
        report.check(
            "winding.rays", "ray images wind N times",
            float(sum(w != N for w in windings)), 0.0,
        )
        report.tables["winding"] = [
            table_row(theta=t, winding=w) for t, w in zip(thetas, windings, strict=True)
        ]

        pts = _laplacian_points(p, spec)
        scale = tx.hedgehog_coefficient(p, spec) / spec.a
        report.check(
            "hedgehog.laplacian", "Laplacian u = -(a/r^2) kappa e_r on the hedgehog",
            tx.hedgehog_laplacian_check(p, spec, pts) / scale, LAPLACIAN_RTOL,
        )
        report.check(
            "identity.boundary_term", "det grad phi integral equals boundary term",
            _boundary_identity(spec, rng_for(config, 1)), IDENTITY_TOL,
        )
        energy = tx.dirichlet_energy(p, spec)
        report.check(
            "energy.above_identity", "D(u) > D(id)",
            energy - tx.identity_energy(spec), 0.0, ">",
        )
        neighbour = N + 1 if N == 1 else N - 1
        other = tx.dirichlet_energy(tx.solve_winding_params(spec, neighbour), spec)
        report.check(
            "energy.increasing_in_N", "D(u_N) strictly increasing in N",
            (other - energy) * (neighbour - N), 0.0, ">",
        )
        report.check(
            "energy.vs_linear_twist", "I(u) <= I(linear twist)",
            energy - tx.linear_twist_energy(spec, N), 0.0,
        )

        for stream, kind in ((2, "outer"), (3, "cone")):
            battery = tx.minimality_battery(
                p, spec, rng_for(config, stream), count=config.battery, kind=kind
            )
            report.check(
                f"minimality.{kind}", "I(u + phi) - I(u) >= -eps_grid",
                battery.worst_margin if battery.outcomes else None, 0.0, ">=",
            )
            report.tables[f"battery_{kind}"] = [
                table_row(tested=len(battery.outcomes), discarded=battery.discarded,
                          worst_margin=battery.worst_margin)
            ]

        report.tables["parameters"] = [
            table_row(N=N, k=p.k, omega=p.omega, c=p.c, r_star=tx.r_star(p, spec),
                      kappa=tx.hedgehog_coefficient(p, spec))
        ]
        report.tables["psi_b"] = [
            table_row(k=float(k), psi_b=float(v)) for k, v in zip(k_grid[::10], psi_b[::10],
                                                                  strict=True)
        ]

    emit_table(config, "profile", tx.radial_profile(p, spec).columns())
    emit_figure(config, "twist", AnnulusMap(spec=spec, u=lambda x: tx.field_eval(p, spec, x)[0]))
    return report
