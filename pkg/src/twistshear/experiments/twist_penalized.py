"""Report builder for the penalized symmetric twist (shooting)."""

import logfire
import numpy as np

from twistshear.experiments.common import emit_table, new_report
from twistshear.reporting.models import InvariantReport, RunConfig, table_row
from twistshear.twist import penalized as tp
from twistshear.twist.models import AnnulusSpec
from twistshear.twist.penalty import get_penalty, lemma17_bound_check

SHOOT_TOL = 1e-8
PROFILE_TOL = 1e-6
BOUND_MU = 0.5


def build_report(config: RunConfig) -> InvariantReport:
    """Shoot the penalized twist for config.N and monitor its qualitative laws."""
    spec = AnnulusSpec(a=config.a, b=config.b)
    h = get_penalty(config.penalty)
    report = new_report(config, "twist-penalized")
    N = config.N  # noqa: N806

    with logfire.span("experiment twist-penalized", N=N, penalty=h.name):
        hyp = h.check_hypotheses()
        report.check("penalty.hypotheses", "h0 convex, blows up at 0, bounded h0''", hyp.passed,
                     comparison="true")
        worst, bound = lemma17_bound_check(h, BOUND_MU)
        report.check("penalty.derivative_bound", "|h0'(s)|/s <= 2 C_mu + |h0'(mu)|/mu",
                     worst - bound, 0.0)

        sol = tp.shoot(spec, N, h, tol=config.tol or SHOOT_TOL)
        res_rho, res_psi = sol.residuals
        report.check("boundary.rho", "rho(b) = b", res_rho, SHOOT_TOL, "<")
        report.check("boundary.psi", "psi(b) = 2 pi N", res_psi, SHOOT_TOL, "<")
        report.check("jacobian.positive", "d = rho rho'/r > 0", sol.jacobian_floor, 0.0, ">")
        report.check("slope.inner", "rho'(a) > 0", sol.rhodot_a, 0.0, ">")

        if N >= 1:
            d_step, z_step = tp.monotonicity_monitor(sol, h)
            report.check("monotone.d", "d strictly increasing", d_step, 0.0, ">")
            report.check("monotone.z", "z strictly decreasing", z_step, 0.0, "<")
        else:
            report.check("identity.d", "d = 1 for the identity",
                         float(np.max(np.abs(sol.d - 1.0))), PROFILE_TOL)
        report.check("z.derivative", "z' closed form", tp.z_derivative_check(sol, h), PROFILE_TOL)
        report.check("flux.balance", "radial Euler-Lagrange flux balance",
                     tp.flux_consistency(sol, h), PROFILE_TOL)
        report.check("angular.momentum", "r rho^2 psi' = w",
                     tp.angular_momentum_residual(sol), PROFILE_TOL)

        mp = tp.max_principle_monitor(sol)
        if N >= 1:
            report.check("max_principle.rho_over_r", "rho/r in [a/b, 1), no interior maximum",
                         mp.passed, comparison="true")
        energy = tp.energy_I0(sol, h)
        if N == 0:
            identity = np.pi * (spec.b**2 - spec.a**2) * (1.0 + float(h.h0(np.asarray(1.0))))
            report.check("energy.identity", "N = 0 solution is the identity",
                         abs(energy - identity), 1e-8)
        else:
            report.check("energy.finite", "I0 finite and positive", energy, 0.0, ">")

        report.tables["solution"] = [
            table_row(N=N, penalty=h.name, omega=sol.omega, rhodot_a=sol.rhodot_a,
                      jacobian_floor=sol.jacobian_floor, d_max=float(np.max(sol.d)),
                      energy=energy,
                      iterations=sol.iterations, q_min=mp.q_min, inflections=mp.inflections)
        ]

    emit_table(config, "profile", sol.columns())
    return report
