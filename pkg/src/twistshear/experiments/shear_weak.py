"""Report builder for the constrained (weak) shear minimizer."""

import logfire
import numpy as np

from twistshear.experiments.common import emit_figure, emit_rows, new_report, rng_for
from twistshear.reporting.models import InvariantReport, RunConfig, table_row
from twistshear.shear import weak as sw
from twistshear.shear.grid import Region, ShearGrid, ShearGridField

SOLVE_TOL = 1e-9
EXACT_TOL = 1e-12
JUMP_FLOOR = 0.01
ETA_COUNT = 50
ETA_AWAY = 10


def refinement_levels(n: int) -> tuple[int, int, int]:
    """(n/2, n, 2n) when n/2 is a valid resolution, else (n, 2n, 4n)."""
    half = n // 2
    if half >= 16 and half % 2 == 0:
        return half, n, 2 * n
    return n, 2 * n, 4 * n


def _convexity_margin(sigma: ShearGridField, rng: np.random.Generator) -> tuple[float, float]:
    """(convexity gap, constraint-linearity error) for two random admissible fields."""
    first = sigma.copy_with(sigma.sigma + sw.random_admissible_eta(sigma, rng))
    second = sigma.copy_with(sigma.sigma + sw.random_admissible_eta(sigma, rng))
    lam = float(rng.uniform(0.1, 0.9))
    mixed = sigma.copy_with(lam * first.sigma + (1 - lam) * second.sigma)
    gap = (
        lam * sw.dirichlet_energy_w(first)
        + (1 - lam) * sw.dirichlet_energy_w(second)
        - sw.dirichlet_energy_w(mixed)
    )
    linear = mixed.constraint() - (lam * first.constraint() + (1 - lam) * second.constraint())
    return gap, float(np.max(np.abs(linear)))


def build_report(config: RunConfig) -> InvariantReport:
    """Construct the glued minimizer at config.n and check it against the oracle."""
    n = config.n
    report = new_report(config, "shear-weak")

    with logfire.span("experiment shear-weak", n=n):
        levels = refinement_levels(n)
        study = sw.refinement_study(levels)
        eps_grid = study.eps_grid(n)

        harmonic = sw.harmonic_solve(n)
        sigma = sw.compose_minimizer(harmonic)
        grid = ShearGrid(n)
        jac = sigma.constraint()

        report.check("harmonic.mean_value", "discrete harmonic on Omega",
                     harmonic.mean_value_residual, SOLVE_TOL, "<")
        for name, value in sw.comparison_bounds(harmonic).items():
            report.check(f"comparison.{name}", "linear comparison functions bound Sigma",
                         value, SOLVE_TOL)
        over, under = sw.interior_max_principle(harmonic)
        report.check("max_principle.max", "max of Sigma on the boundary of Omega", over, SOLVE_TOL)
        report.check("max_principle.min", "min of Sigma on the boundary of Omega", under,
                     SOLVE_TOL)
        report.check("envelope", "column envelope from the constraint",
                     sw.envelope_bounds(sigma).violation, SOLVE_TOL)

        on_p = grid.regions == Region.P
        report.check("pinched.jacobian", "det grad u = 0 on P",
                     float(np.max(np.abs(jac[on_p]))), SOLVE_TOL)
        report.check("pinched.sigma", "sigma = -x2 on P",
                     float(np.max(np.abs(sigma.sigma[on_p] + grid.X2[on_p]))), EXACT_TOL)
        floor = float(np.min(jac[1 : grid.i_k, 1:-1]))
        report.check("omega.jacobian_positive", "det grad u > 0 in Omega", floor, 0.0, ">")

        rng = rng_for(config, 10)
        vi = [sw.variational_inequality_residual(sigma, sw.random_admissible_eta(sigma, rng))
              for _ in range(ETA_COUNT)]
        report.check("vi.admissible", "int grad sigma . grad eta >= -eps_grid",
                     min(vi), -eps_grid, ">=")
        away = [
            sw.variational_inequality_residual(
                sigma, sw.random_admissible_eta(sigma, rng, margin=0.1)
            )
            for _ in range(ETA_AWAY)
        ]
        report.check("vi.equality_away_from_K", "equality for eta vanishing near K",
                     max(abs(v) for v in away), eps_grid, "<")

        gap, linear = _convexity_margin(sigma, rng_for(config, 11))
        report.check("convexity.energy", "I_w convex along segments", gap, 0.0, ">=")
        report.check("convexity.constraint_linear", "det grad u linear in sigma", linear,
                     EXACT_TOL)

        jump = sw.jump_across_K(sigma, harmonic)
        fine = sw.harmonic_solve(2 * n)
        jump_fine = sw.jump_across_K(sw.compose_minimizer(fine), fine)
        report.check("jump.left_trace", "d1 Sigma(1/2-) non-zero", jump.max_left, JUMP_FLOOR, ">")
        report.check("jump.right_trace", "d1 sigma(1/2+) = 0", jump.max_right, SOLVE_TOL)
        report.check("jump.persistence", "left trace persists under refinement",
                     jump_fine.max_left / jump.max_left, 0.5, ">=")

        dichotomy = sw.dichotomy_check(sigma, harmonic)
        report.check("dichotomy.floor", "alternative (i): det bounded below in Omega",
                     dichotomy.positive_floor, comparison="true")
        report.check("dichotomy.trace_nonzero", "alternative (ii) fails",
                     not dichotomy.trace_vanishes, comparison="true")

        oracle = sw.oracle_minimize(n)
        distance = float(np.max(np.abs(oracle.field.sigma - sigma.sigma)))
        report.check("oracle.converged", "projected gradient converged", oracle.converged,
                     comparison="true")
        report.check("oracle.distance", "oracle matches glued field", distance, 1.0 / n, "<")
        report.check("oracle.energy", "oracle energy matches glued field",
                     abs(oracle.energy - sw.dirichlet_energy_w(sigma)), 1.0 / n, "<")
        report.check("oracle.pinched", "oracle sigma = -x2 on P",
                     float(np.max(np.abs(oracle.field.sigma[on_p] + grid.X2[on_p]))), 1.0 / n, "<")

        report.check("refinement.rate", "energy Cauchy in n", study.observed_rate, 0.0, ">")

        step = max(1, grid.size // 16)
        report.tables["jump_across_K"] = [
            table_row(x2=float(jump.x2[j]), left=float(jump.left[j]), right=float(jump.right[j]))
            for j in range(0, grid.size, step)
        ]
        report.tables["refinement"] = [
            table_row(n=m, energy=e) for m, e in zip(study.ns, study.energies, strict=True)
        ]
        report.tables["summary"] = [
            table_row(eps_grid=eps_grid, jacobian_floor=floor, oracle_iterations=oracle.iterations,
                      jump_max=jump.max_left, jump_max_fine=jump_fine.max_left,
                      rate=study.observed_rate)
        ]

    emit_rows(config, "field", sw.field_columns(sigma), ["x1", "x2", "sigma", "jacobian", "region"])
    emit_figure(config, "shear_weak", sigma)
    return report
