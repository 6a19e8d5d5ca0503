"""Report builder for the mixed-boundary nonlinear shear problem."""

import logfire
import numpy as np

from twistshear.config import get_settings
from twistshear.experiments.common import emit_figure, emit_rows, new_report, rng_for
from twistshear.reporting.models import InvariantReport, RunConfig, table_row
from twistshear.shear import strong as ss
from twistshear.shear.grid import ShearGrid, ShearGridField
from twistshear.twist.penalty import get_penalty

GAP_RTOL = 0.2
NEGATIVE_GAP = 0.05
FLUX_ZERO = 1e-12
ENERGY_SLACK = 1e-12


def _bump(grid: ShearGrid) -> np.ndarray:
    """Interior-supported test function vanishing on the whole boundary."""
    eta = (
        np.sin(np.pi * (grid.X1 + 1) / 2) ** 2
        * np.sin(np.pi * (grid.X2 + 1) / 2) ** 2
        * np.cos(np.pi * grid.X1 * grid.X2)
    )
    eta[grid.boundary] = 0.0
    return eta


def build_report(config: RunConfig) -> InvariantReport:
    """Solve at config.n and 2n; check natural BC, uniqueness and the corner gap."""
    n = config.n
    h = get_penalty(config.penalty)
    tol = config.tol or get_settings().newton_tol
    report = new_report(config, "shear-strong")
    flux_one = h.natural_flux_at_one

    with logfire.span("experiment shear-strong", n=n, penalty=h.name):
        d_star = ss.natural_bc_root(h)
        report.check("flux.origin", "L(0) = (0, 1 + h0'(1))",
                     float(np.max(np.abs(ss.flux_L([0.0, 0.0], h) - [0.0, flux_one]))), FLUX_ZERO)
        report.check("flux.natural_root", "L2(0, d* - 1) = 0",
                     abs(float(ss.flux_L([0.0, d_star - 1.0], h)[1])), 1e-10)
        report.check("flux.ellipticity", "DL uniformly elliptic", ss.ellipticity_floor(h), 0.0, ">")

        starts = ss.initial_fields(n, rng_for(config, 20))
        unique = ss.uniqueness_check(n, h, starts, tol=tol)
        report.check("uniqueness.failures", "every start converges", float(len(unique.failures)),
                     0.0)
        report.check("uniqueness.distance", "solutions agree", unique.distance, 10 * tol, "<")
        report.check("uniqueness.energy", "energies agree", unique.energy_spread, 10 * tol, "<")

        sol = unique.solutions.get("zero") or ss.solve_mixed_bvp(n, h, tol=tol)
        sigma = sol.field.sigma
        report.check("newton.residual", "scaled residual <= tol", sol.residual, tol)
        report.check("natural_bc", "L2 = 0 on free edges", ss.natural_bc_residual(sol), 10 * tol,
                     "<")
        report.check("clamped.values", "sigma = 0 on x1 = +-1",
                     float(max(np.max(np.abs(sigma[0])), np.max(np.abs(sigma[-1])))), 0.0)
        mid = n
        report.check("free_edge.mid_jacobian", "1 + D2 sigma = d* mid-edge",
                     abs(float(1.0 + (sigma[mid, -1] - sigma[mid, -2]) * n) - d_star), 1e-8)
        report.check("floor.positive", "1 + D2 sigma >= c > 0", sol.floor, 0.0, ">")

        increases = np.diff(sol.energy_history)
        report.check("newton.energy_descent", "energy decreases along Newton",
                     float(np.max(increases, initial=0.0)), ENERGY_SLACK * abs(sol.energy))
        zero_energy = ss.energy_Is(ShearGridField(n=n, sigma=np.zeros_like(sigma)), h)
        report.check("energy.zero_field", "I_s(0) = 4 (1 + h0(1))",
                     abs(zero_energy - 4 * (1 + float(h.h0(np.asarray(1.0))))), 1e-12)
        report.check("energy.below_zero_field", "I_s(sigma*) <= I_s(0)",
                     sol.energy - zero_energy, ENERGY_SLACK * abs(zero_energy))

        grid = ShearGrid(n)
        report.check("weak_form", "int L(grad sigma) . grad eta = 0",
                     abs(ss.weak_form_residual(sol, _bump(grid))), 1e-8)

        pair = [s for key, s in starts.items() if key != "zero"]
        a_field, b_field = (ShearGridField(n=n, sigma=s) for s in pair[:2])
        mid_field = ShearGridField(n=n, sigma=0.5 * (a_field.sigma + b_field.sigma))
        e_a, e_b, e_mid = (ss.energy_Is(f, h) for f in (a_field, b_field, mid_field))
        report.check("convexity.strict", "I_s strictly convex", 0.5 * (e_a + e_b) - e_mid, 0.0, ">")
        report.check("convexity.minimal", "I_s(midpoint) >= I_s(sigma*)",
                     sol.energy - e_mid, ENERGY_SLACK * abs(e_mid))

        fine = ss.solve_mixed_bvp(2 * n, h, tol=tol)
        corner = ss.corner_mismatch(sol)
        corner_fine = ss.corner_mismatch(fine)
        if abs(flux_one) > FLUX_ZERO:
            report.check("corner.gap", "gap = |1 + h0'(1)|",
                         abs(corner.gap - abs(flux_one)) / abs(flux_one), GAP_RTOL)
            report.check("corner.persistence", "gap persists under refinement",
                         corner_fine.gap / corner.gap, 0.5, ">=")
        else:
            report.check("corner.no_gap", "no gap when 1 + h0'(1) = 0", corner.gap,
                         NEGATIVE_GAP, "<")
            report.check("corner.no_gap_fine", "no gap when 1 + h0'(1) = 0", corner_fine.gap,
                         NEGATIVE_GAP, "<")

        report.tables["corner_gap"] = [
            table_row(n=s.n, top=c.top, side=c.side, gap=c.gap, top_d2=c.top_d2, side_d2=c.side_d2)
            for s, c in ((sol, corner), (fine, corner_fine))
        ]
        i, j = np.unravel_index(int(np.argmin(sol.jacobian)), sol.jacobian.shape)
        report.tables["floor_location"] = [
            table_row(x1=float(grid.x[i]), x2=float(grid.x[j]), floor=sol.floor,
                      on_free_edge=j in (0, grid.size - 1))
        ]
        report.tables["summary"] = [
            table_row(penalty=h.name, d_star=d_star, floor=sol.floor, energy=sol.energy,
                      iterations=sol.iterations, residual=sol.residual,
                      distance=unique.distance)
        ]

    emit_rows(config, "field", sol.columns(), ["x1", "x2", "sigma", "jacobian", "L1", "L2"])
    emit_figure(config, "shear_strong", sol.field)
    return report
