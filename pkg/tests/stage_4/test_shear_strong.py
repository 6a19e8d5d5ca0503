"""Stage 4.3: Mixed-Boundary Nonlinear Shear Tests.

These tests verify the flux L, the discrete energy I_s and its derivatives,
the damped Newton solve with traction-free edges, and the corner mismatch.
Run with: uv run pytest tests/stage_4/test_shear_strong.py -v
"""

from dataclasses import replace

import numpy as np
import pytest

from twistshear.shear import strong as ss
from twistshear.shear.grid import ShearGrid, ShearGridField
from twistshear.twist.penalty import default_penalty

pytestmark = pytest.mark.stage4

N = 16


@pytest.fixture(scope="module")
def solution() -> ss.NonlinearShearSolution:
    return ss.solve_mixed_bvp(N, default_penalty())


class TestFlux:
    """L(p) = (p1, 1 + p2 + h0'(1 + p2))."""

    def test_value_at_origin(self, default_h, negcontrol_h) -> None:
        """Test L(0) = (0, 1 + h0'(1)) for both penalties."""
        np.testing.assert_allclose(ss.flux_L([0.0, 0.0], default_h), [0.0, 0.5])
        np.testing.assert_allclose(ss.flux_L([0.0, 0.0], negcontrol_h), [0.0, 0.0], atol=1e-15)

    def test_jacobian_diagonal(self, default_h) -> None:
        """Test DL(0) = diag(1, 1 + h0''(1))."""
        np.testing.assert_allclose(ss.flux_jacobian([0.3, 0.0], default_h), [[1.0, 0.0],
                                                                             [0.0, 3.0]])

    @pytest.mark.parametrize("func", [ss.flux_L, ss.flux_jacobian])
    def test_infeasible_gradient(self, default_h, func) -> None:
        """Test that 1 + p2 <= 0 raises InfeasibleGradientError."""
        from twistshear.errors import InfeasibleGradientError

        with pytest.raises(InfeasibleGradientError):
            func(np.array([[0.0, 0.0], [0.0, -1.0]]), default_h)

    def test_ellipticity(self, default_h) -> None:
        """Test that a convex penalty gives lambda = 1."""
        assert ss.ellipticity_floor(default_h) == 1.0

    def test_natural_root_default(self, default_h) -> None:
        """Test that d* is the real root of 4 d^3 - 2 d^2 - 1."""
        roots = np.roots([4.0, -2.0, 0.0, -1.0])
        expected = float(roots[np.abs(roots.imag) < 1e-12].real[0])

        d_star = ss.natural_bc_root(default_h)

        assert d_star == pytest.approx(expected, abs=1e-10)
        assert d_star == pytest.approx(0.8478, abs=1e-4)
        assert abs(float(ss.flux_L([0.0, d_star - 1.0], default_h)[1])) < 1e-10

    def test_natural_root_negative_control(self, negcontrol_h) -> None:
        """Test that 1 + h0'(1) = 0 puts d* at 1."""
        assert ss.natural_bc_root(negcontrol_h) == pytest.approx(1.0, abs=1e-10)


class TestEnergy:
    """Discrete I_s, gradient and Hessian."""

    def test_zero_field_energy(self, default_h) -> None:
        """Test I_s(0) = 4 (1 + h0(1))."""
        zero = ShearGridField(n=N, sigma=np.zeros((2 * N + 1, 2 * N + 1)))

        assert ss.energy_Is(zero, default_h) == pytest.approx(6.0, abs=1e-12)

    def test_infeasible_field_is_infinite(self, default_h) -> None:
        """Test that a field with 1 + D2 sigma < 0 has infinite energy."""
        grid = ShearGrid(N)

        assert ss.energy_Is(ShearGridField(n=N, sigma=-2.0 * grid.X2), default_h) == np.inf

    def test_gradient_matches_differences(self, default_h, rng: np.random.Generator) -> None:
        """Test the nodal gradient against central differences of the energy."""
        energy = ss.ShearEnergy(N, default_h)
        s = ss.initial_fields(N, rng)["random_smooth"]
        g = energy.gradient(s)
        step = 1e-6

        for i, j in [(3, 0), (8, 16), (12, 32), (5, 7)]:
            bumped = s.copy()
            bumped[i, j] += step
            dropped = s.copy()
            dropped[i, j] -= step
            fd = (energy.value(bumped) - energy.value(dropped)) / (2 * step)
            assert g[i, j] == pytest.approx(fd, rel=1e-5, abs=1e-8)

    def test_hessian_matches_gradient_differences(self, default_h,
                                                  rng: np.random.Generator) -> None:
        """Test H v against a central difference of the free gradient."""
        energy = ss.ShearEnergy(N, default_h)
        s = ss.initial_fields(N, rng)["scaled_bump"]
        v = np.zeros_like(s)
        v[energy.free] = rng.standard_normal(int(energy.free.sum()))
        v[0] = v[-1] = 0.0
        step = 1e-6

        hv = energy.hessian(s) @ v[energy.free]
        fd = (energy.gradient(s + step * v) - energy.gradient(s - step * v))[energy.free] / (2 * step)

        np.testing.assert_allclose(hv, fd, rtol=1e-5, atol=1e-8)

    def test_strict_convexity(self, default_h, rng: np.random.Generator) -> None:
        """Test that the midpoint of two feasible starts has lower energy."""
        starts = ss.initial_fields(N, rng)
        a, b = starts["random_smooth"], starts["scaled_bump"]
        e = [ss.energy_Is(ShearGridField(n=N, sigma=s), default_h)
             for s in (a, b, 0.5 * (a + b))]

        assert 0.5 * (e[0] + e[1]) - e[2] > 0


class TestSolve:
    """Damped Newton on the discrete weak form."""

    def test_converged(self, solution: ss.NonlinearShearSolution) -> None:
        """Test the scaled residual, the clamped sides and a positive floor."""
        assert solution.residual <= 1e-10
        assert not np.any(solution.field.sigma[[0, -1]])
        assert solution.floor > 0

    def test_natural_boundary_condition(self, solution: ss.NonlinearShearSolution) -> None:
        """Test L2 = 0 on the free edges and 1 + D2 sigma = d* mid-edge."""
        sigma = solution.field.sigma

        assert ss.natural_bc_residual(solution) < 1e-9
        assert 1.0 + (sigma[N, -1] - sigma[N, -2]) * N == pytest.approx(solution.d_star,
                                                                         abs=1e-8)

    def test_energy_descends(self, solution: ss.NonlinearShearSolution) -> None:
        """Test that Newton never increases the energy and beats sigma = 0."""
        history = np.array(solution.energy_history)

        assert np.all(np.diff(history) <= 1e-12 * abs(solution.energy))
        assert solution.energy < 6.0

    def test_weak_form(self, solution: ss.NonlinearShearSolution) -> None:
        """Test that the weak form vanishes for a smooth interior test function."""
        grid = ShearGrid(N)
        eta = np.sin(np.pi * (grid.X1 + 1) / 2) ** 2 * np.cos(np.pi * grid.X2)
        eta[[0, -1]] = 0.0

        assert abs(ss.weak_form_residual(solution, eta)) < 1e-8

    def test_weak_form_needs_clamped_zero(self, solution: ss.NonlinearShearSolution) -> None:
        """Test that eta must vanish on the clamped sides."""
        with pytest.raises(ValueError):
            ss.weak_form_residual(solution, np.ones_like(solution.field.sigma))

    def test_corner_gap(self, solution: ss.NonlinearShearSolution) -> None:
        """Test that L2 jumps by about 1 + h0'(1) between the top edge and the clamped side."""
        corner = ss.corner_mismatch(solution)

        assert corner.top == pytest.approx(0.0, abs=1e-8)
        assert corner.side == pytest.approx(0.5, abs=0.1)
        assert corner.gap == pytest.approx(0.5, abs=0.1)
        assert corner.side_d2 == pytest.approx(0.0, abs=0.05)

    def test_corner_gap_reads_the_iterate(self, solution: ss.NonlinearShearSolution) -> None:
        """Test that a non-converged iterate gives different corner limits."""
        half = replace(solution, field=ShearGridField(n=N, sigma=0.5 * solution.field.sigma))

        converged = ss.corner_mismatch(solution)
        corner = ss.corner_mismatch(half)

        assert abs(corner.top) > 0.01
        assert abs(corner.gap - converged.gap) > 0.01

    def test_corner_side_follows_interior_columns(
        self, solution: ss.NonlinearShearSolution
    ) -> None:
        """Test that the side limit moves when the column next to the side moves."""
        sigma = solution.field.sigma.copy()
        sigma[-2, :] += 0.01 * solution.field.grid.X2[-2, :]
        bent = replace(solution, field=ShearGridField(n=N, sigma=sigma))

        assert ss.corner_mismatch(bent).side != pytest.approx(
            ss.corner_mismatch(solution).side, abs=1e-4
        )

    def test_negative_control_stays_at_zero(self, negcontrol_h) -> None:
        """Test that sigma = 0 is already stationary when 1 + h0'(1) = 0."""
        sol = ss.solve_mixed_bvp(N, negcontrol_h)

        assert sol.iterations == 0
        assert not np.any(sol.field.sigma)
        assert ss.corner_mismatch(sol).gap == pytest.approx(0.0, abs=1e-12)

    def test_unique_from_several_starts(self, default_h, rng: np.random.Generator) -> None:
        """Test that zero, smooth and bump starts reach the same field."""
        result = ss.uniqueness_check(N, default_h, ss.initial_fields(N, rng))

        assert not result.failures
        assert len(result.solutions) == 3
        assert result.distance < 1e-9
        assert result.energy_spread < 1e-9

    def test_infeasible_start_rejected(self, default_h) -> None:
        """Test that a start with 1 + D2 sigma <= 0 is refused."""
        grid = ShearGrid(N)

        with pytest.raises(ValueError, match="initial field"):
            ss.solve_mixed_bvp(N, default_h, initial=-2.0 * grid.X2)

    def test_columns(self, solution: ss.NonlinearShearSolution) -> None:
        """Test the CSV rows (x1, x2, sigma, jacobian, L1, L2)."""
        assert solution.columns().shape == ((2 * N + 1) ** 2, 6)
