"""Stage 1.5: Conjugate Gradient Tests.

These tests verify the SPD solver, its monitor and its failure mode.
Run with: uv run pytest tests/stage_1/test_linear.py -v
"""

import numpy as np
import pytest
import scipy.sparse as sp

pytestmark = pytest.mark.stage1


@pytest.fixture
def poisson_2d() -> sp.csr_matrix:
    m = 20
    t = sp.diags([-np.ones(m - 1), 2 * np.ones(m), -np.ones(m - 1)], [-1, 0, 1])
    return (sp.kron(t, sp.identity(m)) + sp.kron(sp.identity(m), t)).tocsr()


def test_solves_poisson_system(poisson_2d: sp.csr_matrix, rng: np.random.Generator) -> None:
    """Test that CG reaches the relative residual target."""
    from twistshear.numerics.linear import solve_spd

    b = rng.standard_normal(poisson_2d.shape[0])
    x = solve_spd(poisson_2d, b, tol=1e-12)

    assert np.linalg.norm(poisson_2d @ x - b) <= 1e-11 * np.linalg.norm(b)


def test_zero_rhs_returns_zero(poisson_2d: sp.csr_matrix) -> None:
    """Test that b = 0 gives x = 0 without iterating."""
    from twistshear.numerics.linear import CgMonitor, solve_spd

    monitor = CgMonitor()
    x = solve_spd(poisson_2d, np.zeros(poisson_2d.shape[0]), monitor=monitor)

    assert not np.any(x)
    assert monitor.iterations == 0


def test_energy_decreases_monotonically(poisson_2d: sp.csr_matrix,
                                        rng: np.random.Generator) -> None:
    """Test that 1/2 x^T A x - b^T x never increases along the iterates."""
    from twistshear.numerics.linear import CgMonitor, solve_spd

    monitor = CgMonitor()
    b = rng.standard_normal(poisson_2d.shape[0])
    solve_spd(poisson_2d, b, tol=1e-10, preconditioner=None, monitor=monitor)

    energy = np.array(monitor.energy)
    assert monitor.iterations == len(energy) > 1
    assert np.all(np.diff(energy) <= 1e-10 * np.abs(energy[:-1]))


def test_dense_matrix_supported() -> None:
    """Test that a dense SPD matrix is accepted."""
    from twistshear.numerics.linear import solve_spd

    a = np.array([[4.0, 1.0], [1.0, 3.0]])
    x = solve_spd(a, np.array([1.0, 2.0]), tol=1e-14)

    np.testing.assert_allclose(x, np.linalg.solve(a, [1.0, 2.0]), atol=1e-12)


def test_iteration_cap_raises(poisson_2d: sp.csr_matrix, rng: np.random.Generator) -> None:
    """Test that hitting maxiter raises LinearSolveError with the residual."""
    from twistshear.errors import LinearSolveError
    from twistshear.numerics.linear import solve_spd

    b = rng.standard_normal(poisson_2d.shape[0])

    with pytest.raises(LinearSolveError) as info:
        solve_spd(poisson_2d, b, tol=1e-14, maxiter=2)

    assert info.value.residual > 1e-14


def test_jacobi_requires_positive_diagonal() -> None:
    """Test that a non-positive diagonal is rejected by the preconditioner."""
    from twistshear.errors import LinearSolveError
    from twistshear.numerics.linear import jacobi_preconditioner

    with pytest.raises(LinearSolveError):
        jacobi_preconditioner(sp.diags([1.0, 0.0, 2.0]).tocsr())
