"""Stage 1.6: Damped Newton Tests.

These tests verify the line search, the merit modes and the admissibility hook.
Run with: uv run pytest tests/stage_1/test_newton.py -v
"""

import numpy as np
import pytest

pytestmark = pytest.mark.stage1


def test_scalar_root() -> None:
    """Test that Newton solves x^2 = 2 from a scalar start."""
    from twistshear.numerics.newton import newton_solve

    result = newton_solve(lambda x: x**2 - 2.0, lambda x: np.array([[2 * x[0]]]), 1.0, tol=1e-14)

    assert result.x[0] == pytest.approx(np.sqrt(2.0), abs=1e-14)
    assert result.residual <= 1e-14
    assert result.iterations == len(result.residual_history) - 1


def test_system_converges_quadratically() -> None:
    """Test that residuals shrink quadratically near the root of a 2D system."""
    from twistshear.numerics.newton import newton_solve

    def f(v: np.ndarray) -> np.ndarray:
        return np.array([v[0] ** 2 + v[1] ** 2 - 4.0, v[0] - v[1]])

    def jac(v: np.ndarray) -> np.ndarray:
        return np.array([[2 * v[0], 2 * v[1]], [1.0, -1.0]])

    result = newton_solve(f, jac, [1.0, 2.0], tol=1e-13)

    np.testing.assert_allclose(result.x, [np.sqrt(2.0), np.sqrt(2.0)], atol=1e-12)
    tail = [r for r in result.residual_history if r > 0][-3:]
    assert tail[-1] <= 10 * tail[-2] ** 2 + 1e-15


def test_damping_handles_far_start() -> None:
    """Test that backtracking tames arctan, where full Newton steps diverge."""
    from twistshear.numerics.newton import newton_solve

    result = newton_solve(np.arctan, lambda x: np.array([[1.0 / (1.0 + x[0] ** 2)]]), 3.0,
                          tol=1e-12)

    assert abs(result.x[0]) <= 1e-12


def test_admissible_receives_trial_and_current() -> None:
    """Test that the admissibility predicate sees (trial, current) and blocks steps."""
    from twistshear.numerics.newton import newton_solve

    calls: list[tuple[float, float]] = []

    def admissible(trial: np.ndarray, current: np.ndarray) -> bool:
        calls.append((float(trial[0]), float(current[0])))
        return bool(trial[0] > 0)

    result = newton_solve(
        lambda x: np.log(x), lambda x: np.array([[1.0 / x[0]]]), 5.0,
        tol=1e-12, admissible=admissible,
    )

    assert result.x[0] == pytest.approx(1.0, abs=1e-12)
    assert any(trial <= 0 for trial, _ in calls)
    assert all(current > 0 for _, current in calls)
    assert all(x[0] > 0 for x in result.iterates)


def test_energy_merit_descends() -> None:
    """Test that an energy merit decreases along the accepted iterates."""
    from twistshear.numerics.newton import newton_solve

    def energy(x: np.ndarray) -> float:
        return float(np.sum(np.cosh(x) - 1.0))

    result = newton_solve(
        np.sinh, lambda x: np.diag(np.cosh(x)), [2.0, -3.0], tol=1e-12, merit=energy
    )

    assert np.all(np.diff(result.merit_history) <= 1e-12)
    np.testing.assert_allclose(result.x, 0.0, atol=1e-12)


def test_stagnation_raises_with_history() -> None:
    """Test that an unsolvable equation raises NonlinearSolveError with history."""
    from twistshear.errors import NonlinearSolveError
    from twistshear.numerics.newton import newton_solve

    with pytest.raises(NonlinearSolveError) as info:
        newton_solve(lambda x: x**2 + 1.0, lambda x: np.array([[2 * x[0]]]), 0.5,
                     tol=1e-12, max_iters=20)

    assert info.value.history


def test_non_finite_step_raises() -> None:
    """Test that a singular Jacobian producing non-finite steps is reported."""
    from twistshear.errors import NonlinearSolveError
    from twistshear.numerics.newton import newton_solve

    with pytest.raises((NonlinearSolveError, np.linalg.LinAlgError)):
        newton_solve(lambda x: x + 1.0, lambda x: np.array([[0.0]]), 0.0)
