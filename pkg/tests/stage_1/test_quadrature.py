"""Stage 1.2: Adaptive Quadrature Tests.

These tests verify adaptive Simpson integration and its failure payload.
Run with: uv run pytest tests/stage_1/test_quadrature.py -v
"""

import numpy as np
import pytest

pytestmark = pytest.mark.stage1


def test_cubic_is_exact() -> None:
    """Test that a cubic polynomial is integrated to round-off."""
    from twistshear.numerics.quadrature import integrate_1d

    value = integrate_1d(lambda x: 4 * x**3 - x + 2, -1.0, 2.0, tol=1e-12)

    assert value == pytest.approx(15.0 - 1.5 + 6.0, abs=1e-12)


@pytest.mark.parametrize(
    ("f", "lo", "hi", "exact"),
    [
        (np.sin, 0.0, np.pi, 2.0),
        (np.exp, 0.0, 1.0, np.e - 1.0),
        (lambda x: 1.0 / (1.0 + x * x), 0.0, 1.0, np.pi / 4),
        (np.log1p, 0.0, 1.0, 2 * np.log(2.0) - 1.0),
    ],
)
def test_smooth_integrands(f, lo: float, hi: float, exact: float) -> None:
    """Test that the estimate meets the absolute tolerance."""
    from twistshear.numerics.quadrature import integrate_1d

    assert integrate_1d(f, lo, hi, tol=1e-10) == pytest.approx(exact, abs=1e-9)


def test_reversed_limits_flip_sign() -> None:
    """Test that swapping the limits negates the integral."""
    from twistshear.numerics.quadrature import integrate_1d

    forward = integrate_1d(np.cos, 0.0, 1.0, tol=1e-12)
    backward = integrate_1d(np.cos, 1.0, 0.0, tol=1e-12)

    assert backward == pytest.approx(-forward, abs=1e-14)
    assert integrate_1d(np.cos, 1.0, 1.0) == 0.0


def test_exhausted_depth_carries_best_estimate() -> None:
    """Test that an unreachable tolerance raises QuadratureError with the estimate."""
    from twistshear.errors import QuadratureError
    from twistshear.numerics.quadrature import integrate_1d

    def step(x: float) -> float:
        return 1.0 if x > 1.0 / 3.0 else 0.0

    with pytest.raises(QuadratureError) as info:
        integrate_1d(step, 0.0, 1.0, tol=1e-30)

    assert info.value.best_estimate == pytest.approx(2.0 / 3.0, abs=1e-10)
    assert info.value.error_estimate >= 0.0
