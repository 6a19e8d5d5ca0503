"""Stage 2.2: Test Field and Boundary Identity Tests.

These tests verify the compactly supported perturbation fields and the
identity between the area integral of det grad phi and its boundary term.
Run with: uv run pytest tests/stage_2/test_perturbations.py -v
"""

import numpy as np
import pytest

from twistshear.twist import perturbations as tp
from twistshear.twist.models import AnnulusSpec

pytestmark = pytest.mark.stage2


def _fd_check(field: tp.PerturbationField, r: float, theta: float,
              step: float = 1e-6) -> float:
    """Largest mismatch between analytic and central-difference derivatives."""
    r, theta = np.array([r]), np.array([theta])
    _, d_r, d_theta = field.evaluate(r, theta)
    fd_r = (field.evaluate(r + step, theta)[0] - field.evaluate(r - step, theta)[0]) / (2 * step)
    fd_t = (field.evaluate(r, theta + step)[0] - field.evaluate(r, theta - step)[0]) / (2 * step)
    return float(max(np.max(np.abs(fd_r - d_r)), np.max(np.abs(fd_t - d_theta))))


class TestRadialBump:
    """Polynomial cutoff g and its derivative."""

    def test_support_and_peak(self) -> None:
        """Test g = 0 outside [lo, hi] and g(peak) = P(t_peak)."""
        bump = tp.RadialBump(lo=1.0, hi=2.0, p=3, q=3)
        g, dg = bump(np.array([0.5, 1.0, bump.peak, 2.0, 2.5]))

        np.testing.assert_array_equal(g[[0, 1, 3, 4]], 0.0)
        assert g[2] == pytest.approx(1.0)
        assert dg[2] == pytest.approx(0.0, abs=1e-12)

    def test_derivative_matches_differences(self) -> None:
        """Test g' against central differences."""
        bump = tp.RadialBump(lo=1.0, hi=2.0, p=4, q=3, poly=(1.0, 0.3, -0.2))
        r = np.linspace(1.05, 1.95, 19)
        step = 1e-6

        _, dg = bump(r)
        fd = (bump(r + step)[0] - bump(r - step)[0]) / (2 * step)

        np.testing.assert_allclose(dg, fd, atol=1e-6)

    @pytest.mark.parametrize(("lo", "hi", "p", "q"), [(2.0, 1.0, 3, 3), (1.0, 2.0, 1, 3)])
    def test_invalid_parameters(self, lo: float, hi: float, p: int, q: int) -> None:
        """Test that an empty support or exponent below 2 is rejected."""
        with pytest.raises(ValueError):
            tp.RadialBump(lo=lo, hi=hi, p=p, q=q)

    def test_rising_bump_is_monotone_up_to_turn(self) -> None:
        """Test that rising_bump does not decrease on [lo, rise_until]."""
        bump = tp.rising_bump(1.0, 2.0, 1.8)
        g, _ = bump(np.linspace(1.0, 1.8, 200))

        assert np.all(np.diff(g) >= 0)
        with pytest.raises(ValueError):
            tp.rising_bump(1.0, 2.0, 2.0)


class TestFields:
    """Analytic derivatives of the test fields."""

    def test_fourier_field_derivatives(self, rng: np.random.Generator) -> None:
        """Test the Fourier bump field against finite differences."""
        field = tp.random_fourier_field(rng, 1.0, 2.0)

        for r, theta in [(1.3, 0.4), (1.7, 2.5), (1.5, 5.9)]:
            assert _fd_check(field, r, theta) < 1e-5

    def test_cone_field_derivatives(self, rng: np.random.Generator) -> None:
        """Test the cone field against finite differences for a twisted angle."""
        field = tp.random_cone_field(
            rng, tp.RadialBump(lo=1.0, hi=2.0), psi=lambda r: 2.0 * np.log(r),
            psidot=lambda r: 2.0 / r,
        )

        for r, theta in [(1.2, 0.1), (1.6, 3.0)]:
            assert _fd_check(field, r, theta) < 1e-5

    def test_cone_field_points_along_twisted_radius(self, rng: np.random.Generator) -> None:
        """Test that the cone field is a non-negative multiple of e_r(theta + psi)."""
        from twistshear.kernel.algebra2d import apply_J, e_r

        field = tp.random_cone_field(
            rng, tp.RadialBump(lo=1.0, hi=2.0), psi=lambda r: 0.5 * r, psidot=lambda r: 0.5 + 0 * r,
        )
        r = np.linspace(1.1, 1.9, 9)
        value, _, _ = field.evaluate(r, 0.7)
        direction = e_r(0.7 + 0.5 * r)

        assert np.all(np.sum(value * direction, axis=-1) >= 0)
        np.testing.assert_allclose(np.sum(value * apply_J(direction), axis=-1), 0.0, atol=1e-14)

    def test_sum_and_scale(self, rng: np.random.Generator) -> None:
        """Test that combine and ScaledField act linearly on all three outputs."""
        f = tp.random_fourier_field(rng, 1.0, 2.0)
        g = tp.random_fourier_field(rng, 1.2, 1.8)
        combined = tp.combine([f, tp.ScaledField(g, -2.0)])
        r, t = np.array([1.3, 1.5]), np.array([1.0, 4.0])

        for a, b, c in zip(*(h.evaluate(r, t) for h in (combined, f, g))):
            np.testing.assert_allclose(a, b - 2.0 * c, atol=1e-14)
        assert combined.breakpoints == (1.0, 1.2, 1.8, 2.0)

    def test_empty_sum_is_zero(self) -> None:
        """Test that a sum of no fields evaluates to zero."""
        values = tp.combine([]).evaluate(np.array([1.5]), np.array([0.0]))

        for v in values:
            np.testing.assert_array_equal(v, 0.0)


class TestBoundaryIdentity:
    """Area integral of det grad phi against 1/2 int J phi . phi_tau on S_R."""

    def test_zero_field(self, spec: AnnulusSpec) -> None:
        """Test that phi = 0 gives (0, 0)."""
        from twistshear.twist.explicit import lemma5_identity

        assert lemma5_identity(tp.ZeroField(), spec, 1.5) == (0.0, 0.0)

    @pytest.mark.parametrize("R", [1.2, 1.5, 1.9])
    def test_radial_field(self, spec: AnnulusSpec, R: float) -> None:  # noqa: N803
        """Test that g e_r gives pi g(R)^2 on both sides."""
        from twistshear.twist.explicit import lemma5_identity

        bump = tp.RadialBump(lo=1.1, hi=1.95)
        lhs, rhs = lemma5_identity(tp.RadialField(bump), spec, R)
        expected = np.pi * float(bump(R)[0]) ** 2

        assert lhs == pytest.approx(expected, abs=1e-10)
        assert rhs == pytest.approx(expected, abs=1e-10)

    def test_random_fields(self, spec: AnnulusSpec, rng: np.random.Generator) -> None:
        """Test agreement within 1e-6 for 5 random fields and 5 radii."""
        from twistshear.twist.explicit import lemma5_identity

        for _ in range(5):
            phi = tp.random_fourier_field(rng, spec.a, spec.b)
            for R in rng.uniform(spec.a, spec.b, 5):  # noqa: N806
                lhs, rhs = lemma5_identity(phi, spec, float(R))
                assert abs(lhs - rhs) < 1e-6

    def test_radius_must_be_inside(self, spec: AnnulusSpec) -> None:
        """Test that R on the boundary raises DomainError."""
        from twistshear.errors import DomainError
        from twistshear.twist.explicit import lemma5_identity

        with pytest.raises(DomainError):
            lemma5_identity(tp.ZeroField(), spec, 2.0)
