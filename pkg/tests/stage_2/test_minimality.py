"""Stage 2.3: Perturbation Energy Tests.

These tests verify the energy-difference probe around the explicit twist and
the random perturbation batteries.
Run with: uv run pytest tests/stage_2/test_minimality.py -v
"""

import numpy as np
import pytest

from twistshear.twist import explicit as tw
from twistshear.twist import perturbations as tp
from twistshear.twist.models import AnnulusSpec, ExplicitTwistParams

pytestmark = pytest.mark.stage2


@pytest.fixture(scope="module")
def twist() -> tuple[ExplicitTwistParams, AnnulusSpec]:
    spec = AnnulusSpec(a=1.0, b=2.0)
    return tw.solve_winding_params(spec, 1), spec


def _cone(p: ExplicitTwistParams, spec: AnnulusSpec, rng: np.random.Generator) -> tp.ConeField:
    """Cone field rising across the hedgehog annulus."""
    return tp.random_cone_field(
        rng,
        tp.rising_bump(spec.a, spec.b, p.k + 0.25 * (spec.b - p.k)),
        psi=lambda r: np.asarray(tw.psi_eval(p, spec, np.clip(r, spec.a, spec.b))),
        psidot=lambda r: np.asarray(tw.psidot_eval(p, spec, np.clip(r, spec.a, spec.b))),
    )


def test_zero_perturbation(twist: tuple[ExplicitTwistParams, AnnulusSpec]) -> None:
    """Test that phi = 0 is admissible with zero energy change."""
    p, spec = twist

    outcome = tw.perturbation_test(p, spec, tp.ZeroField(), n_r=60, n_theta=48)

    assert outcome.admissible
    assert outcome.delta_I == 0.0
    assert outcome.h_integral == 0.0
    assert outcome.passed


def test_h_integral(twist: tuple[ExplicitTwistParams, AnnulusSpec], rng: np.random.Generator) -> None:
    """Test that the hedgehog integral ignores fields outside H and matches the probe."""
    p, spec = twist
    outside = tp.RadialField(tp.RadialBump(p.k + 0.05, spec.b - 0.05))
    cone = _cone(p, spec, rng)

    assert tw.h_integral(p, spec, outside, n_r=60, n_theta=48) == 0.0
    assert tw.h_integral(p, spec, cone, n_r=60, n_theta=48) == pytest.approx(
        tw.perturbation_test(p, spec, cone, n_r=60, n_theta=48).h_integral
    )


def test_quadrature_aligns_with_hedgehog_edge(
    twist: tuple[ExplicitTwistParams, AnnulusSpec],
) -> None:
    """Test that no midpoint cell straddles r = k."""
    p, spec = twist

    grid = tw.TwistQuadrature(p, spec, n_r=50, n_theta=16)
    edges = np.concatenate([[spec.a], np.cumsum(grid.dr) + spec.a])

    assert np.min(np.abs(edges - p.k)) < 1e-12
    assert np.sum(grid.weight) == pytest.approx(np.pi * (spec.b**2 - spec.a**2), rel=1e-12)


def test_small_cone_field_raises_energy(
    twist: tuple[ExplicitTwistParams, AnnulusSpec], rng: np.random.Generator,
) -> None:
    """Test that a small outward cone field is admissible and costs energy."""
    p, spec = twist

    outcome = tw.perturbation_test(p, spec, tp.ScaledField(_cone(p, spec, rng), 1e-2),
                                   n_r=80, n_theta=64)

    assert outcome.admissible
    assert outcome.delta_I > 0
    assert outcome.passed


def test_inward_cone_field_is_inadmissible(
    twist: tuple[ExplicitTwistParams, AnnulusSpec], rng: np.random.Generator,
) -> None:
    """Test that pushing the hedgehog inward makes det grad (u + phi) negative."""
    p, spec = twist

    probe = tw.MinimalityProbe(p, spec, n_r=80, n_theta=64)
    phi = tp.ScaledField(_cone(p, spec, rng), -1e-2)

    assert not probe.admissible(phi)
    assert probe.test(phi).min_det < 0


class TestBattery:
    """Random perturbation batteries."""

    def test_outer_battery(
        self, twist: tuple[ExplicitTwistParams, AnnulusSpec], rng: np.random.Generator,
    ) -> None:
        """Test that outer-annulus perturbations never lower the energy."""
        p, spec = twist

        result = tw.minimality_battery(p, spec, rng, count=6, kind="outer",
                                       n_r=60, n_theta=48)

        assert result.passed
        assert len(result.outcomes) + result.discarded == 6
        assert result.worst_margin >= 0
        assert all(o.h_integral >= -1e-12 for o in result.outcomes)

    def test_cone_battery(
        self, twist: tuple[ExplicitTwistParams, AnnulusSpec], rng: np.random.Generator,
    ) -> None:
        """Test that small cone perturbations are admissible and raise the energy."""
        p, spec = twist

        result = tw.minimality_battery(p, spec, rng, count=6, kind="cone", n_r=60, n_theta=48)

        assert result.passed
        assert all(o.admissible for o in result.outcomes)

    def test_unknown_kind(
        self, twist: tuple[ExplicitTwistParams, AnnulusSpec], rng: np.random.Generator,
    ) -> None:
        """Test that an unknown battery kind raises ValueError."""
        p, spec = twist

        with pytest.raises(ValueError, match="unknown battery kind"):
            tw.minimality_battery(p, spec, rng, count=1, kind="radial", n_r=20, n_theta=16)

    def test_empty_battery_fails(self) -> None:
        """Test that a battery with no admissible outcome does not pass."""
        result = tw.BatteryResult(kind="cone", outcomes=[], discarded=3)

        assert not result.passed
        assert result.worst_margin == 0.0
