"""Penalty functions h0 for the stored energy W(F) = 1/2 |F|^2 + h0(det F).

A penalty is convex and non-negative, blows up like d^(-s) as d -> 0+, is
+inf for d <= 0, and has h0'' bounded on [mu, inf) for every mu > 0.
"""

from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel

FloatArray = NDArray[np.float64]
Scalar = Callable[[FloatArray], FloatArray]


class HypothesisReport(BaseModel):
    """Sampled check of the structural hypotheses on a penalty."""

    convex: bool
    nonnegative: bool
    blowup_near_zero: bool
    growth_at_infinity: bool
    bounded_second_derivative: bool
    blowup_ratio_range: tuple[float, float]
    growth_ratio_range: tuple[float, float]

    @property
    def passed(self) -> bool:
        """All hypotheses hold on the samples."""
        return (
            self.convex
            and self.nonnegative
            and self.blowup_near_zero
            and self.growth_at_infinity
            and self.bounded_second_derivative
        )


@dataclass(frozen=True)
class PenaltyFunction:
    """Evaluator triple (h0, h0', h0'') with hypothesis metadata.

    Attributes:
        name: Short identifier used on the CLI and in reports
        h0, dh0, d2h0: Vectorized evaluators on d > 0
        s: Blow-up exponent near 0, c1 d^(-s-k) <= (-1)^k h0^(k)(d) for d < d0
        tau: Growth exponent of h0'' for d >= d1
        d0, d1: Ranges of the two asymptotic regimes
    """

    name: str
    h0: Scalar = field(repr=False)
    dh0: Scalar = field(repr=False)
    d2h0: Scalar = field(repr=False)
    s: float
    tau: float
    d0: float
    d1: float
    formula: str = ""

    def energy(self, d: ArrayLike) -> FloatArray | float:
        """h0(d), extended by +inf for d <= 0."""
        dd = np.asarray(d, dtype=float)
        safe = np.where(dd > 0, dd, 1.0)
        value = np.where(dd > 0, self.h0(safe), np.inf)
        return float(value) if value.ndim == 0 else value

    @property
    def natural_flux_at_one(self) -> float:
        """1 + h0'(1); the corner discontinuity needs this non-zero."""
        return float(1.0 + self.dh0(np.asarray(1.0)))

    def second_derivative_bound(self, mu: float, upper: float = 1e6, samples: int = 4000) -> float:
        """C_mu = sup of |h0''| over [mu, upper], sampled log-uniformly."""
        d = np.geomspace(mu, max(upper, 10 * mu), samples)
        return float(np.max(np.abs(self.d2h0(d))))

    def check_hypotheses(self, samples: int = 2000) -> HypothesisReport:
        """Sample the convexity, blow-up and growth hypotheses."""
        d = np.geomspace(1e-4, 1e4, samples)
        h, dh, d2h = self.h0(d), self.dh0(d), self.d2h0(d)

        near = d[d < self.d0]
        signed = [self.h0(near), -self.dh0(near), self.d2h0(near)]
        ratios = np.concatenate(
            [sgn * near ** (self.s + k) for k, sgn in enumerate(signed)]
        )
        far = d[d >= self.d1]
        growth = self.d2h0(far) / far**self.tau
        c_mu = self.second_derivative_bound(min(1.0, self.d0))

        return HypothesisReport(
            convex=bool(np.all(d2h > 0)),
            nonnegative=bool(np.all(h >= 0)),
            blowup_near_zero=bool(np.all(ratios > 0) and np.all(np.isfinite(ratios))),
            growth_at_infinity=bool(np.all(growth > 0) and np.all(np.isfinite(growth))),
            bounded_second_derivative=bool(np.isfinite(c_mu)),
            blowup_ratio_range=(float(ratios.min()), float(ratios.max())),
            growth_ratio_range=(float(growth.min()), float(growth.max())),
        )


def default_penalty() -> PenaltyFunction:
    """h0(d) = 1/(2d) + (d - 1)^2 / 2 with s = 1, tau = 0."""
    return PenaltyFunction(
        name="default",
        h0=lambda d: 0.5 / d + 0.5 * (d - 1.0) ** 2,
        dh0=lambda d: -0.5 / d**2 + d - 1.0,
        d2h0=lambda d: 1.0 / d**3 + 1.0,
        s=1.0,
        tau=0.0,
        d0=0.5,
        d1=1.0,
        formula="1/(2d) + (d-1)^2/2",
    )


def negative_control_penalty() -> PenaltyFunction:
    """h0(d) = 1/d + (d - 1)^2 / 2, for which 1 + h0'(1) = 0."""
    return PenaltyFunction(
        name="negcontrol",
        h0=lambda d: 1.0 / d + 0.5 * (d - 1.0) ** 2,
        dh0=lambda d: -1.0 / d**2 + d - 1.0,
        d2h0=lambda d: 2.0 / d**3 + 1.0,
        s=1.0,
        tau=0.0,
        d0=0.5,
        d1=1.0,
        formula="1/d + (d-1)^2/2",
    )


PENALTIES: dict[str, Callable[[], PenaltyFunction]] = {
    "default": default_penalty,
    "negcontrol": negative_control_penalty,
}


def get_penalty(name: str) -> PenaltyFunction:
    """Look up a penalty by CLI name."""
    try:
        return PENALTIES[name]()
    except KeyError:
        raise ValueError(f"unknown penalty {name!r}; choose from {sorted(PENALTIES)}") from None


def lemma17_bound_check(
    h: PenaltyFunction, mu: float, samples: int = 1000, upper: float = 1e3
) -> tuple[float, float]:
    """Worst sampled |h0'(s)|/s on [mu, upper] and the bound 2 C_mu + |h0'(mu)|/mu.

    Returns:
        (worst ratio, bound)
    """
    if not mu > 0:
        raise ValueError("mu must be positive")
    s = np.geomspace(mu, max(upper, 10 * mu), samples)
    worst = float(np.max(np.abs(h.dh0(s)) / s))
    bound = 2 * h.second_derivative_bound(mu) + abs(float(h.dh0(np.asarray(mu)))) / mu
    return worst, bound
