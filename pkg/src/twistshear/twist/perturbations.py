"""Smooth compactly supported test fields on the annulus.

Every field evaluates to (value, d_r, d_theta) on broadcast (r, theta) grids,
each of shape (..., 2). ``breakpoints`` lists the radii where the field is
only finitely smooth, so quadrature can split there.
"""

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from math import ceil
from typing import Protocol

import numpy as np
from numpy.typing import ArrayLike, NDArray

from twistshear.kernel.algebra2d import e_r, e_tau

FloatArray = NDArray[np.float64]
FieldValues = tuple[FloatArray, FloatArray, FloatArray]


class PerturbationField(Protocol):
    """Vector field phi(r, theta) with its polar derivatives."""

    breakpoints: tuple[float, ...]

    def evaluate(self, r: ArrayLike, theta: ArrayLike) -> FieldValues: ...


@dataclass(frozen=True)
class RadialBump:
    """Cutoff g(r) = P(t) t^p (1 - t)^q / max, t = (r - lo) / (hi - lo), zero outside.

    ``poly`` holds the coefficients of P in powers of t.
    """

    lo: float
    hi: float
    p: int = 3
    q: int = 3
    poly: tuple[float, ...] = (1.0,)

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise ValueError("bump support must satisfy lo < hi")
        if self.p < 2 or self.q < 2:
            raise ValueError("bump exponents must be at least 2")

    @property
    def peak(self) -> float:
        """Radius where t^p (1 - t)^q is largest."""
        return self.lo + (self.hi - self.lo) * self.p / (self.p + self.q)

    def __call__(self, r: ArrayLike) -> tuple[FloatArray, FloatArray]:
        """Return (g, g') at r."""
        width = self.hi - self.lo
        t = np.clip((np.asarray(r, dtype=float) - self.lo) / width, 0.0, 1.0)
        s = self.p / (self.p + self.q)
        norm = s**self.p * (1.0 - s) ** self.q
        base = t**self.p * (1.0 - t) ** self.q / norm
        dbase = (
            self.p * t ** (self.p - 1) * (1.0 - t) ** self.q
            - self.q * t**self.p * (1.0 - t) ** (self.q - 1)
        ) / (norm * width)
        coeffs = np.asarray(self.poly, dtype=float)
        poly = np.polynomial.polynomial.polyval(t, coeffs)
        dpoly = np.polynomial.polynomial.polyval(t, np.polynomial.polynomial.polyder(coeffs)) / width
        return base * poly, dbase * poly + base * dpoly


def _trig(theta: FloatArray, cos_c: FloatArray, sin_c: FloatArray) -> tuple[FloatArray, FloatArray]:
    """Vector trig polynomial sum_m C_m cos(m t) + S_m sin(m t) and its t-derivative."""
    value = np.zeros(theta.shape + (2,))
    deriv = np.zeros(theta.shape + (2,))
    for m in range(cos_c.shape[0]):
        c, s = np.cos(m * theta)[..., None], np.sin(m * theta)[..., None]
        value += c * cos_c[m] + s * sin_c[m]
        deriv += m * (c * sin_c[m] - s * cos_c[m])
    return value, deriv


@dataclass(frozen=True)
class FourierBumpField:
    """phi = g(r) T(theta) with g a RadialBump and T a vector trig polynomial."""

    bump: RadialBump
    cos_coeffs: FloatArray = field(repr=False)
    sin_coeffs: FloatArray = field(repr=False)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return (self.bump.lo, self.bump.hi)

    def evaluate(self, r: ArrayLike, theta: ArrayLike) -> FieldValues:
        rr, tt = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(theta, dtype=float))
        g, dg = self.bump(rr)
        t_val, t_der = _trig(tt, np.asarray(self.cos_coeffs), np.asarray(self.sin_coeffs))
        return g[..., None] * t_val, dg[..., None] * t_val, g[..., None] * t_der


@dataclass(frozen=True)
class ConeField:
    """phi = F(r) G(theta + psi(r)) e_r(theta + psi(r)) with G = exp(T), T scalar trig.

    For a twist with angle psi, F' >= 0 on the hedgehog annulus and G > 0
    give cof grad u . grad phi >= 0 and det grad phi >= 0 there.
    """

    radial: RadialBump
    psi: Callable[[FloatArray], FloatArray] = field(repr=False)
    psidot: Callable[[FloatArray], FloatArray] = field(repr=False)
    log_cos: FloatArray = field(repr=False)
    log_sin: FloatArray = field(repr=False)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return (self.radial.lo, self.radial.hi)

    def evaluate(self, r: ArrayLike, theta: ArrayLike) -> FieldValues:
        rr, tt = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(theta, dtype=float))
        f, df = self.radial(rr)
        alpha = tt + self.psi(rr)
        dpsi = self.psidot(rr)
        log_g = np.zeros_like(alpha)
        dlog_g = np.zeros_like(alpha)
        for m in range(len(self.log_cos)):
            log_g += self.log_cos[m] * np.cos(m * alpha) + self.log_sin[m] * np.sin(m * alpha)
            dlog_g += m * (self.log_sin[m] * np.cos(m * alpha) - self.log_cos[m] * np.sin(m * alpha))
        g = np.exp(log_g)
        dg = dlog_g * g
        er, et = e_r(alpha), e_tau(alpha)
        turn = dg[..., None] * er + g[..., None] * et
        value = (f * g)[..., None] * er
        d_theta = f[..., None] * turn
        d_r = (df * g)[..., None] * er + (f * dpsi)[..., None] * turn
        return value, d_r, d_theta


@dataclass(frozen=True)
class SumField:
    """Sum of test fields."""

    parts: tuple[PerturbationField, ...]

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(sorted({bp for part in self.parts for bp in part.breakpoints}))

    def evaluate(self, r: ArrayLike, theta: ArrayLike) -> FieldValues:
        totals: list[FloatArray] | None = None
        for part in self.parts:
            vals = part.evaluate(r, theta)
            totals = list(vals) if totals is None else [t + v for t, v in zip(totals, vals)]
        if totals is None:
            return ZeroField().evaluate(r, theta)
        return totals[0], totals[1], totals[2]


@dataclass(frozen=True)
class ScaledField:
    """s * phi."""

    base: PerturbationField
    scale: float

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return self.base.breakpoints

    def evaluate(self, r: ArrayLike, theta: ArrayLike) -> FieldValues:
        value, d_r, d_theta = self.base.evaluate(r, theta)
        return self.scale * value, self.scale * d_r, self.scale * d_theta


@dataclass(frozen=True)
class ZeroField:
    """phi = 0."""

    breakpoints: tuple[float, ...] = ()

    def evaluate(self, r: ArrayLike, theta: ArrayLike) -> FieldValues:
        rr, _ = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(theta, dtype=float))
        zero = np.zeros(rr.shape + (2,))
        return zero, zero.copy(), zero.copy()


@dataclass(frozen=True)
class RadialField:
    """phi = g(r) e_r(theta)."""

    bump: RadialBump

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return (self.bump.lo, self.bump.hi)

    def evaluate(self, r: ArrayLike, theta: ArrayLike) -> FieldValues:
        rr, tt = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(theta, dtype=float))
        g, dg = self.bump(rr)
        return g[..., None] * e_r(tt), dg[..., None] * e_r(tt), g[..., None] * e_tau(tt)


def random_fourier_field(
    rng: np.random.Generator,
    lo: float,
    hi: float,
    modes: int = 3,
    amplitude: float = 1.0,
) -> FourierBumpField:
    """Random polynomial-times-cutoff field with ``modes`` Fourier modes."""
    bump = RadialBump(
        lo=lo,
        hi=hi,
        p=int(rng.integers(3, 5)),
        q=int(rng.integers(3, 5)),
        poly=tuple(float(c) for c in np.concatenate([[1.0], 0.5 * rng.standard_normal(2)])),
    )
    decay = 1.0 / (1.0 + np.arange(modes))[:, None]
    cos_c = amplitude * decay * rng.standard_normal((modes, 2))
    sin_c = amplitude * decay * rng.standard_normal((modes, 2))
    sin_c[0] = 0.0
    return FourierBumpField(bump=bump, cos_coeffs=cos_c, sin_coeffs=sin_c)


def rising_bump(lo: float, hi: float, rise_until: float, q: int = 3) -> RadialBump:
    """Bump on [lo, hi] that is non-decreasing on [lo, rise_until]."""
    if not lo < rise_until < hi:
        raise ValueError("rise_until must lie inside the support")
    p = max(q, ceil(q * (rise_until - lo) / (hi - rise_until)))
    return RadialBump(lo=lo, hi=hi, p=p, q=q)


def random_cone_field(
    rng: np.random.Generator,
    radial: RadialBump,
    psi: Callable[[FloatArray], FloatArray],
    psidot: Callable[[FloatArray], FloatArray],
    modes: int = 3,
    amplitude: float = 1.0,
) -> ConeField:
    """Random cone field F G(theta + psi) e_r(theta + psi) with G > 0."""
    log_cos = 0.5 * rng.standard_normal(modes) / (1.0 + np.arange(modes))
    log_sin = 0.5 * rng.standard_normal(modes) / (1.0 + np.arange(modes))
    log_sin[0] = 0.0
    log_cos[0] = np.log(amplitude)
    return ConeField(radial=radial, psi=psi, psidot=psidot, log_cos=log_cos, log_sin=log_sin)


def combine(fields: Sequence[PerturbationField]) -> PerturbationField:
    """Sum a list of fields."""
    return SumField(parts=tuple(fields))
