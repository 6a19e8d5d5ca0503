"""2x2 matrix kernel, polar frame and winding number.

All helpers accept single matrices of shape (2, 2) or broadcast stacks of
shape (..., 2, 2); vectors are (..., 2). Everything here is a pure function.

Conventions:
- J is the rotation by pi/2, rows (0, -1), (1, 0).
- cof A = J^T A J, so (cof A)^T A = det(A) * 1.
- X . Y = tr(X^T Y).
"""

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from twistshear.errors import DomainError, UndefinedWindingError

J = np.array([[0.0, -1.0], [1.0, 0.0]])
IDENTITY = np.eye(2)

# Closure tolerance for sampled curves, relative to their scale
CLOSURE_RTOL = 1e-9
# Origin proximity guard, relative to curve diameter
ORIGIN_RTOL = 1e-9
# Rounded winding numbers must sit this close to an integer
INTEGER_GUARD = 0.1

FloatArray = NDArray[np.float64]


def det2(a: ArrayLike) -> FloatArray | float:
    """Exact 2x2 determinant (vectorized over leading axes)."""
    m = np.asarray(a, dtype=float)
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]


def cof2(a: ArrayLike) -> FloatArray:
    """Cofactor matrix J^T A J."""
    m = np.asarray(a, dtype=float)
    out = np.empty_like(m)
    out[..., 0, 0] = m[..., 1, 1]
    out[..., 0, 1] = -m[..., 1, 0]
    out[..., 1, 0] = -m[..., 0, 1]
    out[..., 1, 1] = m[..., 0, 0]
    return out


def apply_J(v: ArrayLike) -> FloatArray:  # noqa: N802
    """Rotate by pi/2: (v1, v2) -> (-v2, v1)."""
    w = np.asarray(v, dtype=float)
    return np.stack([-w[..., 1], w[..., 0]], axis=-1)


def frobenius(a: ArrayLike, b: ArrayLike) -> FloatArray | float:
    """Frobenius inner product tr(A^T B)."""
    return np.sum(np.asarray(a, dtype=float) * np.asarray(b, dtype=float), axis=(-2, -1))


def outer(a: ArrayLike, b: ArrayLike) -> FloatArray:
    """Tensor product a (x) b with (a (x) b)_ij = a_i b_j."""
    x = np.asarray(a, dtype=float)
    y = np.asarray(b, dtype=float)
    return x[..., :, None] * y[..., None, :]


def e_r(theta: ArrayLike) -> FloatArray:
    """Radial unit vector (cos t, sin t)."""
    t = np.asarray(theta, dtype=float)
    return np.stack([np.cos(t), np.sin(t)], axis=-1)


def e_tau(theta: ArrayLike) -> FloatArray:
    """Tangential unit vector (-sin t, cos t) = J e_r."""
    t = np.asarray(theta, dtype=float)
    return np.stack([-np.sin(t), np.cos(t)], axis=-1)


def polar_gradient(
    phi_r: ArrayLike,
    phi_theta: ArrayLike,
    r: ArrayLike,
    theta: ArrayLike,
) -> FloatArray:
    """Assemble grad phi = phi_r (x) e_r + (1/r) phi_theta (x) e_tau.

    Args:
        phi_r: Radial derivative of phi, shape (..., 2)
        phi_theta: Angular derivative of phi, shape (..., 2)
        r: Radius, must be positive
        theta: Polar angle

    Returns:
        Gradient matrices of shape (..., 2, 2)

    Raises:
        DomainError: If any r <= 0
    """
    radius = np.asarray(r, dtype=float)
    if np.any(radius <= 0):
        raise DomainError("polar gradient requires r > 0")
    pr = np.asarray(phi_r, dtype=float)
    pt = np.asarray(phi_theta, dtype=float)
    return outer(pr, e_r(theta)) + outer(pt / radius[..., None], e_tau(theta))


@dataclass(frozen=True)
class PlanarCurve:
    """Closed sampled planar curve.

    Usage:
        curve = PlanarCurve(np.column_stack([np.cos(t), np.sin(t)]))
        winding_number(curve)
    """

    points: FloatArray = field(repr=False)

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
            raise ValueError("curve points must have shape (n, 2) with n >= 2")
        scale = max(1.0, float(np.max(np.abs(pts))))
        if np.linalg.norm(pts[0] - pts[-1]) > CLOSURE_RTOL * scale:
            raise UndefinedWindingError("curve is not closed")
        object.__setattr__(self, "points", pts)

    @property
    def diameter(self) -> float:
        """Largest coordinate extent of the samples."""
        extent = self.points.max(axis=0) - self.points.min(axis=0)
        return float(np.hypot(extent[0], extent[1]))


def winding_number(curve: PlanarCurve) -> float:
    """Discrete winding number about the origin.

    Applies the chord-midpoint rule to (x y' - x' y) / (x^2 + y^2) on every chord
    and divides by 2 pi.

    Raises:
        UndefinedWindingError: If the curve comes within 1e-9 * diameter of
            the origin, or the result is not within 0.1 of an integer
            (under-sampled curve).
    """
    pts = curve.points
    radius = np.hypot(pts[:, 0], pts[:, 1])
    diameter = curve.diameter
    if radius.min() <= ORIGIN_RTOL * diameter or radius.min() == 0.0:
        raise UndefinedWindingError("curve passes through the origin")
    if diameter == 0.0:
        return 0.0

    mid = 0.5 * (pts[1:] + pts[:-1])
    delta = np.diff(pts, axis=0)
    denom = mid[:, 0] ** 2 + mid[:, 1] ** 2
    if np.any(denom <= (ORIGIN_RTOL * diameter) ** 2):
        raise UndefinedWindingError("chord passes through the origin")
    value = float(np.sum((mid[:, 0] * delta[:, 1] - mid[:, 1] * delta[:, 0]) / denom) / (2 * np.pi))

    if abs(value - round(value)) >= INTEGER_GUARD:
        raise UndefinedWindingError(
            f"winding value {value:.4f} is not near an integer; refine sampling", value
        )
    return value
