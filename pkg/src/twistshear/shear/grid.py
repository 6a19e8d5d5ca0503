"""Uniform nodal grids on the square Q = [-1, 1]^2 and shear-map helpers.

Nodes are indexed sigma[i, j] with x1 = -1 + i h and x2 = -1 + j h, h = 1/n,
i, j = 0..2n. A "column" is a fixed i. The interface K = {x1 = 1/2} is the
column i = 3n/2, so n must be even.

Regions: M is x1 <= 0, N is 0 < x1 < 1/2, P is x1 >= 1/2.
"""

from dataclasses import dataclass, field
from enum import IntEnum
from functools import cached_property

import numpy as np
from numpy.typing import ArrayLike, NDArray

from twistshear.errors import DomainError

FloatArray = NDArray[np.float64]

MIN_RESOLUTION = 16


class Region(IntEnum):
    """Region label of a node."""

    M = 0
    N = 1
    P = 2


def check_resolution(n: int) -> None:
    """Require an even resolution n >= 16."""
    if n < MIN_RESOLUTION or n % 2:
        raise ValueError(f"grid resolution must be even and >= {MIN_RESOLUTION}, got {n}")


def sigma0_eval(x1: ArrayLike, x2: ArrayLike) -> FloatArray | float:
    """Boundary shear data: 0 on x1 <= 0, -2 x1 x2 on 0 < x1 < 1/2, -x2 on x1 >= 1/2.

    Raises:
        DomainError: If a point lies outside the closed square
    """
    a, b = np.broadcast_arrays(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))
    if np.any(np.abs(a) > 1 + 1e-12) or np.any(np.abs(b) > 1 + 1e-12):
        raise DomainError("point outside the square [-1, 1]^2")
    value = np.where(a <= 0, 0.0, np.where(a < 0.5, -2 * a * b, -b))
    return float(value) if value.ndim == 0 else value


def det_sigma0(x1: ArrayLike, x2: ArrayLike) -> FloatArray | float:
    """det grad u_{sigma0} = 1 + d2 sigma0: 1 on M, 1 - 2 x1 on N, 0 on P."""
    a, _ = np.broadcast_arrays(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))
    value = np.where(a <= 0, 1.0, np.where(a < 0.5, 1 - 2 * a, 0.0))
    return float(value) if value.ndim == 0 else value


@dataclass
class ShearGridField:
    """Nodal scalar field sigma on Q with region labels.

    Usage:
        field = ShearGridField.from_function(64, sigma0_eval)
        jac = field.constraint()
    """

    n: int
    sigma: FloatArray = field(repr=False)

    def __post_init__(self) -> None:
        check_resolution(self.n)
        size = 2 * self.n + 1
        self.sigma = np.asarray(self.sigma, dtype=float)
        if self.sigma.shape != (size, size):
            raise ValueError(f"sigma must have shape {(size, size)}, got {self.sigma.shape}")

    @classmethod
    def from_function(cls, n: int, func: object) -> "ShearGridField":
        """Sample func(x1, x2) at the nodes."""
        grid = ShearGrid(n)
        return cls(n=n, sigma=np.asarray(func(grid.X1, grid.X2), dtype=float))  # type: ignore[operator]

    @property
    def grid(self) -> "ShearGrid":
        return ShearGrid(self.n)

    @property
    def h(self) -> float:
        return 1.0 / self.n

    def d2(self) -> FloatArray:
        """Forward x2-difference, backward on the top row."""
        return d2_forward(self.sigma, self.h)

    def constraint(self) -> FloatArray:
        """Nodal Jacobian 1 + D2 sigma."""
        return 1.0 + self.d2()

    def copy_with(self, sigma: FloatArray) -> "ShearGridField":
        return ShearGridField(n=self.n, sigma=sigma)


class ShearGrid:
    """Coordinates, region labels and index helpers for resolution n."""

    def __init__(self, n: int):
        check_resolution(n)
        self.n = n
        self.h = 1.0 / n
        self.size = 2 * n + 1
        self.x = np.linspace(-1.0, 1.0, self.size)
        self.i_k = 3 * n // 2
        self.i_zero = n

    @cached_property
    def X1(self) -> FloatArray:  # noqa: N802
        return np.broadcast_to(self.x[:, None], (self.size, self.size)).copy()

    @cached_property
    def X2(self) -> FloatArray:  # noqa: N802
        return np.broadcast_to(self.x[None, :], (self.size, self.size)).copy()

    @cached_property
    def regions(self) -> NDArray[np.int_]:
        """Region label per node."""
        col = np.where(
            np.arange(self.size) <= self.i_zero,
            Region.M,
            np.where(np.arange(self.size) < self.i_k, Region.N, Region.P),
        )
        return np.broadcast_to(col[:, None], (self.size, self.size)).copy()

    @cached_property
    def boundary(self) -> NDArray[np.bool_]:
        """True on the nodes of the square's boundary."""
        mask = np.zeros((self.size, self.size), dtype=bool)
        mask[0, :] = mask[-1, :] = mask[:, 0] = mask[:, -1] = True
        return mask

    @cached_property
    def sigma0(self) -> FloatArray:
        return np.asarray(sigma0_eval(self.X1, self.X2))


@dataclass(frozen=True)
class SubdomainOmega:
    """Omega = (-1, 1/2) x (-1, 1): columns 0..i_K of the grid, K = column i_K."""

    n: int

    @property
    def i_k(self) -> int:
        return 3 * self.n // 2

    @property
    def shape(self) -> tuple[int, int]:
        return self.i_k + 1, 2 * self.n + 1

    def restrict(self, values: FloatArray) -> FloatArray:
        """Restrict a Q-array to the closed Omega columns."""
        return np.asarray(values)[: self.i_k + 1, :]


def d2_forward(sigma: FloatArray, h: float) -> FloatArray:
    """Forward difference in x2 (axis 1), backward on the last row."""
    out = np.empty_like(sigma)
    out[:, :-1] = (sigma[:, 1:] - sigma[:, :-1]) / h
    out[:, -1] = out[:, -2]
    return out


def edge_energy(sigma: FloatArray) -> float:
    """sum over edges of (difference)^2, half weight on edges lying on the boundary.

    Equals int |grad sigma|^2 for the P1 interpolant on the structured mesh.
    """
    dx = np.diff(sigma, axis=0)
    dy = np.diff(sigma, axis=1)
    wx = np.ones(dx.shape)
    wx[:, 0] = wx[:, -1] = 0.5
    wy = np.ones(dy.shape)
    wy[0, :] = wy[-1, :] = 0.5
    return float(np.sum(wx * dx**2) + np.sum(wy * dy**2))


def edge_form(sigma: FloatArray, eta: FloatArray) -> float:
    """Bilinear form associated with edge_energy: discrete int grad sigma . grad eta."""
    dx = np.diff(sigma, axis=0) * np.diff(eta, axis=0)
    dy = np.diff(sigma, axis=1) * np.diff(eta, axis=1)
    dx[:, 0] *= 0.5
    dx[:, -1] *= 0.5
    dy[0, :] *= 0.5
    dy[-1, :] *= 0.5
    return float(np.sum(dx) + np.sum(dy))


def trapezoid_weights(size: int) -> FloatArray:
    """Trapezoid weights (in units of h) for a uniform grid of ``size`` nodes."""
    w = np.ones(size)
    w[0] = w[-1] = 0.5
    return w
