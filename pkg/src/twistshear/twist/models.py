"""Twist map contracts.

CRITICAL: these types are shared by the explicit and penalized twist
solvers, the report builders and the CSV emitters. Field names are the CSV
column names.
"""

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator


class AnnulusSpec(BaseModel):
    """Annulus A = {a < |x| < b}."""

    model_config = ConfigDict(frozen=True)

    a: float = Field(default=1.0, gt=0, description="Inner radius")
    b: float = Field(default=2.0, gt=0, description="Outer radius")

    @model_validator(mode="after")
    def check_order(self) -> "AnnulusSpec":
        """Require 0 < a < b."""
        if not self.a < self.b:
            raise ValueError(f"annulus requires a < b, got a={self.a}, b={self.b}")
        return self

    @property
    def area(self) -> float:
        """Area pi (b^2 - a^2)."""
        return float(np.pi * (self.b**2 - self.a**2))

    def scaled(self, factor: float) -> "AnnulusSpec":
        """Annulus dilated by ``factor``."""
        return AnnulusSpec(a=self.a * factor, b=self.b * factor)


class ExplicitTwistParams(BaseModel):
    """Solved parameters of the explicit twist with N windings.

    The plateau rho = a holds on the hedgehog annulus [a, k].
    """

    model_config = ConfigDict(frozen=True)

    N: int = Field(..., ge=1, description="Winding number")
    omega: float = Field(..., gt=0, description="Angular momentum constant r rho^2 psi'")
    k: float = Field(..., gt=0, description="Hedgehog radius")
    c: float = Field(..., description="Energy-momentum constant -a^2 + omega^2/a^2")

    def plateau_coefficients(self, a: float) -> tuple[float, float]:
        """Return (A, B) = (a^2 + w^2/a^2, a^2 - w^2/a^2)."""
        ratio = self.omega**2 / a**2
        return a**2 + ratio, a**2 - ratio


@dataclass
class RadialProfile:
    """Sampled symmetric map u(r, t) = rho(r) e_r(t + psi(r)).

    Attributes:
        r: Strictly increasing radii
        rho, rhodot, psi, psidot: Profile values and derivatives at r
    """

    r: NDArray[np.float64]
    rho: NDArray[np.float64]
    rhodot: NDArray[np.float64]
    psi: NDArray[np.float64]
    psidot: NDArray[np.float64]

    def __post_init__(self) -> None:
        n = len(self.r)
        for name in ("rho", "rhodot", "psi", "psidot"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"profile array {name!r} does not match grid length {n}")
        if n > 1 and np.any(np.diff(self.r) <= 0):
            raise ValueError("profile grid must be strictly increasing")

    @property
    def jacobian(self) -> NDArray[np.float64]:
        """det grad u = rho rhodot / r."""
        return self.rho * self.rhodot / self.r

    def columns(self) -> dict[str, NDArray[np.float64]]:
        """CSV columns in emission order."""
        return {
            "r": self.r,
            "rho": self.rho,
            "rhodot": self.rhodot,
            "psi": self.psi,
            "psidot": self.psidot,
        }
