"""Bracketed scalar root finding (Brent's method via scipy)."""

from collections.abc import Callable, Sequence
from dataclasses import dataclass

import logfire
import numpy as np
from scipy.optimize import brentq

from twistshear.config import get_settings
from twistshear.errors import BracketError


@dataclass(frozen=True)
class Bracket:
    """Interval [lo, hi] on which the target function changes sign.

    Usage:
        bracket = Bracket.around(f, 1.0, 2.0)
        root = find_root(f, bracket)
    """

    lo: float
    hi: float
    f_lo: float
    f_hi: float

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise BracketError(f"bracket requires lo < hi, got [{self.lo}, {self.hi}]")
        if self.f_lo * self.f_hi > 0:
            raise BracketError(
                "no sign change on bracket",
                samples=[(self.lo, self.f_lo), (self.hi, self.f_hi)],
            )

    @classmethod
    def around(cls, f: Callable[[float], float], lo: float, hi: float) -> "Bracket":
        """Evaluate f at both ends and verify the sign change."""
        return cls(lo=lo, hi=hi, f_lo=float(f(lo)), f_hi=float(f(hi)))

    @classmethod
    def scan(cls, f: Callable[[float], float], grid: Sequence[float]) -> "Bracket":
        """Return the first sign-changing cell of f sampled on an increasing grid.

        Raises:
            BracketError: If no cell changes sign. The samples are attached.
        """
        xs = [float(x) for x in grid]
        values = [float(f(x)) for x in xs]
        for i in range(len(xs) - 1):
            if np.isfinite(values[i]) and np.isfinite(values[i + 1]):
                if values[i] == 0.0 or values[i] * values[i + 1] < 0:
                    return cls(lo=xs[i], hi=xs[i + 1], f_lo=values[i], f_hi=values[i + 1])
        raise BracketError("no sign change found while scanning", samples=list(zip(xs, values)))


def find_root(
    f: Callable[[float], float],
    bracket: Bracket,
    tol: float | None = None,
) -> float:
    """Locate a root of f inside the bracket with Brent's method.

    Args:
        f: Continuous scalar function
        bracket: Verified sign-change interval
        tol: Absolute x-tolerance. Defaults to settings.root_tol.

    Returns:
        Root within [bracket.lo, bracket.hi]
    """
    tol = tol if tol is not None else get_settings().root_tol
    if bracket.f_lo == 0.0:
        return bracket.lo
    if bracket.f_hi == 0.0:
        return bracket.hi
    with logfire.span("find_root", lo=bracket.lo, hi=bracket.hi):
        root, info = brentq(
            f, bracket.lo, bracket.hi, xtol=tol, rtol=4 * np.finfo(float).eps,
            maxiter=200, full_output=True,
        )
        logfire.debug("brent converged", iterations=info.iterations, root=root)
    return float(min(max(root, bracket.lo), bracket.hi))
