"""Adaptive Simpson quadrature with Richardson correction.

CRITICAL: the error control is absolute. Callers integrating large
quantities should scale ``tol`` accordingly.
"""

from collections.abc import Callable

import logfire

from twistshear.config import get_settings
from twistshear.errors import QuadratureError

MAX_DEPTH = 50
MIN_DEPTH = 3


def _simpson(fa: float, fm: float, fb: float, width: float) -> float:
    return width * (fa + 4.0 * fm + fb) / 6.0


def integrate_1d(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float | None = None,
) -> float:
    """Integrate f over [lo, hi] to an estimated absolute error <= tol.

    Each panel is split in two; a panel is accepted when the Simpson
    estimates on one and two halves agree within 15 * its share of tol,
    and the Richardson-corrected value S2 + (S2 - S1) / 15 is used.

    Args:
        f: Integrand, finite on [lo, hi]
        lo: Lower limit
        hi: Upper limit
        tol: Absolute tolerance. Defaults to settings.quad_tol.

    Returns:
        The integral estimate

    Raises:
        QuadratureError: If a panel reaches depth 50 without converging.
            The exception carries the best estimate over all panels.
    """
    tol = tol if tol is not None else get_settings().quad_tol
    if hi == lo:
        return 0.0
    if hi < lo:
        return -integrate_1d(f, hi, lo, tol)

    fa, fb = f(lo), f(hi)
    mid = 0.5 * (lo + hi)
    fm = f(mid)
    whole = _simpson(fa, fm, fb, hi - lo)

    total = 0.0
    error = 0.0
    failed = False
    # (a, m, b, fa, fm, fb, whole, tol, depth)
    stack = [(lo, mid, hi, fa, fm, fb, whole, tol, 0)]
    while stack:
        a, m, b, fa, fm, fb, whole, panel_tol, depth = stack.pop()
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = _simpson(fa, flm, fm, m - a)
        right = _simpson(fm, frm, fb, b - m)
        delta = left + right - whole
        if depth >= MIN_DEPTH and abs(delta) <= 15.0 * panel_tol:
            total += left + right + delta / 15.0
            error += abs(delta) / 15.0
        elif depth >= MAX_DEPTH:
            total += left + right + delta / 15.0
            error += abs(delta) / 15.0
            failed = True
        else:
            stack.append((m, rm, b, fm, frm, fb, right, 0.5 * panel_tol, depth + 1))
            stack.append((a, lm, m, fa, flm, fm, left, 0.5 * panel_tol, depth + 1))

    if failed:
        logfire.warn("quadrature depth exhausted", lo=lo, hi=hi, estimate=total, error=error)
        raise QuadratureError(
            f"adaptive Simpson did not reach tol={tol:g} on [{lo:g}, {hi:g}]",
            best_estimate=total,
            error_estimate=error,
        )
    return total
