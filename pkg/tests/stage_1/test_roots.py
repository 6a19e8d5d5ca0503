"""Stage 1.3: Root Finding Tests.

These tests verify bracket construction and Brent refinement.
Run with: uv run pytest tests/stage_1/test_roots.py -v
"""

import numpy as np
import pytest

pytestmark = pytest.mark.stage1


def test_find_root_cube_root() -> None:
    """Test that Brent's method finds 2^(1/3) to the requested tolerance."""
    from twistshear.numerics.roots import Bracket, find_root

    def f(x: float) -> float:
        return x**3 - 2.0

    root = find_root(f, Bracket.around(f, 0.0, 2.0), tol=1e-14)

    assert root == pytest.approx(2.0 ** (1.0 / 3.0), abs=1e-13)


def test_root_stays_inside_bracket() -> None:
    """Test that the returned root lies in [lo, hi]."""
    from twistshear.numerics.roots import Bracket, find_root

    bracket = Bracket.around(np.cos, 1.0, 2.0)
    root = find_root(np.cos, bracket)

    assert bracket.lo <= root <= bracket.hi
    assert root == pytest.approx(np.pi / 2, abs=1e-12)


def test_endpoint_root_returned_directly() -> None:
    """Test that an exact zero at an endpoint is returned without iterating."""
    from twistshear.numerics.roots import Bracket, find_root

    def f(x: float) -> float:
        return x - 1.0

    assert find_root(f, Bracket.around(f, 1.0, 3.0)) == 1.0
    assert find_root(f, Bracket.around(f, -1.0, 1.0)) == 1.0


def test_bracket_without_sign_change() -> None:
    """Test that a bracket with equal signs raises BracketError with samples."""
    from twistshear.errors import BracketError
    from twistshear.numerics.roots import Bracket

    with pytest.raises(BracketError) as info:
        Bracket.around(lambda x: x * x + 1.0, -1.0, 1.0)

    assert info.value.samples == [(-1.0, 2.0), (1.0, 2.0)]


def test_bracket_requires_ordered_ends() -> None:
    """Test that lo >= hi is rejected."""
    from twistshear.errors import BracketError
    from twistshear.numerics.roots import Bracket

    with pytest.raises(BracketError):
        Bracket(lo=1.0, hi=1.0, f_lo=-1.0, f_hi=1.0)


def test_scan_finds_first_sign_change() -> None:
    """Test that scanning returns the first sign-changing cell."""
    from twistshear.numerics.roots import Bracket

    bracket = Bracket.scan(np.sin, np.linspace(0.5, 10.0, 20))

    assert bracket.lo < np.pi < bracket.hi


def test_scan_skips_non_finite_samples() -> None:
    """Test that cells with non-finite values are ignored."""
    from twistshear.numerics.roots import Bracket

    def f(x: float) -> float:
        return np.inf if x < 1.0 else x - 2.5

    bracket = Bracket.scan(f, [0.0, 0.5, 1.0, 2.0, 3.0])

    assert (bracket.lo, bracket.hi) == (2.0, 3.0)


def test_scan_failure_attaches_samples() -> None:
    """Test that a failed scan reports every sample."""
    from twistshear.errors import BracketError
    from twistshear.numerics.roots import Bracket

    with pytest.raises(BracketError) as info:
        Bracket.scan(np.exp, [0.0, 1.0, 2.0])

    assert [x for x, _ in info.value.samples] == [0.0, 1.0, 2.0]
