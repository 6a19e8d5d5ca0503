"""Deformed-grid SVG figures rendered with matplotlib.

Figures are built on bare Figure objects (no pyplot state), so rendering is
safe from worker threads. Output bytes are deterministic: the SVG hash salt is
fixed and the date metadata is dropped.
"""

import io
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path

import matplotlib
import numpy as np
from matplotlib.figure import Figure
from numpy.typing import NDArray

from twistshear.shear.grid import ShearGridField
from twistshear.twist.models import AnnulusSpec

PointMap = Callable[[NDArray[np.float64]], NDArray[np.float64]]

HASH_SALT = "twistshear"
matplotlib.rcParams["svg.hashsalt"] = HASH_SALT
matplotlib.rcParams["svg.fonttype"] = "none"


@dataclass(frozen=True)
class SvgStyle:
    """Line counts and appearance of a deformed-grid figure."""

    lines: int = 16
    samples: int = 256
    color: str = "#1f4e79"
    linewidth: float = 0.6
    size: float = 4.0


@dataclass(frozen=True)
class AnnulusMap:
    """A map of the annulus given as a vectorized point function on (..., 2) arrays."""

    spec: AnnulusSpec
    u: PointMap


def identity_map(spec: AnnulusSpec) -> AnnulusMap:
    return AnnulusMap(spec=spec, u=lambda x: np.asarray(x, dtype=float))


def _annulus_curves(artifact: AnnulusMap, style: SvgStyle) -> list[NDArray[np.float64]]:
    a, b = artifact.spec.a, artifact.spec.b
    theta = np.linspace(0.0, 2 * np.pi, style.samples + 1)
    radii = np.linspace(a, b, style.lines // 2 + 1)
    curves = []
    for r in radii:
        pts = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)
        curves.append(artifact.u(pts))
    rs = np.linspace(a, b, style.samples)
    for t in np.linspace(0.0, 2 * np.pi, style.lines * 2, endpoint=False):
        pts = np.stack([rs * np.cos(t), rs * np.sin(t)], axis=-1)
        curves.append(artifact.u(pts))
    return curves


def _square_curves(artifact: ShearGridField, style: SvgStyle) -> list[NDArray[np.float64]]:
    grid = artifact.grid
    step = max(1, (grid.size - 1) // style.lines)
    sigma = artifact.sigma
    curves = []
    for i in range(0, grid.size, step):
        curves.append(np.stack([np.full(grid.size, grid.x[i]), grid.x + sigma[i, :]], axis=-1))
    for j in range(0, grid.size, step):
        curves.append(np.stack([grid.x, grid.x[j] + sigma[:, j]], axis=-1))
    return curves


def render_svg(artifact: AnnulusMap | ShearGridField, style: SvgStyle | None = None) -> str:
    """Render the image of a polar or cartesian grid under the map."""
    style = style or SvgStyle()
    if isinstance(artifact, ShearGridField):
        curves = _square_curves(artifact, style)
    else:
        curves = _annulus_curves(artifact, style)

    fig = Figure(figsize=(style.size, style.size))
    ax = fig.subplots()
    for c in curves:
        ax.plot(c[:, 0], c[:, 1], color=style.color, linewidth=style.linewidth)
    ax.set_aspect("equal")
    ax.set_axis_off()
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    return buf.getvalue()


def emit_svg(
    artifact: AnnulusMap | ShearGridField, path: Path, style: SvgStyle | None = None
) -> Path:
    """Write the deformed-grid SVG to ``path``."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_svg(artifact, style), encoding="utf-8", newline="\n")
    return path
