"""Dependency-free SVG output for 2-D clusterings and POCS iterate paths.

Coordinates are written with fixed precision so identical inputs give
byte-identical files.
"""

from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

# no reds: prototypes are drawn in red
PALETTE = (
    "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#bcbd22",
    "#7f7f7f", "#e377c2", "#aec7e8", "#98df8a", "#ffbb78", "#c5b0d5", "#c49c94",
    "#9edae5", "#dbdb8d", "#393b79", "#637939", "#8c6d31", "#7b4173",
)
PROTOTYPE_COLOR = "red"
MARGIN = 0.05


class _Frame:
    """Maps data coordinates in [lo, hi]^2 (plus margin) to pixels, y up."""

    def __init__(self, lo: Sequence[float], hi: Sequence[float], size: int):
        self.lo = np.asarray(lo, float)
        span = np.asarray(hi, float) - self.lo
        self.span = np.where(span > 0, span, 1.0)
        self.size = size

    def __call__(self, p) -> tuple[str, str]:
        u = (np.asarray(p, float) - self.lo) / self.span
        x = (u[0] + MARGIN) / (1 + 2 * MARGIN) * self.size
        y = (1 + MARGIN - u[1]) / (1 + 2 * MARGIN) * self.size
        return f"{x:.3f}", f"{y:.3f}"


def _header(size: int, title: str | None) -> list[str]:
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect class="background" x="0" y="0" width="{size}" height="{size}" fill="white"/>',
    ]
    if title:
        out.append(f'<title>{escape(title)}</title>')
    return out


def _cross(frame: _Frame, p, half: float = 6.0) -> str:
    x, y = (float(v) for v in frame(p))
    return (
        f'<path class="prototype" d="M{x - half:.3f},{y - half:.3f} L{x + half:.3f},{y + half:.3f} '
        f'M{x - half:.3f},{y + half:.3f} L{x + half:.3f},{y - half:.3f}" '
        f'stroke="{PROTOTYPE_COLOR}" stroke-width="3" fill="none"/>'
    )


def cluster_scatter(points, labels, prototypes, size: int = 600, title: str | None = None,
                    point_radius: float = 2.0) -> str:
    """Scatter plot of normalized 2-D points, one color per cluster label.

    Prototypes are drawn last as red crosses, so they sit above the points,
    including prototypes of clusters that have no members.
    """
    X = np.asarray(points, float)
    P = np.asarray(prototypes, float)
    if X.ndim != 2 or X.shape[1] != 2 or P.shape[1] != 2:
        raise ValueError("plotting supports 2-D datasets only")
    frame = _Frame((0.0, 0.0), (1.0, 1.0), size)
    out = _header(size, title)
    out.append('<g class="points">')
    for p, lab in zip(X, labels):
        cx, cy = frame(p)
        color = PALETTE[int(lab) % len(PALETTE)]
        out.append(f'<circle class="point" cx="{cx}" cy="{cy}" r="{point_radius}" fill="{color}"/>')
    out.append("</g>")
    out.append('<g class="prototypes">')
    out.extend(_cross(frame, p) for p in P)
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def pocs_paths(sets_svg: list[str], paths: dict[str, np.ndarray], lo, hi, size: int = 500,
               title: str | None = None) -> str:
    """Iterate paths as polylines drawn over the set outlines.

    `sets_svg` entries are strings or renderers from :func:`set_outline`.
    """
    frame = _Frame(lo, hi, size)
    out = _header(size, title)
    out.extend(s(frame) if callable(s) else s for s in sets_svg)
    colors = ("#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd")
    for i, (name, pts) in enumerate(paths.items()):
        coords = " ".join(",".join(frame(p)) for p in pts)
        out.append(
            f'<polyline class="path {escape(name)}" points="{coords}" fill="none" '
            f'stroke="{colors[i % len(colors)]}" stroke-width="1.5"/>'
        )
        x, y = frame(pts[-1])
        out.append(f'<circle class="final {escape(name)}" cx="{x}" cy="{y}" r="4" '
                   f'fill="{colors[i % len(colors)]}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def set_outline(cset):
    """Deferred SVG for a 2-D convex set; call with a frame to render."""
    from .geometry import Ball, Singleton

    def render(frame: _Frame) -> str:
        if isinstance(cset, Ball):
            cx, cy = frame(cset.center)
            r = cset.radius / frame.span[0] / (1 + 2 * MARGIN) * frame.size
            return (f'<circle class="set" cx="{cx}" cy="{cy}" r="{r:.3f}" '
                    f'fill="#dddddd" stroke="#555555"/>')
        if isinstance(cset, Singleton):
            cx, cy = frame(cset.center)
            return f'<circle class="set" cx="{cx}" cy="{cy}" r="5" fill="#555555"/>'
        raise TypeError(f"no outline for {type(cset).__name__}")

    return render
