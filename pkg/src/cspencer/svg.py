"""SVG pictures of open toric bodies on the torus.

Each body is rasterised on a uniform sample grid, and every horizontal run
of member samples becomes one rectangle.  The grid points are drawn as
markers and the fundamental domain ``[-pi, pi)^2`` as a black frame.  All
coordinates are printed with fixed precision so the output is reproducible
byte for byte.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import EPS
from .core import OMEGA
from .errors import DomainError
from .torus import SQRT3, ToricCenter

DEFAULT_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
CANVAS = 600.0


@dataclass(frozen=True)
class FigureSpec:
    centers: tuple
    show_grid: bool = True
    sample_resolution: int = 200     # samples per period along each axis
    palette: tuple = DEFAULT_PALETTE
    span: float = 1.5                # half-width of the window in units of pi
    closed: bool = False
    title: str = field(default="", compare=False)

    def __post_init__(self):
        centers = tuple(c if isinstance(c, ToricCenter) else ToricCenter(c) for c in self.centers)
        object.__setattr__(self, "centers", centers)
        if self.sample_resolution < 100:
            raise DomainError("sample_resolution must be at least 100")
        if not self.span >= 1.0:
            raise DomainError("the window must contain the fundamental domain (span >= 1)")
        if not self.palette:
            raise DomainError("palette must not be empty")


def membership_raster(center, resolution, span=1.5, closed=False):
    """Boolean raster of a body over ``[-span pi, span pi]^2``.

    Row 0 is the top of the window (largest second angle); columns follow
    the first angle.  Samples sit at cell centres.
    """
    a = center.a if isinstance(center, ToricCenter) else np.asarray(center, dtype=complex)
    cells = int(math.ceil(resolution * span))
    step = 2.0 * span * math.pi / cells
    t = -span * math.pi + (np.arange(cells) + 0.5) * step
    e = np.exp(-1j * t)
    vals = np.abs(a[0] + a[1] * e[None, :] + a[2] * e[::-1, None])
    return vals >= SQRT3 - EPS if closed else vals > SQRT3 + EPS


def _runs(row):
    """``(start, length)`` of each run of True values."""
    padded = np.concatenate([[False], row, [False]]).astype(np.int8)
    d = np.diff(padded)
    starts = np.flatnonzero(d == 1)
    ends = np.flatnonzero(d == -1)
    return list(zip(starts.tolist(), (ends - starts).tolist()))


def _fmt(x):
    return f"{x:.3f}"


def svg_text(spec: FigureSpec) -> str:
    span = spec.span
    scale = CANVAS / (2.0 * span * math.pi)

    def to_px(t1, t2):
        return (t1 + span * math.pi) * scale, (span * math.pi - t2) * scale

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(CANVAS)}" height="{_fmt(CANVAS)}" '
        f'viewBox="0 0 {_fmt(CANVAS)} {_fmt(CANVAS)}">',
    ]
    if spec.title:
        out.append(f"<title>{_escape(spec.title)}</title>")
    out.append(f'<rect x="0" y="0" width="{_fmt(CANVAS)}" height="{_fmt(CANVAS)}" fill="#ffffff"/>')
    for i, c in enumerate(spec.centers):
        raster = membership_raster(c, spec.sample_resolution, span, spec.closed)
        px = CANVAS / raster.shape[0]
        color = spec.palette[i % len(spec.palette)]
        out.append(f'<g id="body{i}" fill="{color}" fill-opacity="0.45" stroke="none">')
        for r, row in enumerate(raster):
            for start, length in _runs(row):
                out.append(f'<rect x="{_fmt(start * px)}" y="{_fmt(r * px)}" '
                           f'width="{_fmt(length * px)}" height="{_fmt(px)}"/>')
        out.append("</g>")
    x0, y0 = to_px(-math.pi, math.pi)
    side = 2.0 * math.pi * scale
    out.append(f'<rect id="domain" x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(side)}" '
               f'height="{_fmt(side)}" fill="none" stroke="#000000" stroke-width="2"/>')
    if spec.show_grid:
        out.append('<g id="grid" fill="#000000">')
        for j, k in _grid_copies(span):
            x, y = to_px(2.0 * math.pi * j / 3.0, 2.0 * math.pi * k / 3.0)
            out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="3.000"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _grid_copies(span):
    """Grid points and their periodic copies inside the window, as multiples of 2pi/3."""
    lim = span * 3.0 / 2.0 + 1e-9
    reach = int(math.floor(lim))
    pts = [(j, k) for j in range(-reach, reach + 1) for k in range(-reach, reach + 1)
           if abs(j) <= lim and abs(k) <= lim]
    return sorted(pts)


def _escape(s):
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def render_svg(spec: FigureSpec, out) -> Path:
    """Write the figure to ``out``; raises ``OSError`` if the path is not writable."""
    path = Path(out)
    path.write_text(svg_text(spec), encoding="utf-8")
    return path


# --- preset configurations ------------------------------------------------------

def dft_rows_spec(**kw) -> FigureSpec:
    """Bodies centred at the rows of the 3x3 Fourier matrix (grid points on the boundaries)."""
    rows = [np.array([1.0, OMEGA ** j, OMEGA ** (2 * j)]) for j in range(3)]
    return FigureSpec(tuple(rows), **kw)


def strips_spec(**kw) -> FigureSpec:
    """Centres ``(1, w^j, 0)``: three vertical bands."""
    rows = [np.array([1.0, OMEGA ** j, 0.0]) for j in range(3)]
    return FigureSpec(tuple(rows), **kw)


def band_spec(t=0.05, **kw) -> FigureSpec:
    """A single centre ``(t, 1, 1)`` with small ``|t|``: a band-like body."""
    return FigureSpec((np.array([t, 1.0, 1.0]),), **kw)


PRESETS = {"dft": dft_rows_spec, "strips": strips_spec, "band": band_spec}
