"""SVG rendering of regions, Nyquist traces and marker points.

Regions are rasterized: each pixel centre is tested for membership and runs
of filled pixels in a row become one ``<rect>``.  Per row the region is an
interval minus a union of open intervals, which makes the test cheap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nyquist import NyquistTrace
from .region import SrgRegion

LAYER_STYLE = {"hard": "#c8c8c8", "soft": "#5a5a5a"}
LAYERS = ("hard", "soft", "nyquist", "markers")


@dataclass(frozen=True)
class PlotConfig:
    window: tuple[float, float, float, float] = (-3.0, 3.0, -3.0, 3.0)
    resolution: int = 800
    layers: tuple[str, ...] = LAYERS
    marker_points: tuple[complex, ...] = (-1 + 0j,)

    def __post_init__(self):
        a, b, c, d = self.window
        if not (np.all(np.isfinite(self.window)) and a < b and c < d):
            raise ValueError("window must be finite with re_min < re_max and im_min < im_max")
        if not 100 <= self.resolution <= 4000:
            raise ValueError("resolution must lie in [100, 4000]")
        bad = set(self.layers) - set(LAYERS)
        if bad:
            raise ValueError(f"unknown layers {sorted(bad)}")


def row_mask(region: SrgRegion, xs: np.ndarray, y: float) -> np.ndarray:
    """Membership of the points ``xs + j*y`` in ``region``."""
    a, r, R = region.alphas, region.r, region.R
    y2 = y * y
    fin = np.isfinite(R)
    lo, hi = -np.inf, np.inf
    if fin.any():
        if np.any(R[fin] < abs(y)):
            return np.zeros(len(xs), dtype=bool)
        w = np.sqrt(R[fin] ** 2 - y2)
        lo = float(np.max(a[fin] - w))
        hi = float(np.min(a[fin] + w))
    mask = (xs >= lo) & (xs <= hi)
    cut = r > abs(y)
    if cut.any():
        v = np.sqrt(r[cut] ** 2 - y2)
        starts, ends = a[cut] - v, a[cut] + v
        order = np.argsort(starts)
        starts = starts[order]
        reach = np.maximum.accumulate(ends[order])
        k = np.searchsorted(starts, xs, side="left") - 1
        inside_hole = (k >= 0) & (xs < reach[np.maximum(k, 0)])
        mask &= ~inside_hole
    return mask


def raster(region: SrgRegion, config: PlotConfig) -> np.ndarray:
    """Boolean image, row 0 at the top of the window."""
    x0, x1, y0, y1 = config.window
    n = config.resolution
    xs = x0 + (np.arange(n) + 0.5) * (x1 - x0) / n
    ys = y1 - (np.arange(n) + 0.5) * (y1 - y0) / n
    return np.array([row_mask(region, xs, y) for y in ys])


def _fmt(x: float) -> str:
    s = f"{x:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _rects(img: np.ndarray, color: str) -> list[str]:
    out = [f'<g fill="{color}" shape-rendering="crispEdges">']
    for i, row in enumerate(img):
        if not row.any():
            continue
        d = np.diff(np.concatenate([[0], row.astype(np.int8), [0]]))
        for s, e in zip(np.flatnonzero(d == 1), np.flatnonzero(d == -1)):
            out.append(f'<rect x="{s}" y="{i}" width="{e - s}" height="1"/>')
    out.append("</g>")
    return out


def emit_svg(regions: dict[str, SrgRegion] | None = None, traces: list[NyquistTrace] | None = None,
             config: PlotConfig = PlotConfig()) -> str:
    """Render the requested layers; output is byte-identical for identical inputs."""
    regions = regions or {}
    traces = traces or []
    n = config.resolution
    x0, x1, y0, y1 = config.window
    px = lambda z: ((z.real - x0) / (x1 - x0) * n, (y1 - z.imag) / (y1 - y0) * n)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{n}" height="{n}" viewBox="0 0 {n} {n}">',
        f'<rect x="0" y="0" width="{n}" height="{n}" fill="white"/>',
    ]
    for kind in ("hard", "soft"):
        if kind in config.layers and kind in regions:
            lines += _rects(raster(regions[kind], config), LAYER_STYLE[kind])
    # axes
    ox, oy = px(0j)
    if 0 <= oy <= n:
        lines.append(f'<line x1="0" y1="{_fmt(oy)}" x2="{n}" y2="{_fmt(oy)}" stroke="black" stroke-width="1"/>')
    if 0 <= ox <= n:
        lines.append(f'<line x1="{_fmt(ox)}" y1="0" x2="{_fmt(ox)}" y2="{n}" stroke="black" stroke-width="1"/>')
    if "nyquist" in config.layers:
        span = max(x1 - x0, y1 - y0)
        for tr in traces:
            z = tr.samples[np.isfinite(tr.samples)]
            # clip far excursions so the polyline stays numerically tame
            z = np.clip(z.real, x0 - span, x1 + span) + 1j * np.clip(z.imag, y0 - span, y1 + span)
            pts = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in (px(v) for v in z))
            lines.append(f'<polyline points="{pts}" fill="none" stroke="#1f4e9a" stroke-width="1.5"/>')
    if "markers" in config.layers:
        for m in config.marker_points:
            cx, cy = px(complex(m))
            d = 6
            lines.append(f'<path d="M{_fmt(cx - d)},{_fmt(cy - d)} L{_fmt(cx + d)},{_fmt(cy + d)} '
                         f'M{_fmt(cx - d)},{_fmt(cy + d)} L{_fmt(cx + d)},{_fmt(cy - d)}" '
                         'stroke="#b00000" stroke-width="2"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
