"""Space-time diagram emission as standalone deterministic SVG text.

Space runs horizontally, time vertically (upward).  Excited regions are
shaded polygons bounded by interface curves; interfaces are stroked
polylines.  Pure text generation, no plotting dependency, byte-stable for a
given solution.
"""
from __future__ import annotations

import numpy as np

__all__ = ["spacetime_svg", "weak_solution_curves", "WIDTH", "HEIGHT"]

WIDTH, HEIGHT = 640, 480
PAD = 46
FILL = "#f4c28c"
STROKE = "#8a2d0b"
ALT_STROKE = "#0b4f8a"


def _fmt(x: float) -> str:
    return f"{x:.2f}"


class _Mapper:
    def __init__(self, xmin, xmax, tmin, tmax):
        self.xmin, self.xmax = xmin, xmax
        self.tmin, self.tmax = tmin, tmax

    def px(self, x):
        return PAD + (x - self.xmin) / (self.xmax - self.xmin) * (WIDTH - 2 * PAD)

    def py(self, t):
        return HEIGHT - PAD - (t - self.tmin) / (self.tmax - self.tmin) * (HEIGHT - 2 * PAD)


def weak_solution_curves(w, samples_per_segment: int = 160):
    """(curves, polygons): interface polylines and per-component shaded loops.

    curves: list of (label, ts, xs); polygons: list of arrays of (x, t) pairs.
    """
    curves: dict[int, list[tuple[float, float]]] = {}
    polygons = []
    for seg in w.segments:
        if seg.n_interfaces == 0:
            continue
        ts = np.linspace(seg.t_start, seg.t_end, samples_per_segment)
        pos = np.vstack([np.atleast_1d(seg.positions(float(t))) for t in ts])
        for j, traj in enumerate(seg.trajectories):
            curves.setdefault(traj.label, []).extend(zip(pos[:, j], ts))
        for comp in range(seg.n_interfaces // 2):
            left = pos[:, 2 * comp]
            right = pos[:, 2 * comp + 1]
            loop = list(zip(left, ts)) + list(zip(right[::-1], ts[::-1]))
            polygons.append(np.asarray(loop))
    curve_list = [(label, np.asarray(pts)) for label, pts in sorted(curves.items())]
    return curve_list, polygons


def spacetime_svg(
    curves,
    polygons,
    *,
    x_range: tuple[float, float],
    t_range: tuple[float, float],
    title: str = "",
) -> str:
    """Assemble the SVG document from curve and polygon data in (x, t) space."""
    m = _Mapper(x_range[0], x_range[1], t_range[0], t_range[1])
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    for poly in polygons:
        pts = " ".join(f"{_fmt(m.px(x))},{_fmt(m.py(t))}" for x, t in poly)
        parts.append(f'<polygon points="{pts}" fill="{FILL}" fill-opacity="0.55" stroke="none"/>')
    palette = [STROKE, ALT_STROKE]
    for i, (label, pts) in enumerate(curves):
        d = " ".join(f"{_fmt(m.px(x))},{_fmt(m.py(t))}" for x, t in pts)
        color = palette[i % len(palette)] if len(curves) <= 2 else STROKE
        parts.append(
            f'<polyline points="{d}" fill="none" stroke="{color}" stroke-width="1.6"/>'
        )
    parts.append(
        f'<rect x="{PAD}" y="{PAD}" width="{WIDTH - 2 * PAD}" height="{HEIGHT - 2 * PAD}" '
        'fill="none" stroke="#333" stroke-width="1"/>'
    )
    labels = [
        (PAD, HEIGHT - PAD + 16, f"x = {x_range[0]:g}", "start"),
        (WIDTH - PAD, HEIGHT - PAD + 16, f"x = {x_range[1]:g}", "end"),
        (PAD - 6, HEIGHT - PAD, f"t = {t_range[0]:g}", "end"),
        (PAD - 6, PAD + 4, f"t = {t_range[1]:g}", "end"),
    ]
    for x, y, text, anchor in labels:
        parts.append(
            f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-size="12" font-family="monospace" '
            f'text-anchor="{anchor}" fill="#333">{text}</text>'
        )
    if title:
        parts.append(
            f'<text x="{WIDTH // 2}" y="{PAD - 14}" font-size="13" font-family="monospace" '
            f'text-anchor="middle" fill="#111">{title}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
