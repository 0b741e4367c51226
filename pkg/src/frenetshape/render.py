"""Minimal SVG renderings: a strip of curves and a heatmap.

Curves in R^3 (or higher) are projected orthographically onto their
best-fit plane, computed jointly for all curves of a strip so that the
panels share one view.
"""

from xml.sax.saxutils import escape

import numpy as np

__all__ = ["project_plane", "curve_strip_svg", "heatmap_svg"]


def project_plane(point_sets):
    """Project point sets onto the plane of their two leading principal axes."""
    allpts = np.concatenate([np.asarray(p, dtype=float) for p in point_sets])
    if allpts.shape[1] == 2 or allpts.shape[0] < 2:
        return [np.asarray(p, dtype=float)[:, :2] for p in point_sets]
    center = allpts.mean(axis=0)
    _, _, Vt = np.linalg.svd(allpts - center, full_matrices=False)
    return [(np.asarray(p, dtype=float) - center) @ Vt[:2].T for p in point_sets]


def _polyline(pts, x0, y0, size, scale, center):
    xy = (pts - center) * scale
    xs = x0 + size / 2 + xy[:, 0]
    ys = y0 + size / 2 - xy[:, 1]
    coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
    return f'<polyline points="{coords}" fill="none" stroke="#1f4e79" stroke-width="1.5"/>'


def curve_strip_svg(point_sets, titles=None, size=160, pad=10):
    """One panel per curve, side by side, each centred with a shared scale."""
    proj = project_plane(point_sets)
    # empty point arrays (failed snapshots) give empty panels
    titles = titles or [""] * len(point_sets)
    extent = max((float(np.ptp(p, axis=0).max()) for p in proj if p.size), default=0.0) or 1.0
    scale = (size - 2 * pad) / extent
    width = size * len(proj)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{size + 20}" '
        f'viewBox="0 0 {width} {size + 20}">',
        f'<rect width="{width}" height="{size + 20}" fill="white"/>',
    ]
    for k, (pts, title) in enumerate(zip(proj, titles)):
        x0 = k * size
        if pts.size:
            center = 0.5 * (pts.min(axis=0) + pts.max(axis=0))
            parts.append(_polyline(pts, x0, 0, size, scale, center))
        parts.append(
            f'<text x="{x0 + size / 2:.1f}" y="{size + 14}" font-size="11" '
            f'text-anchor="middle" font-family="sans-serif">{escape(str(title))}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _color(v):
    # white to dark blue
    v = float(np.clip(v, 0.0, 1.0))
    r = int(round(255 * (1 - 0.88 * v)))
    g = int(round(255 * (1 - 0.7 * v)))
    b = int(round(255 * (1 - 0.45 * v)))
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap_svg(values, labels, cell=18, title=""):
    """Heatmap of a square matrix in input order; NaN cells are hatched grey."""
    values = np.asarray(values, dtype=float)
    k = values.shape[0]
    finite = values[np.isfinite(values)]
    top = float(finite.max()) if finite.size and finite.max() > 0 else 1.0
    margin = 60
    side = margin + k * cell + 10
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{side}" height="{side + 20}" '
        f'viewBox="0 0 {side} {side + 20}">',
        f'<rect width="{side}" height="{side + 20}" fill="white"/>',
        f'<text x="{margin}" y="14" font-size="12" font-family="sans-serif">{escape(title)}</text>',
    ]
    for i in range(k):
        for j in range(k):
            v = values[i, j]
            fill = "#bbbbbb" if not np.isfinite(v) else _color(v / top)
            parts.append(
                f'<rect x="{margin + j * cell}" y="{margin - 30 + i * cell}" width="{cell}" '
                f'height="{cell}" fill="{fill}"><title>{escape(labels[i])} / {escape(labels[j])}: '
                f"{v:.6g}</title></rect>"
            )
        parts.append(
            f'<text x="{margin - 4}" y="{margin - 30 + i * cell + cell * 0.7:.1f}" font-size="9" '
            f'text-anchor="end" font-family="sans-serif">{escape(labels[i][:10])}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
