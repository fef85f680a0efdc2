"""Tiny dependency-free SVG writer for survival overlays and calibration
plots. Fixed 640x480 canvas, step curves for survival functions, dashed
unit-slope diagonal for calibration."""

_W, _H = 640, 480
_ML, _MR, _MT, _MB = 70, 20, 20, 50
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _scales(xmax, ymax=1.0):
    def sx(x):
        return _ML + (x / xmax) * (_W - _ML - _MR)

    def sy(y):
        return _H - _MB - (y / ymax) * (_H - _MT - _MB)

    return sx, sy


def _axes(parts, sx, sy, xmax, xlabel, ylabel, ymax=1.0):
    parts.append(
        f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" height="{_H - _MT - _MB}" '
        'fill="none" stroke="black"/>'
    )
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        x, y = frac * xmax, frac * ymax
        parts.append(
            f'<text x="{sx(x):.1f}" y="{_H - _MB + 18}" font-size="11" '
            f'text-anchor="middle">{x:.3g}</text>'
        )
        parts.append(
            f'<text x="{_ML - 8}" y="{sy(y):.1f}" font-size="11" '
            f'text-anchor="end" dominant-baseline="middle">{y:.3g}</text>'
        )
        parts.append(
            f'<line x1="{sx(x):.1f}" y1="{_H - _MB}" x2="{sx(x):.1f}" '
            f'y2="{_H - _MB + 4}" stroke="black"/>'
        )
        parts.append(
            f'<line x1="{_ML - 4}" y1="{sy(y):.1f}" x2="{_ML}" y2="{sy(y):.1f}" stroke="black"/>'
        )
    parts.append(
        f'<text x="{(_ML + _W - _MR) / 2}" y="{_H - 12}" font-size="13" '
        f'text-anchor="middle">{xlabel}</text>'
    )
    parts.append(
        f'<text x="16" y="{(_MT + _H - _MB) / 2}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 16 {(_MT + _H - _MB) / 2})">{ylabel}</text>'
    )


def _step_path(sx, sy, grid, values):
    # survival step function: starts at 1 before the first grid time
    pts = [f"M {sx(0):.2f} {sy(1.0):.2f}"]
    prev = 1.0
    for t, s in zip(grid, values):
        pts.append(f"L {sx(t):.2f} {sy(prev):.2f}")
        pts.append(f"L {sx(t):.2f} {sy(s):.2f}")
        prev = s
    return " ".join(pts)


def survival_svg(path, curves):
    """Write a survival overlay; ``curves`` is a list of (label, curve)
    pairs, bands drawn when the curve has them."""
    xmax = max(float(curve.grid.max()) for _, curve in curves) or 1.0
    sx, sy = _scales(xmax)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
    ]
    _axes(parts, sx, sy, xmax, "time", "survival probability")
    for i, (label, curve) in enumerate(curves):
        color = _COLORS[i % len(_COLORS)]
        if curve.lower is not None and curve.upper is not None:
            for band in (curve.lower, curve.upper):
                parts.append(
                    f'<path d="{_step_path(sx, sy, curve.grid, band)}" fill="none" '
                    f'stroke="{color}" stroke-width="1" stroke-dasharray="3,3" opacity="0.6"/>'
                )
        parts.append(
            f'<path d="{_step_path(sx, sy, curve.grid, curve.s)}" fill="none" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{_W - _MR - 8}" y="{_MT + 18 + 16 * i}" font-size="12" '
            f'text-anchor="end" fill="{color}">{label}</text>'
        )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")


def calibration_svg(path, points, slope):
    """Write predicted-vs-empirical risk points with the unit-slope
    reference diagonal."""
    sx, sy = _scales(1.0)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
    ]
    _axes(parts, sx, sy, 1.0, "empirical cumulative risk", "predicted cumulative risk")
    parts.append(
        f'<line x1="{sx(0):.1f}" y1="{sy(0):.1f}" x2="{sx(1):.1f}" y2="{sy(1):.1f}" '
        'stroke="gray" stroke-dasharray="5,5"/>'
    )
    poly = " ".join(f"{sx(x):.2f},{sy(min(max(y, 0.0), 1.0)):.2f}" for x, y in points)
    parts.append(f'<polyline points="{poly}" fill="none" stroke="{_COLORS[0]}" stroke-width="2"/>')
    parts.append(
        f'<text x="{_ML + 10}" y="{_MT + 18}" font-size="12">slope = {slope:.4f}</text>'
    )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
