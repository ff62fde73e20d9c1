"""Minimal SVG line charts by string templating.

Deterministic output: floats are formatted with repr-stable rounding and
no timestamps, so identical inputs give byte-identical files.
"""

WIDTH, HEIGHT = 640, 420
MARGIN = 56
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _fmt(v):
    return f"{v:.3f}".rstrip("0").rstrip(".")


def line_chart(series, title, xlabel, ylabel) -> str:
    """series: iterable of (name, xs, ys).  Returns SVG text."""
    series = [(name, list(map(float, xs)), list(map(float, ys)))
              for name, xs, ys in series]
    xs_all = [x for _, xs, _ in series for x in xs]
    ys_all = [y for _, _, ys in series for y in ys]
    if not xs_all:
        xs_all = [0.0, 1.0]
        ys_all = [0.0, 1.0]
    x0, x1 = min(xs_all), max(xs_all)
    y0, y1 = min(ys_all), max(ys_all)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def px(x):
        return MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2 * MARGIN)

    def py(y):
        return HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2 * MARGIN)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH // 2}" y="24" text-anchor="middle" font-size="16" '
        f'font-family="sans-serif">{title}</text>',
    ]
    # axes
    parts.append(f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" '
                 f'y2="{HEIGHT - MARGIN}" stroke="black"/>')
    parts.append(f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" '
                 f'y2="{HEIGHT - MARGIN}" stroke="black"/>')
    for frac in (0.0, 0.5, 1.0):
        xv = x0 + frac * (x1 - x0)
        yv = y0 + frac * (y1 - y0)
        parts.append(f'<text x="{_fmt(px(xv))}" y="{HEIGHT - MARGIN + 18}" '
                     f'text-anchor="middle" font-size="11" font-family="sans-serif">'
                     f'{_fmt(xv)}</text>')
        parts.append(f'<text x="{MARGIN - 6}" y="{_fmt(py(yv) + 4)}" '
                     f'text-anchor="end" font-size="11" font-family="sans-serif">'
                     f'{_fmt(yv)}</text>')
    parts.append(f'<text x="{WIDTH // 2}" y="{HEIGHT - 12}" text-anchor="middle" '
                 f'font-size="12" font-family="sans-serif">{xlabel}</text>')
    parts.append(f'<text x="16" y="{HEIGHT // 2}" text-anchor="middle" font-size="12" '
                 f'font-family="sans-serif" transform="rotate(-90 16 {HEIGHT // 2})">'
                 f'{ylabel}</text>')
    for i, (name, xs, ys) in enumerate(series):
        color = COLORS[i % len(COLORS)]
        pts = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(xs, ys))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                     f'stroke-width="1.5"/>')
        parts.append(f'<text x="{WIDTH - MARGIN - 4}" y="{MARGIN + 16 + 16 * i}" '
                     f'text-anchor="end" font-size="12" font-family="sans-serif" '
                     f'fill="{color}">{name}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
