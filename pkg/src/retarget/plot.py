"""Self-contained SVG scatter of blocktimes with the expected-blocktime line.

Blocktimes are drawn as blue ``x`` markers against block index; the red
step line is ``1/rate`` for each period. The y axis is log10.
"""

from __future__ import annotations

import math
from pathlib import Path
from xml.sax.saxutils import escape

from retarget.traceio import TraceRow

WIDTH, HEIGHT = 900, 450
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 70, 20, 30, 50
MARKER_HALF = 2.5


def render_svg(rows: list[TraceRow], title: str = "") -> str:
    expected = [1.0 / r.rate for r in rows]
    values = [r.blocktime for r in rows] + expected
    log_lo = math.floor(math.log10(min(values)))
    log_hi = math.ceil(math.log10(max(values)))
    if log_hi == log_lo:
        log_hi += 1
    first, last = rows[0].block_index, rows[-1].block_index
    x_lo, x_hi = first - 0.5, last + 0.5
    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def sx(index: float) -> float:
        return MARGIN_LEFT + (index - x_lo) / (x_hi - x_lo) * plot_w

    def sy(value: float) -> float:
        return MARGIN_TOP + (log_hi - math.log10(value)) / (log_hi - log_lo) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f"<title>{escape(title)}</title>",
        '<rect x="0" y="0" width="100%" height="100%" fill="white"/>',
        f'<g id="plot-area" data-x-min="{x_lo}" data-x-max="{x_hi}" '
        f'data-y-min-log10="{log_lo}" data-y-max-log10="{log_hi}" '
        f'data-left="{MARGIN_LEFT}" data-top="{MARGIN_TOP}" data-width="{plot_w}" data-height="{plot_h}">',
        f'<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>',
    ]

    out.append('<g id="y-axis" data-scale="log10">')
    for k in range(log_lo, log_hi + 1):
        y = sy(10.0**k)
        out.append(f'<line x1="{MARGIN_LEFT - 5}" y1="{y:.2f}" x2="{MARGIN_LEFT}" y2="{y:.2f}" stroke="black"/>')
        out.append(
            f'<line x1="{MARGIN_LEFT}" y1="{y:.2f}" x2="{MARGIN_LEFT + plot_w}" y2="{y:.2f}" stroke="#ddd"/>'
        )
        out.append(f'<text class="tick" x="{MARGIN_LEFT - 8}" y="{y + 4:.2f}" text-anchor="end">1e{k}</text>')
    out.append(
        f'<text x="16" y="{MARGIN_TOP + plot_h / 2:.2f}" transform="rotate(-90 16 {MARGIN_TOP + plot_h / 2:.2f})" '
        'text-anchor="middle">blocktime</text>'
    )
    out.append("</g>")

    out.append('<g id="x-axis" data-scale="linear">')
    step = _nice_step(last - first + 1)
    tick = math.ceil(first / step) * step
    base = MARGIN_TOP + plot_h
    while tick <= last:
        x = sx(tick)
        out.append(f'<line x1="{x:.2f}" y1="{base}" x2="{x:.2f}" y2="{base + 5}" stroke="black"/>')
        out.append(f'<text class="tick" x="{x:.2f}" y="{base + 18}" text-anchor="middle">{tick}</text>')
        tick += step
    out.append(f'<text x="{MARGIN_LEFT + plot_w / 2:.2f}" y="{HEIGHT - 10}" text-anchor="middle">block index</text>')
    out.append("</g>")

    out.append('<g id="blocktimes" stroke="blue" stroke-width="1" fill="none">')
    h = MARKER_HALF
    for r in rows:
        x, y = sx(r.block_index), sy(r.blocktime)
        out.append(
            f'<path class="marker" data-block="{r.block_index}" '
            f'd="M{x - h:.2f},{y - h:.2f}L{x + h:.2f},{y + h:.2f}M{x - h:.2f},{y + h:.2f}L{x + h:.2f},{y - h:.2f}"/>'
        )
    out.append("</g>")

    # one horizontal segment per period, joined into a step line
    points = []
    start = 0
    for i in range(1, len(rows) + 1):
        if i == len(rows) or rows[i].period != rows[start].period:
            y = sy(expected[start])
            points.append(f"{sx(rows[start].block_index - 0.5):.2f},{y:.4f}")
            points.append(f"{sx(rows[i - 1].block_index + 0.5):.2f},{y:.4f}")
            start = i
    out.append(
        f'<polyline id="expected-blocktime" fill="none" stroke="red" stroke-width="1.5" points="{" ".join(points)}"/>'
    )
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _nice_step(span: int) -> int:
    raw = max(span / 8, 1)
    magnitude = 10 ** math.floor(math.log10(raw))
    for m in (1, 2, 5, 10):
        if m * magnitude >= raw:
            return int(m * magnitude)
    return int(10 * magnitude)


def write_svg(rows: list[TraceRow], path: str | Path, title: str = "") -> None:
    Path(path).write_text(render_svg(rows, title), encoding="utf-8")
