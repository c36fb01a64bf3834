"""Static SVG rendering of one page of a chart.

Stems run left to right, filtration bottom to top.  Each bidegree shows one dot per
basis class of E_r (classes sorted by name), and every recorded differential that is
still visible on E_r is drawn as a line from source to target, dashed when the fact
leaves the value open.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

from .chart import INF, Bidegree, Chart, Page, Variant, format_page
from .gf2 import quotient_basis

CELL = 28
MARGIN = 36
DOT = 3


def _xy(stem: int, s: int, stems: tuple[int, int], s_max: int, slot: int = 0, count: int = 1) -> tuple[float, float]:
    x = MARGIN + (stem - stems[0]) * CELL + CELL / 2
    y = MARGIN + (s_max - s) * CELL + CELL / 2
    if count > 1:
        x += (slot - (count - 1) / 2) * min(7.0, (CELL - 6) / count)
    return x, y


def render_page(chart: Chart, stems: tuple[int, int], s_range: tuple[int, int], page: Page = 2) -> str:
    """SVG text of ``E_page`` of ``chart`` over the given stem and filtration range."""
    lo, hi = stems
    s_lo, s_hi = s_range
    width = 2 * MARGIN + max(0, hi - lo + 1) * CELL
    height = 2 * MARGIN + max(0, s_hi - s_lo + 1) * CELL
    head = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f"<title>{escape(chart.name)} E_{format_page(page)}</title>",
        '<g stroke="#ccc" stroke-width="0.5">',
    ]
    body: list[str] = []
    for stem in range(lo, hi + 1):
        x = MARGIN + (stem - lo) * CELL
        head.append(f'<line x1="{x}" y1="{MARGIN}" x2="{x}" y2="{height - MARGIN}"/>')
        body.append(f'<text x="{x + CELL / 2:.1f}" y="{height - MARGIN / 3:.1f}" font-size="9" '
                    f'text-anchor="middle">{stem}</text>')
    for s in range(s_lo, s_hi + 2):
        y = MARGIN + (s_hi + 1 - s) * CELL
        head.append(f'<line x1="{MARGIN}" y1="{y}" x2="{width - MARGIN}" y2="{y}"/>')
    head.append("</g>")
    for s in range(s_lo, s_hi + 1):
        y = MARGIN + (s_hi - s) * CELL + CELL / 2
        body.append(f'<text x="{MARGIN / 2:.1f}" y="{y + 3:.1f}" font-size="9" text-anchor="middle">{s}</text>')

    def visible(b: Bidegree) -> bool:
        return lo <= b.stem <= hi and s_lo <= b.s <= s_hi

    dots: list[str] = []
    for b in chart.spec.bidegrees():
        if not visible(b):
            continue
        group = chart.page_group(b.s, b.t, page)
        classes = sorted(chart.render(b, v) for v in quotient_basis(group.Z, group.B))
        for i, name in enumerate(classes):
            x, y = _xy(b.stem, b.s, stems, s_hi, i, len(classes))
            dots.append(f'<circle cx="{x:.1f}" cy="{y:.1f}" r="{DOT}"><title>{escape(name)}</title></circle>')

    arrows: list[str] = []
    for f in sorted(chart.facts, key=lambda f: (f.bidegree.s, f.bidegree.t, str(f.r), f.label)):
        if f.r == INF or f.variant in (Variant.PERMANENT, Variant.SURVIVES):
            continue
        if page != INF and f.r < page:
            continue
        tb = f.target_bidegree
        assert tb is not None
        if not (visible(f.bidegree) and visible(tb)):
            continue
        x1, y1 = _xy(f.bidegree.stem, f.bidegree.s, stems, s_hi)
        x2, y2 = _xy(tb.stem, tb.s, stems, s_hi)
        dash = ' stroke-dasharray="3,2"' if f.variant is Variant.UNKNOWN else ""
        arrows.append(f'<line x1="{x1:.1f}" y1="{y1:.1f}" x2="{x2:.1f}" y2="{y2:.1f}" stroke="#236"'
                      f' stroke-width="0.8"{dash}><title>d_{format_page(f.r)} {escape(f.variant.value)}</title></line>')

    parts = head + body + ['<g fill="#000">'] + dots + ["</g>", "<g>"] + sorted(set(arrows)) + ["</g>", "</svg>"]
    return "\n".join(parts) + "\n"
