"""SVG rendering of polygons (presentation only)."""

from fractions import Fraction

from .rational import format_rational

SCALE = 60
MARGIN = 40


def _num(x):
    # SVG coordinates need decimals; six places is plenty for display
    return f"{float(x):.6f}".rstrip("0").rstrip(".")


def polygon_svg(P, title=None):
    """A polyline on a unit grid with rational tick labels."""
    w = max(P.domain_end, Fraction(1))
    ys = [y for _, y in P.breakpoints]
    top = max(max(ys), Fraction(1))
    bottom = min(min(ys), Fraction(0))
    width = float(w) * SCALE + 2 * MARGIN
    height = float(top - bottom) * SCALE + 2 * MARGIN

    def tx(x):
        return MARGIN + float(x) * SCALE

    def ty(y):
        return MARGIN + float(top - y) * SCALE

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {_num(width)} {_num(height)}" '
        f'width="{_num(width)}" height="{_num(height)}">'
    ]
    if title:
        out.append(f"  <title>{title}</title>")
    out.append('  <g stroke="#ddd" stroke-width="1">')
    for i in range(int(w) + 1):
        out.append(f'    <line x1="{_num(tx(i))}" y1="{_num(ty(top))}" x2="{_num(tx(i))}" y2="{_num(ty(bottom))}"/>')
    for j in range(int(bottom), int(top) + 1):
        out.append(f'    <line x1="{_num(tx(0))}" y1="{_num(ty(j))}" x2="{_num(tx(w))}" y2="{_num(ty(j))}"/>')
    out.append("  </g>")
    out.append(
        f'  <g stroke="black" stroke-width="1.5"><line x1="{_num(tx(0))}" y1="{_num(ty(0))}" '
        f'x2="{_num(tx(w))}" y2="{_num(ty(0))}"/><line x1="{_num(tx(0))}" y1="{_num(ty(bottom))}" '
        f'x2="{_num(tx(0))}" y2="{_num(ty(top))}"/></g>'
    )
    pts = " ".join(f"{_num(tx(x))},{_num(ty(y))}" for x, y in P.breakpoints)
    out.append(f'  <polyline fill="none" stroke="#1f5fbf" stroke-width="2.5" points="{pts}"/>')
    out.append('  <g font-family="monospace" font-size="11">')
    for x, y in P.breakpoints:
        label = f"({format_rational(x)}, {format_rational(y)})"
        out.append(f'    <circle cx="{_num(tx(x))}" cy="{_num(ty(y))}" r="3" fill="#1f5fbf"/>')
        out.append(f'    <text x="{_num(tx(x) + 4)}" y="{_num(ty(y) - 6)}">{label}</text>')
    for i in range(int(w) + 1):
        out.append(f'    <text x="{_num(tx(i) - 3)}" y="{_num(ty(bottom) + 16)}">{i}</text>')
    out.append("  </g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
