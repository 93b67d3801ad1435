"""Newton and Hodge polygons and the bounds they impose on HN polygons."""

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from . import polygon as poly
from .errors import InvalidInputError

__all__ = ["SlopeData", "newton_polygon", "newt_flip", "hodge_flip", "check_bounds", "BoundsReport"]


@dataclass(frozen=True)
class SlopeData:
    """Isocrystal slope data: simple components ``(d, h)`` of slope ``d/h``."""

    components: tuple

    def __post_init__(self):
        comps = tuple((int(d), int(h)) for d, h in self.components)
        if not comps:
            raise InvalidInputError("slope data needs at least one component")
        for i, (d, h) in enumerate(comps):
            if h < 1 or not 0 <= d <= h:
                raise InvalidInputError(f"component ({d}, {h}) needs h >= 1 and 0 <= d <= h", f"/components/{i}")
            if gcd(d, h) != 1:
                raise InvalidInputError(f"component ({d}, {h}) is not simple", f"/components/{i}")
        object.__setattr__(self, "components", comps)

    @property
    def ht(self):
        return sum(h for _, h in self.components)

    @property
    def dim(self):
        return sum(d for d, _ in self.components)

    def is_isoclinic(self):
        return len({Fraction(d, h) for d, h in self.components}) == 1

    def to_json(self):
        return {"components": [list(c) for c in self.components]}

    @classmethod
    def from_json(cls, data):
        if not isinstance(data, dict) or not isinstance(data.get("components"), list):
            raise InvalidInputError("slope data must be an object with a 'components' list", "")
        comps = []
        for i, c in enumerate(data["components"]):
            if not (isinstance(c, list) and len(c) == 2 and all(isinstance(x, int) for x in c)):
                raise InvalidInputError("component must be a pair of integers", f"/components/{i}")
            comps.append(tuple(c))
        return cls(tuple(comps))


def newton_polygon(D):
    """Breakpoints of the convex Newton polygon (slopes increasing)."""
    pts = [(Fraction(0), Fraction(0))]
    x = y = Fraction(0)
    for d, h in sorted(D.components, key=lambda c: Fraction(c[0], c[1])):
        x += h
        y += d
        pts.append((x, y))
    # drop collinear points
    out = [pts[0]]
    for pt in pts[1:]:
        if len(out) >= 2:
            (x0, y0), (x1, y1) = out[-2], out[-1]
            if (y1 - y0) * (pt[0] - x1) == (pt[1] - y1) * (x1 - x0):
                out.pop()
        out.append(pt)
    return tuple(out)


def _eval_convex(pts, x):
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        if x <= x1:
            return y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    return pts[-1][1]


def newt_flip(D):
    """Concave version ``x -> dim - Newt(ht - x)``."""
    pts = newton_polygon(D)
    ht, dim = D.ht, D.dim
    xs = sorted(ht - x for x, _ in pts)
    return poly.ConcavePolygon(tuple((x, dim - _eval_convex(pts, ht - x)) for x in xs))


def hodge_flip(dim, ht):
    """Slope 1 on ``[0, dim]`` then slope 0 up to ``ht``."""
    dim, ht = Fraction(dim), Fraction(ht)
    if not 0 <= dim <= ht:
        raise InvalidInputError(f"need 0 <= dim <= ht, got dim={dim}, ht={ht}")
    pairs = [(1, dim), (0, ht - dim)]
    return poly.construct(poly.SlopeMultiset.from_pairs(pairs))


@dataclass(frozen=True)
class BoundsReport:
    hodge_ok: bool
    newton_ok: bool | None
    isoclinic_line: bool | None
    hodge_relation: str
    newton_relation: str | None

    @property
    def ok(self):
        return self.hodge_ok and self.newton_ok is not False and self.isoclinic_line is not False


def check_bounds(hn, D=None, dims=None):
    """Check ``hn <= Hodge`` and, with slope data, ``hn <= Newt``."""
    if dims is None:
        dims = (hn.end_value, hn.domain_end)
    dim, ht = Fraction(dims[0]), Fraction(dims[1])
    if hn.domain_end != ht or hn.end_value != dim:
        raise InvalidInputError(f"polygon ends at ({hn.domain_end}, {hn.end_value}), expected ({ht}, {dim})")
    hodge_rel = poly.dominates(hn, hodge_flip(dim, ht))
    newton_ok = iso = newton_rel = None
    if D is not None:
        if D.ht != ht or D.dim != dim:
            raise InvalidInputError(f"slope data has (dim, ht) = ({D.dim}, {D.ht}), expected ({dim}, {ht})")
        newton_rel = poly.dominates(hn, newt_flip(D))
        newton_ok = newton_rel in ("leq", "equal")
        if D.is_isoclinic():
            iso = hn == poly.line(dim / ht, ht)
    return BoundsReport(hodge_rel in ("leq", "equal"), newton_ok, iso, hodge_rel, newton_rel)
