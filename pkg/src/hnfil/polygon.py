"""Concave piecewise-linear polygons with exact rational breakpoints."""

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import lcm

from .errors import DomainError, InvalidInputError
from .rational import format_rational, parse_rational

__all__ = [
    "ConcavePolygon",
    "SlopeMultiset",
    "HalfLinePolygon",
    "construct",
    "restrict",
    "zero_polygon",
    "line",
    "tropical_convolve",
    "convolve_bruteforce",
    "legendre_transform",
    "dual_polygon",
    "concave_envelope",
    "dominates",
    "renormalize_check",
    "RenormalizationReport",
]

ZERO = Fraction(0)


def _canonical(points):
    """Drop collinear interior points; points must be x-sorted and concave."""
    out = []
    for pt in points:
        while len(out) >= 2:
            (x0, y0), (x1, y1) = out[-2], out[-1]
            # keep x1 only if slope strictly drops there
            if (y1 - y0) * (pt[0] - x1) > (pt[1] - y1) * (x1 - x0):
                break
            out.pop()
        out.append(pt)
    return tuple(out)


@dataclass(frozen=True)
class SlopeMultiset:
    """``(slope, multiplicity)`` pairs with strictly decreasing slopes."""

    entries: tuple

    def __post_init__(self):
        ents = tuple((Fraction(s), Fraction(m)) for s, m in self.entries)
        for i, (s, m) in enumerate(ents):
            if m <= 0:
                raise InvalidInputError(f"multiplicity must be positive, got {m}", f"/{i}")
            if i and not s < ents[i - 1][0]:
                raise InvalidInputError("slopes must be strictly decreasing", f"/{i}")
        object.__setattr__(self, "entries", ents)

    @classmethod
    def from_pairs(cls, pairs):
        """Merge an unsorted multiset into canonical form."""
        acc = {}
        for s, m in pairs:
            s, m = Fraction(s), Fraction(m)
            if m < 0:
                raise InvalidInputError(f"negative multiplicity {m}")
            if m:
                acc[s] = acc.get(s, ZERO) + m
        return cls(tuple(sorted(acc.items(), reverse=True)))

    @property
    def total(self):
        return sum((m for _, m in self.entries), ZERO)


@dataclass(frozen=True)
class ConcavePolygon:
    """Concave polygon starting at the origin, stored by its genuine breakpoints."""

    breakpoints: tuple

    def __post_init__(self):
        pts = tuple((Fraction(x), Fraction(y)) for x, y in self.breakpoints)
        if not pts or pts[0] != (0, 0):
            raise InvalidInputError("first breakpoint must be (0, 0)")
        for i in range(1, len(pts)):
            if pts[i][0] <= pts[i - 1][0]:
                raise InvalidInputError("breakpoint abscissae must increase strictly", f"/breakpoints/{i}")
        slopes = [(pts[i + 1][1] - pts[i][1]) / (pts[i + 1][0] - pts[i][0]) for i in range(len(pts) - 1)]
        for i in range(1, len(slopes)):
            if slopes[i] > slopes[i - 1]:
                raise InvalidInputError("polygon is not concave", f"/breakpoints/{i + 1}")
        object.__setattr__(self, "breakpoints", _canonical(pts))

    @property
    def domain_end(self):
        return self.breakpoints[-1][0]

    @property
    def end_value(self):
        return self.breakpoints[-1][1]

    def slopes(self):
        pts = self.breakpoints
        return SlopeMultiset(
            tuple(
                ((y1 - y0) / (x1 - x0), x1 - x0)
                for (x0, y0), (x1, y1) in zip(pts, pts[1:])
            )
        )

    def __call__(self, x):
        return eval_polygon(self, x)

    def first_slope(self):
        ents = self.slopes().entries
        return ents[0][0] if ents else None

    def has_integer_breakpoints(self):
        return all(x.denominator == 1 and y.denominator == 1 for x, y in self.breakpoints)

    def to_json(self):
        return {"breakpoints": [[format_rational(x), format_rational(y)] for x, y in self.breakpoints]}

    @classmethod
    def from_json(cls, data, pointer=""):
        if not isinstance(data, dict) or not isinstance(data.get("breakpoints"), list):
            raise InvalidInputError("polygon must be an object with a 'breakpoints' list", pointer)
        pts = []
        for i, pt in enumerate(data["breakpoints"]):
            p = f"{pointer}/breakpoints/{i}"
            if not isinstance(pt, list) or len(pt) != 2:
                raise InvalidInputError("breakpoint must be a pair", p)
            pts.append((parse_rational(pt[0], p + "/0"), parse_rational(pt[1], p + "/1")))
        return cls(tuple(pts))

    def to_csv(self):
        return "".join(f"{format_rational(x)},{format_rational(y)}\n" for x, y in self.breakpoints)

    @classmethod
    def from_csv(cls, text):
        pts = []
        for i, line_ in enumerate(text.splitlines()):
            if not line_.strip():
                continue
            parts = line_.split(",")
            if len(parts) != 2:
                raise InvalidInputError("expected 'x,y'", f"line {i + 1}")
            pts.append((parse_rational(parts[0].strip()), parse_rational(parts[1].strip())))
        return cls(tuple(pts))

    def __repr__(self):
        body = ", ".join(f"({format_rational(x)},{format_rational(y)})" for x, y in self.breakpoints)
        return f"ConcavePolygon[{body}]"


def construct(slopes):
    """Polygon obtained by concatenating segments in decreasing slope order."""
    if not isinstance(slopes, SlopeMultiset):
        slopes = SlopeMultiset(tuple(slopes))
    x = y = ZERO
    pts = [(x, y)]
    for s, m in slopes.entries:
        x += m
        y += s * m
        pts.append((x, y))
    return ConcavePolygon(tuple(pts))


def zero_polygon(h=0):
    return ConcavePolygon(((0, 0),) if h == 0 else ((0, 0), (h, 0)))


def line(slope, h):
    """The single segment of the given slope on ``[0, h]``."""
    return zero_polygon() if h == 0 else construct([(slope, h)])


def restrict(P, h):
    """``P`` on ``[0, h]``."""
    h = Fraction(h)
    if h < 0 or h > P.domain_end:
        raise DomainError(f"cannot restrict to [0, {h}]")
    if h == 0:
        return zero_polygon()
    pts = [pt for pt in P.breakpoints if pt[0] < h]
    pts.append((h, P(h)))
    return ConcavePolygon(tuple(pts))


def eval_polygon(P, x):
    x = Fraction(x)
    pts = P.breakpoints
    if x < 0 or x > pts[-1][0]:
        raise DomainError(f"x = {x} outside [0, {pts[-1][0]}]")
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        if x <= x1:
            return y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    return pts[-1][1]


def tropical_convolve(f, g):
    """Sup-convolution of two concave polygons, via merging slope multisets."""
    return construct(SlopeMultiset.from_pairs(f.slopes().entries + g.slopes().entries))


def _grid(P, denom):
    h = P.domain_end
    steps = int(h * denom)
    return [Fraction(i, denom) for i in range(steps + 1)]


def convolve_bruteforce(f, g):
    """Direct ``sup_{a+b=x} f(a) + g(b)`` over a common rational grid.

    Test oracle: the grid contains every breakpoint of both inputs, so the
    sup at each grid point is attained on it.
    """
    denom = 1
    for P in (f, g):
        for x, _ in P.breakpoints:
            denom = lcm(denom, x.denominator)
    fv = [f(a) for a in _grid(f, denom)]
    gv = [g(b) for b in _grid(g, denom)]
    # exact integer arithmetic after clearing value denominators
    scale = lcm(*(v.denominator for v in fv + gv))
    fi = [int(v * scale) for v in fv]
    gi = [int(v * scale) for v in gv]
    best = [None] * (len(fi) + len(gi) - 1)
    for i, a in enumerate(fi):
        for j, b in enumerate(gi):
            v = a + b
            cur = best[i + j]
            if cur is None or v > cur:
                best[i + j] = v
    return concave_envelope((Fraction(s, denom), Fraction(v, scale)) for s, v in enumerate(best))


def legendre_transform(f, lam):
    """``sup_x f(x) - lam x``; attained at a breakpoint."""
    lam = Fraction(lam)
    return max(y - lam * x for x, y in f.breakpoints)


def dual_polygon(P, ht, dim):
    """``x -> P(ht - x) - dim + x``."""
    ht, dim = Fraction(ht), Fraction(dim)
    if P.domain_end != ht or P.end_value != dim:
        raise InvalidInputError(
            f"polygon ends at ({P.domain_end}, {P.end_value}), expected ({ht}, {dim})"
        )
    return construct(SlopeMultiset(tuple((1 - s, m) for s, m in reversed(P.slopes().entries))))


def concave_envelope(points):
    """Least concave majorant of a finite point set containing the origin."""
    pts = {}
    for x, y in points:
        x, y = Fraction(x), Fraction(y)
        if x < 0:
            raise InvalidInputError(f"negative abscissa {x}")
        if x not in pts or y > pts[x]:
            pts[x] = y
    if not pts:
        raise InvalidInputError("empty point set")
    if 0 not in pts or pts[ZERO] != 0:
        if 0 not in pts:
            raise InvalidInputError("point set must contain the origin")
        # the origin must be the start; a higher point above it is not allowed
        raise InvalidInputError("value at x = 0 must be 0")
    ordered = sorted(pts.items())
    hull = []
    for pt in ordered:
        while len(hull) >= 2:
            (x0, y0), (x1, y1) = hull[-2], hull[-1]
            if (y1 - y0) * (pt[0] - x1) > (pt[1] - y1) * (x1 - x0):
                break
            hull.pop()
        hull.append(pt)
    return ConcavePolygon(tuple(hull))


def dominates(P, Q):
    """Compare two polygons with common endpoints: ``leq``, ``geq``, ``equal`` or ``incomparable``."""
    if P.domain_end != Q.domain_end or P.end_value != Q.end_value:
        raise InvalidInputError("dominance needs polygons with identical endpoints")
    xs = sorted({x for x, _ in P.breakpoints} | {x for x, _ in Q.breakpoints})
    le = ge = True
    for x in xs:
        a, b = P(x), Q(x)
        if a > b:
            le = False
        if a < b:
            ge = False
    if le and ge:
        return "equal"
    if le:
        return "leq"
    if ge:
        return "geq"
    return "incomparable"


def leq(P, Q):
    return dominates(P, Q) in ("leq", "equal")


@dataclass(frozen=True)
class HalfLinePolygon:
    """A concave function on ``[0, inf)``: a finite polygon then a ray."""

    finite_part: ConcavePolygon
    tail_slope: Fraction

    def __post_init__(self):
        t = Fraction(self.tail_slope)
        object.__setattr__(self, "tail_slope", t)
        ents = self.finite_part.slopes().entries
        if ents and t > ents[-1][0]:
            raise InvalidInputError("tail slope exceeds the last finite slope")

    def __call__(self, x):
        x = Fraction(x)
        h = self.finite_part.domain_end
        if x <= h:
            return self.finite_part(x)
        return self.finite_part.end_value + self.tail_slope * (x - h)

    def restrict(self, h):
        """The finite polygon obtained on ``[0, h]``."""
        h = Fraction(h)
        pts = [pt for pt in self.finite_part.breakpoints if pt[0] < h]
        pts.append((h, self(h)))
        return ConcavePolygon(tuple(pts)) if h > 0 else zero_polygon()

    def sort_key(self):
        return (self.finite_part.breakpoints, self.tail_slope)

    def to_json(self):
        return {"finite": self.finite_part.to_json(), "tail_slope": format_rational(self.tail_slope)}


@dataclass(frozen=True)
class RenormalizationReport:
    rescaled: tuple  # (n, polygon on [0, h])
    lower: ConcavePolygon | None
    divisor_pairs_ok: bool
    subadditive_ok: bool
    violations: tuple

    @property
    def ok(self):
        return self.divisor_pairs_ok and self.subadditive_ok


def _rescale(P, n):
    return ConcavePolygon(tuple((x / n, y / n) for x, y in P.breakpoints))


def _pointwise_min(polys):
    """Concave envelope is not the min; the min of concave functions is concave,
    with breakpoints among the union of breakpoints and pairwise crossings."""
    xs = set()
    for P in polys:
        xs.update(x for x, _ in P.breakpoints)
    for P, Q in product(polys, repeat=2):
        xs.update(_crossings(P, Q))
    pts = sorted((x, min(P(x) for P in polys)) for x in xs)
    return ConcavePolygon(tuple(pts))


def _crossings(P, Q):
    xs = sorted({x for x, _ in P.breakpoints} | {x for x, _ in Q.breakpoints})
    out = []
    for a, b in zip(xs, xs[1:]):
        da, db = P(a) - Q(a), P(b) - Q(b)
        if da * db < 0:
            out.append(a + (b - a) * da / (da - db))
    return out


def renormalize_check(seq, h, denom=8):
    """Check the shadow of the renormalization limit on a finite sequence.

    ``seq[n - 1]`` is a polygon on ``[0, n h]``.  Verifies
    ``phi_{n+m} <= phi_n (x) phi_m`` on supplied indices and
    ``phi_{kn}(kn x) / (kn) <= phi_k(k x) / k`` for supplied divisor pairs,
    at rational ``x`` with denominator ``<= denom`` and at every breakpoint.
    """
    h = Fraction(h)
    N = len(seq)
    violations = []
    for n, P in enumerate(seq, 1):
        if P.domain_end != n * h:
            raise InvalidInputError(f"term {n} has domain [0, {P.domain_end}], expected [0, {n * h}]")
    sub_ok = True
    for n in range(1, N + 1):
        for m in range(1, N + 1 - n):
            conv = tropical_convolve(seq[n - 1], seq[m - 1])
            if not leq(seq[n + m - 1], conv):
                sub_ok = False
                violations.append(("subadditivity", n, m))
    rescaled = tuple((n, _rescale(P, n)) for n, P in enumerate(seq, 1))
    xs = set()
    for d in range(1, denom + 1):
        xs.update(Fraction(i, d) * h for i in range(d + 1))
    for _, R in rescaled:
        xs.update(x for x, _ in R.breakpoints)
    div_ok = True
    for k in range(1, N + 1):
        for kn in range(2 * k, N + 1, k):
            A, B = rescaled[kn - 1][1], rescaled[k - 1][1]
            bad = [x for x in sorted(xs) if A(x) > B(x)]
            if bad:
                div_ok = False
                violations.append(("divisor-chain", k, kn, bad[0]))
    lower = _pointwise_min([R for _, R in rescaled]) if rescaled else None
    return RenormalizationReport(rescaled, lower, div_ok, sub_ok, tuple(violations))
