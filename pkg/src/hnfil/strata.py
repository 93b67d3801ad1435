"""Labels of HN and Newton strata for ``GL_n`` with minuscule ``(1^d, 0^{n-d})``."""

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement

from . import polygon as poly
from .errors import InvalidInputError
from .rational import format_rational, parse_rational

__all__ = [
    "StratumLabel",
    "LeviData",
    "enumerate_nu",
    "nu_ss",
    "mu_vector",
    "dominance",
    "stratum_dim",
    "levi_data",
    "from_levi",
    "levi_count",
    "hecke_labels",
    "in_window",
    "classify_module",
    "Classification",
]


@dataclass(frozen=True)
class StratumLabel:
    nu: tuple

    def __post_init__(self):
        nu = tuple(Fraction(x) for x in self.nu)
        for i, x in enumerate(nu):
            if not 0 <= x <= 1:
                raise InvalidInputError(f"entry {x} outside [0, 1]", f"/nu/{i}")
            if i and x > nu[i - 1]:
                raise InvalidInputError("nu must be weakly decreasing", f"/nu/{i}")
        object.__setattr__(self, "nu", nu)

    @property
    def n(self):
        return len(self.nu)

    @property
    def d(self):
        return sum(self.nu, Fraction(0))

    @property
    def polygon(self):
        return poly.construct(poly.SlopeMultiset.from_pairs((x, 1) for x in self.nu))

    def is_integral(self):
        return self.polygon.has_integer_breakpoints()

    @classmethod
    def from_polygon(cls, P):
        nu = []
        for s, m in P.slopes().entries:
            if m.denominator != 1:
                raise InvalidInputError("polygon has a non-integral breakpoint")
            nu += [s] * int(m)
        return cls(tuple(nu))

    def to_json(self):
        return {"nu": [format_rational(x) for x in self.nu]}

    @classmethod
    def from_json(cls, data):
        if not isinstance(data, dict) or not isinstance(data.get("nu"), list):
            raise InvalidInputError("label must be an object with a 'nu' list", "")
        return cls(tuple(parse_rational(x, f"/nu/{i}") for i, x in enumerate(data["nu"])))

    def __str__(self):
        return "(" + ",".join(format_rational(x) for x in self.nu) + ")"


def _check_nd(n, d):
    if not (isinstance(n, int) and isinstance(d, int) and 0 <= d <= n):
        raise InvalidInputError(f"need integers 0 <= d <= n, got n={n}, d={d}")


def enumerate_nu(n, d):
    """Concave polygons ``(0,0) -> (n,d)`` with integer breakpoints and slopes in ``[0,1]``.

    Ordered from the top of the dominance order down: by the sum of the
    values at integer abscissae, then lexicographically, both decreasing.
    """
    _check_nd(n, d)
    out = []

    def rec(x, y, last, segs):
        if x == n:
            if y == d:
                out.append(segs)
            return
        for h in range(1, n - x + 1):
            for dd in range(0, h + 1):
                s = Fraction(dd, h)
                if last is not None and s >= last:
                    continue
                if y + dd > d:
                    continue
                rec(x + h, y + dd, s, segs + [(s, h)])

    rec(0, 0, None, [])
    labels = [StratumLabel(tuple(s for s, h in segs for _ in range(h))) for segs in out]

    def key(lab):
        P = lab.polygon
        return (sum(P(i) for i in range(n + 1)), lab.nu)

    return sorted(labels, key=key, reverse=True)


def nu_ss(n, d):
    _check_nd(n, d)
    return StratumLabel((Fraction(d, n),) * n) if n else StratumLabel(())


def mu_vector(n, d):
    _check_nd(n, d)
    return StratumLabel((Fraction(1),) * d + (Fraction(0),) * (n - d))


def dominance(a, b):
    """``leq``, ``geq``, ``equal`` or ``incomparable`` for labels with the same ``(n, d)``."""
    if a.n != b.n or a.d != b.d:
        raise InvalidInputError("labels have different (n, d)")
    return poly.dominates(a.polygon, b.polygon)


def stratum_dim(mu, nu):
    """``<mu - nu, 2 rho>`` with ``2 rho = (n-1, n-3, ..., 1-n)``."""
    if isinstance(mu, tuple):
        mu = StratumLabel(mu)
    if mu.n != nu.n or mu.d != nu.d:
        raise InvalidInputError("mu and nu have different (n, d)")
    n = nu.n
    return sum(((a - b) * (n + 1 - 2 * j) for j, (a, b) in enumerate(zip(mu.nu, nu.nu), 1)), Fraction(0))


@dataclass(frozen=True)
class LeviData:
    heights: tuple  # cumulative
    slopes: tuple
    block_omega_ranks: tuple

    @property
    def block_sizes(self):
        prev, out = 0, []
        for h in self.heights:
            out.append(h - prev)
            prev = h
        return tuple(out)


def levi_data(nu):
    P = nu.polygon
    if not P.has_integer_breakpoints():
        raise InvalidInputError("label has a non-integral breakpoint")
    heights, slopes, ranks = [], [], []
    x = 0
    for s, m in P.slopes().entries:
        x += int(m)
        heights.append(x)
        slopes.append(s)
        ranks.append(int(m * (1 - s)))
    return LeviData(tuple(heights), tuple(slopes), tuple(ranks))


def from_levi(L):
    nu = []
    for size, s in zip(L.block_sizes, L.slopes):
        nu += [s] * size
    return StratumLabel(tuple(nu))


def levi_count(nu):
    """Sum over Levi blocks of ``rho (h - rho)`` (open cell of each block's Grassmannian)."""
    L = levi_data(nu)
    return sum(r * (h - r) for h, r in zip(L.block_sizes, L.block_omega_ranks))


def in_window(a):
    h = len(a)
    return 2 * h >= a[0] and a[-1] >= 0 and a[0] - a[-1] > h


def hecke_labels(h, bound, window=False):
    """Decreasing integer vectors of length ``h`` with minimum 0 and ``a_1 <= bound``."""
    if h < 1 or bound < 0:
        raise InvalidInputError("need h >= 1 and bound >= 0")
    out = []
    for combo in combinations_with_replacement(range(bound, -1, -1), h - 1):
        a = tuple(combo) + (0,)
        if not window or in_window(a):
            out.append(a)
    return sorted(out)


@dataclass(frozen=True)
class Classification:
    hn_label: StratumLabel
    newton_label: StratumLabel | None
    relation: str | None
    ok: bool


def classify_module(X, claimed=None, horizon=32):
    from .descent import hn_renormalized
    from .newton import newt_flip

    hn = hn_renormalized(X, horizon)
    hn_label = StratumLabel.from_polygon(hn)
    if claimed is None:
        return Classification(hn_label, None, None, True)
    if claimed.ht != X.ht or claimed.dim != X.dim:
        raise InvalidInputError("claimed slope data has the wrong (dim, ht)")
    newt = newt_flip(claimed)
    rel = poly.dominates(hn, newt)
    return Classification(hn_label, StratumLabel.from_polygon(newt), rel, rel in ("leq", "equal"))
