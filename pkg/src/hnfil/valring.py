"""Exact arithmetic in ``K = Q(p^(1/k))`` and its valuation ring ``O``.

An element is a coefficient vector ``(c_0, ..., c_{k-1})`` of rationals
standing for ``sum c_i pi^i`` with ``pi^k = p``.  The valuation is
normalized by ``v(p) = 1`` so the value group is ``(1/k) Z``.
"""

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from sympy import isprime

from . import kernel
from .errors import InvalidInputError, ResourceBoundError
from .rational import format_rational, parse_rational, vp_rational

__all__ = [
    "INF",
    "FieldConfig",
    "ValuedFieldElement",
    "TorsionModule",
    "elementary_divisors",
    "fitting_degree",
    "torsion_length",
    "set_bits_guard",
    "base_change",
]

INF = math.inf

_bits_guard = None
if os.environ.get("HN_BITS_GUARD", "").isdigit():
    _bits_guard = int(os.environ["HN_BITS_GUARD"])


def set_bits_guard(bits):
    """Abort arithmetic once a coefficient needs more than ``bits`` bits.

    ``None`` disables the guard.  Returns the previous setting.
    """
    global _bits_guard
    old, _bits_guard = _bits_guard, bits
    return old


def _check_bits(coeffs):
    g = _bits_guard
    if g is None:
        return
    for c in coeffs:
        if c.numerator.bit_length() > g or c.denominator.bit_length() > g:
            raise ResourceBoundError(f"rational coefficient exceeds the {g}-bit guard")


@lru_cache(maxsize=None)
def _checked_prime(p):
    return isprime(p)


@dataclass(frozen=True)
class FieldConfig:
    """The field ``Q(p^(1/k))`` with ``v(p) = 1``."""

    p: int
    k: int = 1

    def __post_init__(self):
        if not isinstance(self.p, int) or not _checked_prime(self.p):
            raise InvalidInputError(f"p must be prime, got {self.p!r}")
        if not isinstance(self.k, int) or self.k < 1:
            raise InvalidInputError(f"ramification index must be >= 1, got {self.k!r}")

    def element(self, coeffs):
        coeffs = [Fraction(c) for c in coeffs]
        if len(coeffs) > self.k:
            raise InvalidInputError(f"expected at most {self.k} coefficients")
        coeffs += [Fraction(0)] * (self.k - len(coeffs))
        return ValuedFieldElement(self, tuple(coeffs))

    def scalar(self, c):
        return self.element([c])

    def zero(self):
        return self.element([])

    def one(self):
        return self.element([1])

    def pi(self):
        if self.k == 1:
            return self.element([self.p])
        return self.element([0, 1])

    def pi_power(self, e):
        """``pi^e`` for an integer ``e >= 0``."""
        s, t = divmod(e, self.k)
        coeffs = [0] * self.k
        coeffs[t] = self.p ** s
        return self.element(coeffs)

    def uniformizer_power(self, v):
        """The element ``pi^(k v)`` of valuation ``v`` (``v`` in ``(1/k) Z``, ``v >= 0``)."""
        v = Fraction(v)
        e = v * self.k
        if e.denominator != 1 or e < 0:
            raise InvalidInputError(f"valuation {v} is not a non-negative multiple of 1/{self.k}")
        return self.pi_power(int(e))

    def to_json(self):
        return {"p": self.p, "k": self.k}

    @classmethod
    def from_json(cls, data, pointer="/field"):
        if not isinstance(data, dict) or "p" not in data:
            raise InvalidInputError("field must be an object with keys p and k", pointer)
        p, k = data["p"], data.get("k", 1)
        if not isinstance(p, int) or not isinstance(k, int):
            raise InvalidInputError("p and k must be integers", pointer)
        return cls(p, k)


class ValuedFieldElement:
    """Exact element of ``Q(p^(1/k))``."""

    __slots__ = ("field", "coeffs", "_val")

    def __init__(self, field, coeffs):
        self.field = field
        self.coeffs = coeffs
        self._val = None

    def _coerce(self, other):
        if isinstance(other, ValuedFieldElement):
            if other.field != self.field:
                raise InvalidInputError("elements live in different fields")
            return other
        if isinstance(other, (int, Fraction)):
            return self.field.scalar(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return ValuedFieldElement(self.field, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return ValuedFieldElement(self.field, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return ValuedFieldElement(self.field, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        k = self.field.k
        if k == 1:
            out = (self.coeffs[0] * other.coeffs[0],)
        else:
            p = self.field.p
            acc = [Fraction(0)] * k
            for i, a in enumerate(self.coeffs):
                if not a:
                    continue
                for j, b in enumerate(other.coeffs):
                    if not b:
                        continue
                    t = i + j
                    if t >= k:
                        acc[t - k] += a * b * p
                    else:
                        acc[t] += a * b
            out = tuple(acc)
        _check_bits(out)
        return ValuedFieldElement(self.field, out)

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("division by zero in the valued field")
        k = self.field.k
        if k == 1:
            return ValuedFieldElement(self.field, (1 / self.coeffs[0],))
        # columns of the multiplication-by-self matrix are self * pi^j
        cols = []
        x = self
        pi = self.field.pi()
        for _ in range(k):
            cols.append(list(x.coeffs))
            x = x * pi
        rows = [[cols[j][i] for j in range(k)] + [Fraction(int(i == 0))] for i in range(k)]
        sol = _solve_rational(rows, k)
        _check_bits(sol)
        return ValuedFieldElement(self.field, tuple(sol))

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.field.scalar(other)
        if not isinstance(other, ValuedFieldElement):
            return NotImplemented
        return self.field == other.field and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.field, self.coeffs))

    def is_zero(self):
        return not any(self.coeffs)

    def valuation(self):
        """``min(v_p(c_i) + i/k)``; ``INF`` for zero."""
        if self._val is None:
            k = self.field.k
            best = INF
            for i, c in enumerate(self.coeffs):
                if c:
                    v = vp_rational(c, self.field.p) + Fraction(i, k)
                    if v < best:
                        best = v
            self._val = best
        return self._val

    def is_integral(self):
        return self.valuation() >= 0

    def residue(self, N):
        """Image in ``O / p^N`` as ``k`` ints; requires ``valuation >= 0``."""
        if self.valuation() < 0:
            raise InvalidInputError("element is not in the valuation ring")
        q = self.field.p ** N
        return [(c.numerator * pow(c.denominator, -1, q)) % q for c in self.coeffs]

    def to_json(self):
        return {"coeffs": [format_rational(c) for c in self.coeffs]}

    @classmethod
    def from_json(cls, field, data, pointer=""):
        if not isinstance(data, dict) or not isinstance(data.get("coeffs"), list):
            raise InvalidInputError("element must be an object with a 'coeffs' list", pointer)
        coeffs = data["coeffs"]
        if len(coeffs) != field.k:
            raise InvalidInputError(f"expected {field.k} coefficients, got {len(coeffs)}", pointer + "/coeffs")
        return field.element([parse_rational(c, f"{pointer}/coeffs/{i}") for i, c in enumerate(coeffs)])

    def __repr__(self):
        k = self.field.k
        terms = []
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            mono = "" if i == 0 else ("pi" if i == 1 else f"pi^{i}")
            cs = format_rational(c)
            terms.append(cs if not mono else (mono if c == 1 else f"{cs}*{mono}"))
        body = " + ".join(terms) if terms else "0"
        return f"<{body} in Q({self.field.p}^(1/{k}))>"


def _solve_rational(rows, n):
    # Gauss-Jordan on an n x (n+1) augmented rational system
    rows = [list(r) for r in rows]
    for col in range(n):
        piv = next(i for i in range(col, n) if rows[i][col])
        rows[col], rows[piv] = rows[piv], rows[col]
        inv = 1 / rows[col][col]
        rows[col] = [x * inv for x in rows[col]]
        for i in range(n):
            if i != col and rows[i][col]:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[col])]
    return [rows[i][n] for i in range(n)]


def base_change(x, m):
    """Image of ``x`` under ``Q(p^(1/k)) -> Q(p^(1/(k m)))``, ``pi -> pi'^m``."""
    f = x.field
    g = FieldConfig(f.p, f.k * m)
    coeffs = [Fraction(0)] * g.k
    for i, c in enumerate(x.coeffs):
        coeffs[i * m] = c
    return ValuedFieldElement(g, tuple(coeffs))


@dataclass(frozen=True)
class TorsionModule:
    """``(+)_i O / (a_i)`` recorded by the valuations ``v(a_i) > 0``, in summand order."""

    divisors: tuple

    def __post_init__(self):
        ds = tuple(Fraction(d) for d in self.divisors)
        for d in ds:
            if d <= 0:
                raise InvalidInputError(f"torsion divisors must be positive, got {d}")
        object.__setattr__(self, "divisors", ds)

    @property
    def deg(self):
        return sum(self.divisors, Fraction(0))

    @property
    def rank(self):
        return len(self.divisors)

    def is_zero(self):
        return not self.divisors


def elementary_divisors(A):
    """Valuations of a diagonal form of ``A`` under unimodular operations over ``O``.

    Pivots on the first minimum-valuation entry in row-major order.  Returns
    ``min(rows, cols)`` values, ascending, with ``INF`` for zero pivots.
    """
    rows = len(A)
    cols = len(A[0]) if rows else 0
    M = [list(r) for r in A]
    for i, r in enumerate(M):
        if len(r) != cols:
            raise InvalidInputError("ragged matrix", f"/{i}")
        for j, x in enumerate(r):
            if x.valuation() < 0:
                raise InvalidInputError("entry is not in the valuation ring", f"/{i}/{j}")
    out = []
    live_r = list(range(rows))
    live_c = list(range(cols))
    while live_r and live_c:
        best, bi, bj = INF, -1, -1
        for i in live_r:
            for j in live_c:
                v = M[i][j].valuation()
                if v < best:
                    best, bi, bj = v, i, j
        if bi < 0:
            break
        a = M[bi][bj]
        ainv = a.inverse()
        for i in live_r:
            if i == bi or M[i][bj].is_zero():
                continue
            f = M[i][bj] * ainv
            M[i] = [x - f * y if j in live_c else x for j, (x, y) in enumerate(zip(M[i], M[bi]))]
        for j in live_c:
            if j == bj or M[bi][j].is_zero():
                continue
            f = M[bi][j] * ainv
            for i in live_r:
                M[i][j] = M[i][j] - f * M[i][bj]
        live_r.remove(bi)
        live_c.remove(bj)
        out.append(best)
    out += [INF] * (min(rows, cols) - len(out))
    return sorted(out)


def fitting_degree(generators, ambient):
    """Degree ``v(Fitt_0 N)`` of the submodule ``N`` generated by the columns.

    ``generators`` is an ``r x m`` matrix (columns = generators) whose row
    ``i`` is read in ``O / (pi-power of valuation ambient.divisors[i])``.
    Computed as ``deg(ambient) - deg(ambient / N)`` from the presentation
    ``[generators | diag(relations)]``.
    """
    r = ambient.rank
    if len(generators) != r:
        raise InvalidInputError(f"generator matrix has {len(generators)} rows, ambient has rank {r}")
    if r == 0:
        return Fraction(0)
    field = None
    for row in generators:
        for x in row:
            field = x.field
            break
    if field is None:
        return Fraction(0)
    pres = []
    for i, row in enumerate(generators):
        rel = [field.uniformizer_power(ambient.divisors[i]) if j == i else field.zero() for j in range(r)]
        pres.append(list(row) + rel)
    quotient = sum(elementary_divisors(pres), Fraction(0))
    return ambient.deg - quotient


def torsion_length(A_res, V, divisors, p, k):
    """Degree of ``O * alpha(V)`` inside ``(+) O / pi^(k c_i)`` via the chain-ring kernel.

    ``A_res`` holds residues of the ``alpha`` matrix (rows indexed by the
    ambient summands), ``V`` integer generator rows in the coordinates of
    the source group, ``divisors`` the ``c_i``.  Independent of
    ``fitting_degree``: the ambient is embedded in ``(O / p^N)^r`` by
    multiplying summand ``i`` by ``pi^(k N - k c_i)`` and the length of the
    image is read off its Smith valuations.
    """
    if not divisors or not V:
        return Fraction(0)
    N = max(math.ceil(c) for c in divisors)
    K = k * N
    shifts = [K - int(c * k) for c in divisors]
    piv = kernel.smith_image(A_res, V, shifts, p, k, N)
    return Fraction(sum(K - v for v in piv), k)


# ------------------------------------------------------------ linear algebra


def smith_transform(A):
    """Diagonalize ``A`` over ``O`` keeping track of the column transform.

    Returns ``(pivots, D, V, Vinv)``: ``D = U A V`` has exactly one nonzero
    entry per pivot ``(i, j)``.  Pivot choice matches ``elementary_divisors``.
    """
    rows = len(A)
    cols = len(A[0]) if rows else 0
    field = A[0][0].field if rows and cols else None
    M = [list(r) for r in A]
    Vinv = [[field.one() if i == j else field.zero() for j in range(cols)] for i in range(cols)] if cols else []
    V = [list(r) for r in Vinv]
    pivots = []
    live_r, live_c = list(range(rows)), list(range(cols))
    while live_r and live_c:
        best, bi, bj = INF, -1, -1
        for i in live_r:
            for j in live_c:
                v = M[i][j].valuation()
                if v < best:
                    best, bi, bj = v, i, j
        if bi < 0:
            break
        ainv = M[bi][bj].inverse()
        for i in live_r:
            if i != bi and not M[i][bj].is_zero():
                f = M[i][bj] * ainv
                M[i] = [x - f * y for x, y in zip(M[i], M[bi])]
        for j in live_c:
            if j != bj and not M[bi][j].is_zero():
                f = M[bi][j] * ainv
                for i in range(rows):
                    M[i][j] = M[i][j] - f * M[i][bj]
                for i in range(cols):
                    V[i][j] = V[i][j] - f * V[i][bj]
                # column j -= f column bj  =>  row bj of Vinv += f row j
                Vinv[bj] = [a + f * b for a, b in zip(Vinv[bj], Vinv[j])]
        live_r.remove(bi)
        live_c.remove(bj)
        pivots.append((bi, bj, best))
    return pivots, M, V, Vinv


def k_rref(M):
    """Reduced row echelon form over ``K``; returns ``(R, pivot_columns)``."""
    R = [list(r) for r in M]
    piv = []
    rank = 0
    ncols = len(R[0]) if R else 0
    for col in range(ncols):
        i = next((i for i in range(rank, len(R)) if not R[i][col].is_zero()), None)
        if i is None:
            continue
        R[rank], R[i] = R[i], R[rank]
        inv = R[rank][col].inverse()
        R[rank] = [x * inv for x in R[rank]]
        for t in range(len(R)):
            if t != rank and not R[t][col].is_zero():
                f = R[t][col]
                R[t] = [a - f * b for a, b in zip(R[t], R[rank])]
        piv.append(col)
        rank += 1
    return R[:rank], piv


def k_rank(M):
    return len(k_rref(M)[1]) if M and M[0] else 0


def k_kernel(M, field, n):
    """Basis of ``{x in K^n : M x = 0}`` (free variables set to 1 in turn)."""
    if not M:
        return [[field.one() if i == j else field.zero() for i in range(n)] for j in range(n)]
    R, piv = k_rref(M)
    basis = []
    for f in range(n):
        if f in piv:
            continue
        x = [field.zero() for _ in range(n)]
        x[f] = field.one()
        for row, c in zip(R, piv):
            x[c] = -row[f]
        basis.append(x)
    return basis


def refree(M):
    """Coordinates of the columns of ``M`` in an ``O``-basis of the ``O``-module they span.

    ``M`` is an ``r x m`` matrix over ``K`` whose columns span a free
    ``O``-module of rank ``s``.  The basis is the column echelon form over
    ``O`` (pivot on the first minimum-valuation entry of each row); the
    result is an ``s x m`` matrix with a unit ``s x s`` minor.
    """
    r = len(M)
    m = len(M[0]) if r else 0
    if not r or not m:
        return [], []
    field = M[0][0].field
    E = [list(row) for row in M]  # column operations act in place
    basis_cols = []
    pivot_rows = []
    live = list(range(m))
    for i in range(r):
        best, bj = INF, -1
        for j in live:
            v = E[i][j].valuation()
            if v < best:
                best, bj = v, j
        if bj < 0:
            continue
        inv = E[i][bj].inverse()
        for j in live:
            if j != bj and not E[i][j].is_zero():
                f = E[i][j] * inv
                for t in range(r):
                    E[t][j] = E[t][j] - f * E[t][bj]
        basis_cols.append([E[t][bj] for t in range(r)])
        pivot_rows.append(i)
        live.remove(bj)
    # solve basis * X = M by forward substitution on the pivot rows
    s = len(basis_cols)
    X = [[field.zero() for _ in range(m)] for _ in range(s)]
    for j in range(m):
        y = [M[t][j] for t in range(r)]
        for a in range(s):
            i = pivot_rows[a]
            coef = y[i] / basis_cols[a][i]
            X[a][j] = coef
            if not coef.is_zero():
                y = [yt - coef * bt for yt, bt in zip(y, basis_cols[a])]
    return X, pivot_rows


def has_unit_minor(M):
    """``O``-span of the columns is all of ``O^r`` (entries assumed integral)."""
    r = len(M)
    if r == 0:
        return True
    if not M[0]:
        return False
    d = elementary_divisors(M)
    return len(d) >= r and all(x == 0 for x in d[:r])
