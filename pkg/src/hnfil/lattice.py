"""Integer lattices and finite abelian p-groups.

Subgroups of ``M = (+)_i Z/p^{e_i}`` are stored as full-rank lattices
``D Z^s <= L <= Z^s`` (``D = diag(p^{e_i})``) in upper-triangular row
Hermite form.  Lattices ``T <= Lam <= p^{-N} T`` are stored the same way
through ``p^N Lam``.
"""

import os
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd, lcm

from sympy.polys.domains import ZZ
from sympy.polys.matrices import DomainMatrix

from .errors import InvalidInputError, ResourceBoundError

__all__ = [
    "hnf_with_transform",
    "hnf",
    "integer_kernel",
    "saturate",
    "lll_rows",
    "Lattice",
    "Subgroup",
    "enumerate_subgroups",
    "count_subgroups",
    "subspaces",
    "enum_bound",
    "rank_mod_p",
    "left_kernel_mod_p",
]

DEFAULT_BOUND_EXP = 6


def enum_bound(p):
    """Largest group order allowed for exhaustive subgroup enumeration."""
    env = os.environ.get("HN_ENUM_BOUND")
    if env:
        try:
            return int(env)
        except ValueError:
            raise InvalidInputError(f"HN_ENUM_BOUND must be an integer, got {env!r}") from None
    return p ** DEFAULT_BOUND_EXP


# ---------------------------------------------------------------- integers


def hnf_with_transform(rows):
    """Row Hermite form ``H = U * rows`` with ``U`` unimodular.

    Returns ``(H, U, rank)``: the first ``rank`` rows of ``H`` are the
    nonzero echelon rows (positive pivots, entries above each pivot
    reduced into ``[0, pivot)``); the remaining rows of ``U`` span the
    left kernel.
    """
    m = len(rows)
    n = len(rows[0]) if m else 0
    H = [list(map(int, r)) for r in rows]
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    rank = 0
    for col in range(n):
        if rank == m:
            break
        # Euclid down the column
        while True:
            nz = [i for i in range(rank, m) if H[i][col]]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(H[i][col]))
            H[rank], H[piv] = H[piv], H[rank]
            U[rank], U[piv] = U[piv], U[rank]
            done = True
            for i in range(rank + 1, m):
                if H[i][col]:
                    q = H[i][col] // H[rank][col]
                    H[i] = [a - q * b for a, b in zip(H[i], H[rank])]
                    U[i] = [a - q * b for a, b in zip(U[i], U[rank])]
                    if H[i][col]:
                        done = False
            if done:
                break
        if not any(H[i][col] for i in range(rank, m)):
            continue
        if H[rank][col] < 0:
            H[rank] = [-a for a in H[rank]]
            U[rank] = [-a for a in U[rank]]
        d = H[rank][col]
        for i in range(rank):
            q = H[i][col] // d
            if q:
                H[i] = [a - q * b for a, b in zip(H[i], H[rank])]
                U[i] = [a - q * b for a, b in zip(U[i], U[rank])]
        rank += 1
    return H, U, rank


def hnf(rows):
    """Nonzero rows of the row Hermite form."""
    if not rows:
        return []
    H, _, rank = hnf_with_transform(rows)
    return H[:rank]


def integer_kernel(rows):
    """Basis of ``{x in Z^m : x * rows = 0}``."""
    if not rows:
        return []
    _, U, rank = hnf_with_transform(rows)
    return hnf(U[rank:])


def _clear(vecs):
    out = []
    for v in vecs:
        d = reduce(lcm, (Fraction(x).denominator for x in v), 1)
        out.append([int(Fraction(x) * d) for x in v])
    return out


def saturate(vecs, n):
    """Basis of ``Q-span(vecs) intersect Z^n``."""
    vecs = [v for v in _clear(vecs) if any(v)]
    if not vecs:
        return []
    # the saturation is the annihilator of the annihilator
    cols = [list(c) for c in zip(*vecs)]
    ann = integer_kernel(cols)  # x with x . v = 0 for all v
    if not ann:
        return hnf([[int(i == j) for j in range(n)] for i in range(n)])
    return hnf(integer_kernel([list(c) for c in zip(*ann)]))


def lll_rows(rows):
    """LLL-reduced basis of the row lattice (sympy)."""
    M = DomainMatrix([[ZZ(int(x)) for x in r] for r in rows], (len(rows), len(rows[0])), ZZ)
    return [[int(x) for x in r] for r in M.lll().to_list()]


def rank_mod_p(rows, p):
    M = [[x % p for x in r] for r in rows]
    rank = 0
    ncols = len(M[0]) if M else 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(M)) if M[i][col]), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        inv = pow(M[rank][col], -1, p)
        M[rank] = [(x * inv) % p for x in M[rank]]
        for i in range(len(M)):
            if i != rank and M[i][col]:
                f = M[i][col]
                M[i] = [(a - f * b) % p for a, b in zip(M[i], M[rank])]
        rank += 1
    return rank


def left_kernel_mod_p(rows, p):
    """Basis (reduced echelon) of ``{u in F_p^m : u * rows = 0}``."""
    m = len(rows)
    n = len(rows[0]) if m else 0
    aug = [[x % p for x in rows[i]] + [int(i == j) for j in range(m)] for i in range(m)]
    rank = 0
    for col in range(n):
        piv = next((i for i in range(rank, m) if aug[i][col]), None)
        if piv is None:
            continue
        aug[rank], aug[piv] = aug[piv], aug[rank]
        inv = pow(aug[rank][col], -1, p)
        aug[rank] = [(x * inv) % p for x in aug[rank]]
        for i in range(m):
            if i != rank and aug[i][col]:
                f = aug[i][col]
                aug[i] = [(a - f * b) % p for a, b in zip(aug[i], aug[rank])]
        rank += 1
    return _rref_mod_p([row[n:] for row in aug[rank:]], p)


def _rref_mod_p(rows, p):
    M = [[x % p for x in r] for r in rows]
    ncols = len(M[0]) if M else 0
    rank = 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(M)) if M[i][col]), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        inv = pow(M[rank][col], -1, p)
        M[rank] = [(x * inv) % p for x in M[rank]]
        for i in range(len(M)):
            if i != rank and M[i][col]:
                f = M[i][col]
                M[i] = [(a - f * b) % p for a, b in zip(M[i], M[rank])]
        rank += 1
    return M[:rank]


def subspaces(n, p, dim=None):
    """All subspaces of ``F_p^n`` as reduced row-echelon bases."""
    from itertools import combinations, product

    dims = range(n + 1) if dim is None else [dim]
    for d in dims:
        for pivots in combinations(range(n), d):
            free = [(i, j) for i in range(d) for j in range(pivots[i] + 1, n) if j not in pivots]
            for vals in product(range(p), repeat=len(free)):
                B = [[0] * n for _ in range(d)]
                for i, c in enumerate(pivots):
                    B[i][c] = 1
                for (i, j), v in zip(free, vals):
                    B[i][j] = v
                yield B


# ---------------------------------------------------------------- subgroups


@dataclass(frozen=True)
class Subgroup:
    """Subgroup of ``(+) Z/p^{e_i}`` given by its lattice in Hermite form.

    ``rows`` is the upper-triangular basis of ``L`` with diagonal
    ``p^{b_i}``; the subgroup is ``L / D Z^s`` of order ``p^{sum(e_i - b_i)}``.
    """

    p: int
    cyclic_type: tuple
    rows: tuple

    @property
    def log_order(self):
        return sum(e - _vp_int(self.rows[i][i], self.p) for i, e in enumerate(self.cyclic_type))

    def generators(self):
        """Rows reduced modulo the relations, zero generators dropped."""
        out = []
        for row in self.rows:
            g = [x % (self.p ** e) for x, e in zip(row, self.cyclic_type)]
            if any(g):
                out.append(g)
        return out

    def contains(self, other):
        return all(_in_upper_lattice(self.rows, list(r)) for r in other.rows)

    def __le__(self, other):
        return other.contains(self)

    @classmethod
    def from_generators(cls, p, cyclic_type, gens):
        s = len(cyclic_type)
        rels = [[p ** cyclic_type[i] if i == j else 0 for j in range(s)] for i in range(s)]
        return cls(p, tuple(cyclic_type), _canon(hnf(list(gens) + rels), s))

    @classmethod
    def whole(cls, p, cyclic_type):
        s = len(cyclic_type)
        return cls(p, tuple(cyclic_type), tuple(tuple(int(i == j) for j in range(s)) for i in range(s)))

    @classmethod
    def zero(cls, p, cyclic_type):
        return cls.from_generators(p, cyclic_type, [])

    def __add__(self, other):
        return Subgroup.from_generators(self.p, self.cyclic_type, [list(r) for r in self.rows + other.rows])


def _vp_int(n, p):
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _canon(H, s):
    return tuple(tuple(r) for r in H[:s])


def _in_upper_lattice(rows, v):
    v = list(v)
    for i, row in enumerate(rows):
        d = row[i]
        if v[i] % d:
            return False
        q = v[i] // d
        if q:
            v = [a - q * b for a, b in zip(v, row)]
    return not any(v)


def count_subgroups(p, cyclic_type):
    """Number of subgroups of ``(+) Z/p^{e_i}`` from the partition formula.

    Sums over sub-partitions ``nu`` of ``lambda`` the product over ``i`` of
    ``p^{nu'_{i+1} (lambda'_i - nu'_i)}`` times the Gaussian binomial
    ``[lambda'_i - nu'_{i+1}, nu'_i - nu'_{i+1}]_p``.
    """
    lam = sorted((e for e in cyclic_type if e > 0), reverse=True)
    if not lam:
        return 1
    top = lam[0]
    lam_c = [sum(1 for e in lam if e >= i) for i in range(1, top + 2)]

    def gauss(a, b):
        if b < 0 or b > a:
            return 0
        num = den = 1
        for i in range(b):
            num *= p ** (a - i) - 1
            den *= p ** (i + 1) - 1
        return num // den

    total = 0

    def rec(i, prev, nu_c):
        nonlocal total
        if i == top:
            nu_c = nu_c + [0]
            term = 1
            for j in range(top):
                term *= p ** (nu_c[j + 1] * (lam_c[j] - nu_c[j])) * gauss(lam_c[j] - nu_c[j + 1], nu_c[j] - nu_c[j + 1])
            total += term
            return
        for c in range(min(prev, lam_c[i]) + 1):
            rec(i + 1, c, nu_c + [c])

    rec(0, len(lam), [])
    return total


def enumerate_subgroups(p, cyclic_type, bound=None):
    """Yield every subgroup of ``(+) Z/p^{e_i}`` once, in a fixed order."""
    e = tuple(cyclic_type)
    s = len(e)
    if bound is None:
        bound = enum_bound(p)
    if p ** sum(e) > bound:
        raise ResourceBoundError(f"group of order {p}^{sum(e)} exceeds the enumeration bound {bound}")

    def rec(i, below):
        # below: rows i+1..s-1 of the lattice, already valid
        if i < 0:
            yield tuple(tuple(r) for r in below)
            return
        for b in range(e[i] + 1):
            free = [j for j in range(i + 1, s)]
            ranges = [range(below[j - i - 1][j]) for j in free]
            for tail in _product(ranges):
                row = [0] * s
                row[i] = p ** b
                for j, x in zip(free, tail):
                    row[j] = x
                # p^{e_i} eps_i must lie in the lattice
                mult = p ** (e[i] - b)
                if not _in_upper_lattice_tail(below, [mult * x for x in row], i + 1):
                    continue
                yield from rec(i - 1, [row] + below)

    for rows in rec(s - 1, []):
        yield Subgroup(p, e, rows)


def _in_upper_lattice_tail(rows, v, start):
    v = list(v)
    for idx, row in enumerate(rows):
        c = start + idx
        d = row[c]
        if v[c] % d:
            return False
        q = v[c] // d
        if q:
            v = [a - q * b for a, b in zip(v, row)]
    return not any(v[start:])


def _product(ranges):
    if not ranges:
        yield ()
        return
    first, rest = ranges[0], ranges[1:]
    for x in first:
        for t in _product(rest):
            yield (x,) + t


# ---------------------------------------------------------------- lattices


@dataclass(frozen=True)
class Lattice:
    """``p^{-N} L`` for an integer lattice ``L`` containing ``p^N Z^n``.

    Canonical: ``L`` in row Hermite form and ``N`` minimal.
    """

    p: int
    N: int
    rows: tuple

    @classmethod
    def standard(cls, p, n):
        return cls(p, 0, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @classmethod
    def from_rows(cls, p, N, rows, n=None):
        """Lattice ``T + p^{-N} span(rows)``."""
        if n is None:
            n = len(rows[0])
        q = p ** N
        gens = [list(map(int, r)) for r in rows] + [[q if i == j else 0 for j in range(n)] for i in range(n)]
        H = hnf(gens)
        return cls._normalize(p, N, H)

    @classmethod
    def from_rational(cls, p, vecs, n):
        """``T + span_Z(vecs)`` for rational vectors with p-power denominators."""
        N = 0
        for v in vecs:
            for x in v:
                d = Fraction(x).denominator
                e = _vp_int(d, p) if d > 1 else 0
                if p ** e != d:
                    raise InvalidInputError(f"denominator {d} is not a power of {p}")
                N = max(N, e)
        q = p ** N
        return cls.from_rows(p, N, [[int(Fraction(x) * q) for x in v] for v in vecs], n)

    @classmethod
    def _normalize(cls, p, N, H):
        while N > 0 and all(x % p == 0 for r in H for x in r):
            H = [[x // p for x in r] for r in H]
            N -= 1
        return cls(p, N, tuple(tuple(r) for r in H))

    @property
    def n(self):
        return len(self.rows)

    @property
    def index_log(self):
        """``log_p [Lam : T]``."""
        return self.N * self.n - sum(_vp_int(self.rows[i][i], self.p) for i in range(self.n))

    def basis(self):
        """Rational basis rows."""
        q = self.p ** self.N
        return [[Fraction(x, q) for x in r] for r in self.rows]

    def scaled_rows(self, N):
        """Integer rows of ``p^N Lam`` (requires ``N >= self.N``)."""
        f = self.p ** (N - self.N)
        return [[x * f for x in r] for r in self.rows]

    def __add__(self, other):
        N = max(self.N, other.N)
        return Lattice.from_rows(self.p, N, self.scaled_rows(N) + other.scaled_rows(N), self.n)

    def contains(self, other):
        N = max(self.N, other.N)
        mine = self.scaled_rows(N)
        return all(_in_upper_lattice(mine, r) for r in other.scaled_rows(N))

    def contains_vector(self, v):
        v = [Fraction(x) for x in v]
        d = max((Fraction(x).denominator for x in v), default=1)
        e = _vp_int(d, self.p) if d > 1 else 0
        N = max(self.N, e)
        q = self.p ** N
        w = [x * q for x in v]
        if any(x.denominator != 1 for x in w):
            return False
        return _in_upper_lattice(self.scaled_rows(N), [int(x) for x in w])

    def scale_inverse_p(self, j=1):
        """``p^{-j} Lam``."""
        return Lattice(self.p, self.N + j, self.rows)

    def intersect_subspace(self, W):
        """Basis rows (rational) of ``Lam intersect W``; ``W`` given by integer spanning rows."""
        if not W:
            return []
        S = saturate(W, self.n)
        L = self.scaled_rows(self.N)
        q = self.p ** self.N
        # elements are (a/q) S with a S = b L for integer a, b
        stacked = [list(r) for r in S] + [[-x for x in r] for r in L]
        ker = integer_kernel(stacked)
        vecs = []
        for kv in ker:
            a = kv[: len(S)]
            vecs.append([sum(Fraction(a[i], q) * S[i][j] for i in range(len(S))) for j in range(self.n)])
        return _rational_hnf(vecs, self.n)

    def to_json(self):
        return {"denominator_exponent": self.N, "rows": [list(r) for r in self.rows]}

    def __eq__(self, other):
        return isinstance(other, Lattice) and (self.p, self.N, self.rows) == (other.p, other.N, other.rows)

    def __hash__(self):
        return hash((self.p, self.N, self.rows))


def _rational_hnf(vecs, n):
    if not vecs:
        return []
    d = reduce(lcm, (Fraction(x).denominator for v in vecs for x in v), 1)
    H = hnf([[int(Fraction(x) * d) for x in v] for v in vecs])
    return [[Fraction(x, d) for x in r] for r in H]


def gcd_row(v):
    return reduce(gcd, (abs(int(x)) for x in v), 0)


def smith_int(A):
    """Integer Smith form ``U A V = diag(d_1 | d_2 | ...)`` for a square nonsingular ``A``.

    Returns ``(d, U, V, Vinv)``.
    """
    n = len(A)
    M = [list(map(int, r)) for r in A]
    U = [[int(i == j) for j in range(n)] for i in range(n)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]
    Vi = [[int(i == j) for j in range(n)] for i in range(n)]

    def col_op(j, t, q):
        # column j -= q * column t
        for row in M:
            row[j] -= q * row[t]
        for row in V:
            row[j] -= q * row[t]
        Vi[t] = [a + q * b for a, b in zip(Vi[t], Vi[j])]

    def col_swap(a, b):
        for row in M:
            row[a], row[b] = row[b], row[a]
        for row in V:
            row[a], row[b] = row[b], row[a]
        Vi[a], Vi[b] = Vi[b], Vi[a]

    for t in range(n):
        while True:
            cand = [(abs(M[i][j]), i, j) for i in range(t, n) for j in range(t, n) if M[i][j]]
            _, i, j = min(cand)
            M[t], M[i] = M[i], M[t]
            U[t], U[i] = U[i], U[t]
            col_swap(t, j)
            d = M[t][t]
            clean = True
            for i in range(t + 1, n):
                q = M[i][t] // d
                if q:
                    M[i] = [a - q * b for a, b in zip(M[i], M[t])]
                    U[i] = [a - q * b for a, b in zip(U[i], U[t])]
                if M[i][t]:
                    clean = False
            for j in range(t + 1, n):
                q = M[t][j] // d
                if q:
                    col_op(j, t, q)
                if M[t][j]:
                    clean = False
            if not clean:
                continue
            # divisibility of the remaining block
            bad = next(((i, j) for i in range(t + 1, n) for j in range(t + 1, n) if M[i][j] % d), None)
            if bad is None:
                break
            M[t] = [a + b for a, b in zip(M[t], M[bad[0]])]
            U[t] = [a + b for a, b in zip(U[t], U[bad[0]])]
        if M[t][t] < 0:
            M[t] = [-a for a in M[t]]
            U[t] = [-a for a in U[t]]
    return [M[i][i] for i in range(n)], U, V, Vi
