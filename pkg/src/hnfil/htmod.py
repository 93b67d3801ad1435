"""Torsion and integral Hodge-Tate modules.

A torsion module is ``(M, omega, alpha)`` with ``M = (+) Z/p^{e_j}``,
``omega = (+) O/pi^{k c_i}`` and ``alpha`` an ``r x s`` matrix sending the
generators of ``M`` into ``omega``.  An integral module is
``(Z^n, O^r, alpha)`` with ``alpha`` an ``r x n`` matrix over ``O``.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

from . import polygon as poly
from .errors import InvalidInputError, UndefinedSlopeError
from .lattice import Lattice, Subgroup, enumerate_subgroups, smith_int
from .rational import format_rational, parse_rational
from .valring import (
    FieldConfig,
    TorsionModule,
    ValuedFieldElement,
    has_unit_minor,
    k_kernel,
    refree,
    smith_transform,
    torsion_length,
)

__all__ = [
    "TorsionHTModule",
    "IntegralHTModule",
    "FilteredSpace",
    "validate",
    "metrics",
    "metrics_rational",
    "truncate",
    "closure_degree",
    "closure_point",
    "schematic_closure",
    "quotient",
    "hn_polygon_torsion",
    "first_cran",
    "is_semistable",
    "is_type_hn",
    "apply_isogeny",
    "direct_sum",
    "to_filtered_space",
    "lattice_closure",
    "module_on_basis",
    "random_integral_module",
]


def _tupled(rows):
    return tuple(tuple(r) for r in rows)


@dataclass(frozen=True)
class TorsionHTModule:
    field: FieldConfig
    cyclic_type: tuple
    divisors: tuple  # c_i, aligned with the rows of alpha
    alpha: tuple

    def __post_init__(self):
        object.__setattr__(self, "cyclic_type", tuple(int(e) for e in self.cyclic_type))
        object.__setattr__(self, "divisors", tuple(Fraction(c) for c in self.divisors))
        object.__setattr__(self, "alpha", _tupled(self.alpha))
        if any(e <= 0 for e in self.cyclic_type):
            raise InvalidInputError("cyclic type entries must be positive")
        if any(c <= 0 for c in self.divisors):
            raise InvalidInputError("omega divisors must be positive")
        if len(self.alpha) != len(self.divisors):
            raise InvalidInputError(f"alpha has {len(self.alpha)} rows, omega has {len(self.divisors)} summands")
        for i, row in enumerate(self.alpha):
            if len(row) != len(self.cyclic_type):
                raise InvalidInputError(f"alpha row has {len(row)} entries, M has {len(self.cyclic_type)} generators", f"/alpha/{i}")

    @property
    def p(self):
        return self.field.p

    @property
    def omega(self):
        return TorsionModule(self.divisors)

    @property
    def ht(self):
        return sum(self.cyclic_type)

    @property
    def deg(self):
        return self.ht - sum(self.divisors, Fraction(0))

    @property
    def mu(self):
        if self.ht == 0:
            raise UndefinedSlopeError("slope of the zero module")
        return self.deg / self.ht

    def is_zero(self):
        return self.ht == 0

    def precision(self):
        return max((math.ceil(c) for c in self.divisors), default=0)

    def alpha_residues(self):
        N = self.precision()
        return [[x.residue(N) for x in row] for row in self.alpha]

    def to_json(self):
        return {
            "field": self.field.to_json(),
            "cyclic_type": list(self.cyclic_type),
            "omega_divisors": [format_rational(c) for c in self.divisors],
            "alpha": [[x.to_json() for x in row] for row in self.alpha],
        }

    @classmethod
    def from_json(cls, data):
        if not isinstance(data, dict):
            raise InvalidInputError("module must be a JSON object", "")
        field = FieldConfig.from_json(data.get("field"))
        ct = data.get("cyclic_type")
        if not isinstance(ct, list) or not all(isinstance(e, int) for e in ct):
            raise InvalidInputError("cyclic_type must be a list of integers", "/cyclic_type")
        divs = data.get("omega_divisors", [])
        if not isinstance(divs, list):
            raise InvalidInputError("omega_divisors must be a list", "/omega_divisors")
        divs = [parse_rational(c, f"/omega_divisors/{i}") for i, c in enumerate(divs)]
        alpha = _alpha_from_json(field, data.get("alpha", []), len(divs), len(ct))
        return cls(field, tuple(ct), tuple(divs), alpha)


@dataclass(frozen=True)
class IntegralHTModule:
    field: FieldConfig
    n: int
    r: int
    alpha: tuple

    def __post_init__(self):
        object.__setattr__(self, "alpha", _tupled(self.alpha))
        if not 0 <= self.r <= self.n:
            raise InvalidInputError(f"omega rank {self.r} must lie in [0, {self.n}]")
        if len(self.alpha) != self.r:
            raise InvalidInputError(f"alpha has {len(self.alpha)} rows, expected {self.r}", "/alpha")
        for i, row in enumerate(self.alpha):
            if len(row) != self.n:
                raise InvalidInputError(f"alpha row has {len(row)} entries, expected {self.n}", f"/alpha/{i}")

    @property
    def p(self):
        return self.field.p

    @property
    def ht(self):
        return self.n

    @property
    def dim(self):
        return self.n - self.r

    @property
    def mu(self):
        if self.n == 0:
            raise UndefinedSlopeError("slope of the zero module")
        return Fraction(self.dim, self.n)

    def to_json(self):
        return {
            "field": self.field.to_json(),
            "rank": self.n,
            "omega_rank": self.r,
            "alpha": [[x.to_json() for x in row] for row in self.alpha],
        }

    @classmethod
    def from_json(cls, data):
        if not isinstance(data, dict):
            raise InvalidInputError("module must be a JSON object", "")
        field = FieldConfig.from_json(data.get("field"))
        n, r = data.get("rank"), data.get("omega_rank")
        if not isinstance(n, int) or n < 0:
            raise InvalidInputError("rank must be a non-negative integer", "/rank")
        if not isinstance(r, int) or r < 0:
            raise InvalidInputError("omega_rank must be a non-negative integer", "/omega_rank")
        alpha = _alpha_from_json(field, data.get("alpha", []), r, n)
        return cls(field, n, r, alpha)

    @classmethod
    def from_coeffs(cls, p, k, rows, n=None):
        """Build from nested coefficient lists, e.g. ``[[[1], [0, 1]]]`` for ``(1, pi)``."""
        field = FieldConfig(p, k)
        alpha = [[field.element(c) if isinstance(c, (list, tuple)) else field.scalar(c) for c in row] for row in rows]
        if n is None:
            n = len(alpha[0]) if alpha else 0
        return cls(field, n, len(alpha), alpha)


def _alpha_from_json(field, data, r, n):
    if not isinstance(data, list) or len(data) != r:
        raise InvalidInputError(f"alpha must be a list of {r} rows", "/alpha")
    out = []
    for i, row in enumerate(data):
        if not isinstance(row, list) or len(row) != n:
            raise InvalidInputError(f"alpha row must have {n} entries", f"/alpha/{i}")
        out.append([ValuedFieldElement.from_json(field, x, f"/alpha/{i}/{j}") for j, x in enumerate(row)])
    return out


@dataclass(frozen=True)
class FilteredSpace:
    dim_V: int
    fil1_basis: tuple

    @property
    def deg(self):
        return len(self.fil1_basis)

    @property
    def rg(self):
        return self.dim_V

    @property
    def mu(self):
        if self.dim_V == 0:
            raise UndefinedSlopeError("slope of the zero space")
        return Fraction(self.deg, self.dim_V)


# ---------------------------------------------------------------- validation


def validate(X):
    """List of violated conditions; empty means valid."""
    problems = []
    if isinstance(X, IntegralHTModule):
        for i, row in enumerate(X.alpha):
            for j, x in enumerate(row):
                if x.valuation() < 0:
                    problems.append(f"/alpha/{i}/{j}: entry is not integral")
        if not problems and X.r and not has_unit_minor(X.alpha):
            problems.append("generation: no unit r x r minor, O.alpha(T) != omega")
        return problems
    for i, row in enumerate(X.alpha):
        c = X.divisors[i]
        for j, x in enumerate(row):
            v = x.valuation()
            if v < 0:
                problems.append(f"/alpha/{i}/{j}: entry is not integral")
            elif v + X.cyclic_type[j] < c:
                problems.append(f"/alpha/{i}/{j}: p^{X.cyclic_type[j]} times the entry is nonzero in omega")
    if not problems:
        full = torsion_length(X.alpha_residues(), _identity(len(X.cyclic_type)), list(X.divisors), X.p, X.field.k)
        if full != X.omega.deg:
            problems.append("generation: O.alpha(M) != omega")
    return problems


def _identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def metrics(X):
    """``(deg, ht, mu)`` of a torsion module."""
    return X.deg, X.ht, X.mu


def metrics_rational(X):
    """``(dim, ht, mu)`` of an integral module."""
    return X.dim, X.ht, X.mu


def truncate(X, m):
    """``X[p^m]``: ``M = (Z/p^m)^n``, ``omega = (O/p^m)^r``, same ``alpha``."""
    if m < 0:
        raise InvalidInputError("truncation level must be non-negative")
    if m == 0:
        return TorsionHTModule(X.field, (), (), ())
    return TorsionHTModule(X.field, (m,) * X.n, (m,) * X.r, X.alpha)


# ---------------------------------------------------------------- closures


def closure_degree(X, gens, log_order):
    """Degree of the closure of the subgroup generated by integer rows ``gens``."""
    if log_order == 0:
        return Fraction(0)
    return log_order - torsion_length(X.alpha_residues(), gens, list(X.divisors), X.p, X.field.k)


def closure_point(X, sub):
    """``(ht, deg)`` of the closure of a ``Subgroup``."""
    h = sub.log_order
    return Fraction(h), closure_degree(X, sub.generators(), h)


def _check_sub(X, sub):
    if not isinstance(sub, Subgroup) or sub.p != X.p or sub.cyclic_type != X.cyclic_type:
        raise InvalidInputError("subgroup does not live in this module's group")


def _subgroup_basis(sub):
    """Abstract structure of ``L / D Z^s``: cyclic orders and generators."""
    s = len(sub.cyclic_type)
    if s == 0:
        return [], []
    # D = R L with R integral; Smith of R gives the quotient structure
    L = [list(r) for r in sub.rows]
    D = [[sub.p ** sub.cyclic_type[i] if i == j else 0 for j in range(s)] for i in range(s)]
    R = _solve_int_right(D, L)
    d, U, V, Vi = smith_int(R)
    # L/DZ^s = L/(R L); with U R V = diag(d): basis rows Vi * L
    gens = [[sum(Vi[a][b] * L[b][c] for b in range(s)) for c in range(s)] for a in range(s)]
    orders, out = [], []
    for di, g in zip(d, gens):
        e = _vp(di, sub.p)
        if e > 0:
            orders.append(e)
            out.append(g)
    return orders, out


def _vp(n, p):
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _solve_int_right(D, L):
    """Integer ``R`` with ``D = R L`` for upper-triangular ``L``."""
    s = len(L)
    R = []
    for row in D:
        v = [Fraction(x) for x in row]
        coeffs = [Fraction(0)] * s
        for i in range(s):
            q = v[i] / L[i][i]
            coeffs[i] = q
            if q:
                v = [a - q * b for a, b in zip(v, L[i])]
        if any(c.denominator != 1 for c in coeffs):
            raise InvalidInputError("subgroup lattice does not contain the relations")
        R.append([int(c) for c in coeffs])
    return R


def _embedded_images(X, gens):
    """``diag(pi^{kN - k c_i}) alpha gens^T`` as exact ``O``-matrix (``N`` = precision)."""
    F = X.field
    N = X.precision()
    shifts = [F.pi_power(int(F.k * N - F.k * c)) for c in X.divisors]
    cols = []
    for g in gens:
        cols.append([shifts[i] * sum((X.alpha[i][j] * g[j] for j in range(len(g)) if g[j]), F.zero()) for i in range(len(X.divisors))])
    return [[cols[j][i] for j in range(len(cols))] for i in range(len(X.divisors))], N


def schematic_closure(X, sub):
    """``(M', O alpha(M'), alpha|M')`` as a torsion module in its own coordinates."""
    _check_sub(X, sub)
    orders, gens = _subgroup_basis(sub)
    if not orders or not X.divisors:
        return TorsionHTModule(X.field, tuple(orders), (), ())
    G, N = _embedded_images(X, gens)
    pivots, Dm, _, Vinv = smith_transform(G)
    F = X.field
    divs, alpha = [], []
    for bi, bj, v in pivots:
        if v >= N:
            continue
        c = N - v
        unit = Dm[bi][bj] / F.uniformizer_power(v)
        divs.append(c)
        alpha.append([_reduce(unit * Vinv[bj][l], c, F) for l in range(len(gens))])
    return TorsionHTModule(X.field, tuple(orders), tuple(divs), tuple(alpha))


def _reduce(x, c, F):
    # drop monomials of valuation >= c so entries stay small
    N = math.ceil(c)
    if x.is_zero():
        return x
    res = x.residue(N)
    return F.element([Fraction(t) for t in res])


def quotient(X, sub):
    """``(M/M', omega/O alpha(M'), induced alpha)``."""
    _check_sub(X, sub)
    s = len(X.cyclic_type)
    F = X.field
    d, U, V, Vi = smith_int([list(r) for r in sub.rows]) if s else ([], [], [], [])
    # Z^s / L: coordinate y -> y V, i-th coordinate mod d_i; generators e_i Vi
    q_orders, q_gens = [], []
    for i, di in enumerate(d):
        e = _vp(di, X.p)
        if e > 0:
            q_orders.append(e)
            q_gens.append(Vi[i])
    r = len(X.divisors)
    if r == 0:
        return TorsionHTModule(F, tuple(q_orders), (), ())
    # omega / omega': relations diag(pi^{k c_i}) and alpha of the subgroup generators
    rel_cols = []
    for i in range(r):
        rel_cols.append([F.uniformizer_power(X.divisors[i]) if t == i else F.zero() for t in range(r)])
    for g in sub.generators():
        rel_cols.append([sum((X.alpha[t][j] * g[j] for j in range(s) if g[j]), F.zero()) for t in range(r)])
    Rm = [[rel_cols[j][i] for j in range(len(rel_cols))] for i in range(r)]
    # a column transform V of Rm^T is the row transform V^T of Rm, so the
    # coordinates of omega / omega' are the entries of V^T y
    pivots, _, Vt, _ = smith_transform([list(col) for col in zip(*Rm)])
    divs, alpha = [], []
    for bi, bj, v in pivots:
        if v == 0:
            continue
        coord = [Vt[t][bj] for t in range(r)]
        row = []
        for g in q_gens:
            img = [sum((X.alpha[t][j] * g[j] for j in range(s) if g[j]), F.zero()) for t in range(r)]
            val = sum((coord[t] * img[t] for t in range(r)), F.zero())
            row.append(_reduce(val, v, F))
        divs.append(v)
        alpha.append(row)
    return TorsionHTModule(F, tuple(q_orders), tuple(divs), tuple(alpha))


# ---------------------------------------------------------------- HN data


def closure_points(X, bound=None):
    for sub in enumerate_subgroups(X.p, X.cyclic_type, bound):
        yield sub, closure_point(X, sub)


def hn_polygon_torsion(X, bound=None):
    """Concave envelope of the closure points of all subgroups."""
    if X.is_zero():
        return poly.zero_polygon()
    return poly.concave_envelope([pt for _, pt in closure_points(X, bound)])


def first_cran(X, bound=None):
    """Largest subgroup whose closure has maximal slope, with that slope."""
    if X.is_zero():
        raise UndefinedSlopeError("first step of the zero module")
    best_mu, best = None, []
    for sub, (h, d) in closure_points(X, bound):
        if h == 0:
            continue
        mu = d / h
        if best_mu is None or mu > best_mu:
            best_mu, best = mu, [sub]
        elif mu == best_mu:
            best.append(sub)
    top = max(s.log_order for s in best)
    winners = [s for s in best if s.log_order == top]
    if len(winners) != 1:
        raise AssertionError("maximal-slope subgroups of maximal height are not unique")
    return winners[0], best_mu


def is_semistable(X, bound=None):
    if isinstance(X, IntegralHTModule):
        if X.n == 0:
            return True
        return is_semistable(truncate(X, 1), bound)
    if X.is_zero():
        return True
    mu = X.mu
    for sub, (h, d) in closure_points(X, bound):
        if h and d > mu * h:
            return False
    return True


def is_type_hn(X, bound=None):
    from .descent import hn_renormalized

    return hn_polygon_torsion(truncate(X, 1), bound) == hn_renormalized(X)


# ---------------------------------------------------------------- integral ops


def lattice_closure(X, lam):
    """``(ht, deg)`` of ``Lam / T`` inside ``X[p^N]`` for a ``Lattice`` ``Lam``."""
    h = lam.index_log
    if h == 0:
        return Fraction(0), Fraction(0)
    N = lam.N
    if X.r == 0:
        return Fraction(h), Fraction(h)
    A = [[x.residue(N) for x in row] for row in X.alpha]
    ln = torsion_length(A, lam.scaled_rows(N), [N] * X.r, X.p, X.field.k)
    return Fraction(h), h - ln


def _as_lattice(X, lam):
    if isinstance(lam, Lattice):
        if lam.p != X.p or lam.n != X.n:
            raise InvalidInputError("lattice does not live in this module's space")
        return lam
    if isinstance(lam, Subgroup):
        ct = set(lam.cyclic_type)
        if len(lam.cyclic_type) != X.n or len(ct) > 1:
            raise InvalidInputError("subgroup must live in p^-N T / T")
        N = ct.pop() if ct else 0
        return Lattice.from_rows(X.p, N, [list(r) for r in lam.rows], X.n)
    raise InvalidInputError("expected a Lattice or a Subgroup of p^-N T / T")


def module_on_basis(X, basis):
    """The module ``(span(basis), O alpha(span), alpha)`` with ``basis`` rational rows over ``T``."""
    F = X.field
    m = len(basis)
    cols = []
    for b in basis:
        cols.append([sum((X.alpha[i][j] * b[j] for j in range(X.n) if b[j]), F.zero()) for i in range(X.r)])
    img = [[cols[j][i] for j in range(m)] for i in range(X.r)]
    if not img or not m:
        return IntegralHTModule(F, m, 0, ())
    if all(x.valuation() >= 0 for row in img for x in row) and has_unit_minor(img):
        return IntegralHTModule(F, m, X.r, img)
    new, _ = refree(img)
    return IntegralHTModule(F, m, len(new), new)


def apply_isogeny(X, lam):
    """The module on the lattice ``Lam`` (Hermite basis), with ``omega`` re-freed."""
    lam = _as_lattice(X, lam)
    return module_on_basis(X, lam.basis())


def direct_sum(X, Y):
    if X.field != Y.field:
        raise InvalidInputError("direct sum needs a common field")
    F = X.field
    if isinstance(X, IntegralHTModule) and isinstance(Y, IntegralHTModule):
        rows = [list(r) + [F.zero()] * Y.n for r in X.alpha] + [[F.zero()] * X.n + list(r) for r in Y.alpha]
        return IntegralHTModule(F, X.n + Y.n, X.r + Y.r, rows)
    if isinstance(X, TorsionHTModule) and isinstance(Y, TorsionHTModule):
        s, t = len(X.cyclic_type), len(Y.cyclic_type)
        rows = [list(r) + [F.zero()] * t for r in X.alpha] + [[F.zero()] * s + list(r) for r in Y.alpha]
        return TorsionHTModule(F, X.cyclic_type + Y.cyclic_type, X.divisors + Y.divisors, rows)
    raise InvalidInputError("direct sum of a torsion and an integral module")


def to_filtered_space(X):
    """``V = K^n`` with ``Fil^1 = ker(alpha)``."""
    if X.r == 0:
        basis = k_kernel([], X.field, X.n)
    else:
        basis = k_kernel([list(r) for r in X.alpha], X.field, X.n)
    return FilteredSpace(X.n, _tupled(basis))


def random_integral_module(rng, p, k, n, r=None, max_val=3, rational_share=0.0):
    """Random valid integral module; ``rational_share`` makes some entries rational integers."""
    F = FieldConfig(p, k)
    while True:
        rr = rng.randint(0, n) if r is None else r
        rows = []
        for _ in range(rr):
            row = []
            for _ in range(n):
                if rng.random() < rational_share:
                    v = rng.randint(0, max_val)
                    row.append(F.scalar(rng.choice([1, -1, 2, 3]) * p ** v if rng.random() < 0.8 else 0))
                else:
                    row.append(_random_element(rng, F, max_val))
            rows.append(row)
        X = IntegralHTModule(F, n, rr, rows)
        if not validate(X):
            return X


def _random_element(rng, F, max_val):
    if rng.random() < 0.15:
        return F.zero()
    e = rng.randint(0, max_val * F.k)
    u = F.element([rng.randint(1, F.p - 1)] + [rng.randint(-2, 2) for _ in range(F.k - 1)])
    return F.pi_power(e) * u
