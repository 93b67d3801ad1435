"""Descent to a module of HN type through towers of first steps.

For an integral module ``X`` the first step ``G_k`` of the HN filtration of
``X[p^k]`` is a lattice ``T <= Lam_k <= p^{-k} T``.  These lattices grow
with ``k``.  Either they stabilize, and ``X`` is replaced by the module on
the limit lattice, or they grow along a rational subspace ``W``, and the
saturated piece on ``W`` splits off as a semistable sub-module.  Repeating
on the quotient ends at an isogenous module whose ``p``-torsion already
shows the full HN polygon.
"""

import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import polygon as poly
from .errors import ResourceBoundError
from .htmod import (
    IntegralHTModule,
    apply_isogeny,
    hn_polygon_torsion,
    is_semistable,
    lattice_closure,
    module_on_basis,
    truncate,
    validate,
)
from .lattice import (
    Lattice,
    hnf_with_transform,
    lll_rows,
    rank_mod_p,
    saturate,
    subspaces,
)
from .rational import format_rational
from .valring import has_unit_minor, k_rref, refree

__all__ = [
    "TowerLevel",
    "CranTower",
    "DescentStep",
    "DescentTrace",
    "build_tower",
    "classify_tower",
    "run_descent",
    "hn_renormalized",
    "hn_nonrenormalized",
    "empirical_convergence",
    "ConvergenceReport",
    "truncation_matches_nonrenormalized",
    "KernelBoundReport",
    "kernel_bound_report",
]

ALREADY_SEMISTABLE = "done"
ISOGENY = "isogeny"
PDIVISIBLE = "pdivisible"


@dataclass(frozen=True)
class TowerLevel:
    k: int
    lattice: Lattice
    a: int
    mu_max: Fraction

    @property
    def height(self):
        return self.lattice.index_log


@dataclass
class CranTower:
    module: IntegralHTModule
    levels: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)

    @property
    def mu_max(self):
        return self.levels[0].mu_max if self.levels else None

    def lattice(self, k):
        if k == 0:
            return Lattice.standard(self.module.p, self.module.n)
        return self.levels[k - 1].lattice

    def a_sequence(self):
        return [lv.a for lv in self.levels]


@dataclass(frozen=True)
class DescentStep:
    kind: str
    module: IntegralHTModule
    mu_max: Fraction
    lattice: Lattice | None = None  # isogeny: limit lattice; p-divisible: the lattice at k0
    result: IntegralHTModule | None = None  # module on the lattice, or the quotient
    sub: IntegralHTModule | None = None
    sub_span: tuple = ()  # integer rows spanning W in the coordinates of ``module``
    k0: int | None = None
    levels: int = 0

    @property
    def kernel_height(self):
        return self.lattice.index_log if self.lattice is not None else 0

    def to_json(self):
        out = {"kind": self.kind, "mu_max": format_rational(self.mu_max), "levels": self.levels}
        if self.kind == ISOGENY:
            out["lattice"] = self.lattice.to_json()
        elif self.kind == PDIVISIBLE:
            out["sub"] = {
                "span": [list(r) for r in self.sub_span],
                "k0": self.k0,
                "lattice": self.lattice.to_json(),
                "module": self.sub.to_json(),
            }
        out["module"] = self.module.to_json()
        return out


@dataclass
class DescentTrace:
    module: IntegralHTModule
    steps: list
    mu_sequence: list
    final: IntegralHTModule
    lattice: Lattice
    filtration: list  # (cumulative rank, slope of the graded piece)
    hn_polygon: poly.ConcavePolygon
    hn_nr: poly.HalfLinePolygon
    mu_infty: Fraction
    certified: bool
    final_p_polygon: poly.ConcavePolygon | None = None

    def to_json(self):
        return {
            "steps": [s.to_json() for s in self.steps],
            "mu_sequence": [format_rational(m) for m in self.mu_sequence],
            "final": self.final.to_json(),
            "lattice": self.lattice.to_json(),
            "filtration": [{"rank": r, "slope": format_rational(s)} for r, s in self.filtration],
            "hn_polygon": self.hn_polygon.to_json(),
            "hn_nonrenormalized": self.hn_nr.to_json(),
            "mu_infinity": format_rational(self.mu_infty),
            "certified": self.certified,
        }


# ---------------------------------------------------------------- towers


def _candidates(X, lam, k):
    """Lattices ``Lam + p^{-1} U`` meeting ``p^{-k} T`` exactly in ``Lam``."""
    p, n = X.p, X.n
    C = lam.scaled_rows(k)
    for U in subspaces(n, p):
        if U and rank_mod_p([_row_mul(u, C) for u in U], p) != len(U):
            continue
        gens = [_row_mul(u, C) for u in U]
        cand = lam + Lattice.from_rows(p, k + 1, gens, n) if gens else lam
        yield cand


def _row_mul(u, C):
    return [sum(u[i] * C[i][j] for i in range(len(u))) for j in range(len(C[0]))]


def _next_level(X, tower, bound_mu=None):
    k = len(tower.levels)
    lam = tower.lattice(k)
    pts = []
    for cand in _candidates(X, lam, k):
        h, d = lattice_closure(X, cand)
        if h:
            pts.append((d / h, h, cand))
    mu_max = max(m for m, _, _ in pts) if bound_mu is None else bound_mu
    if bound_mu is not None and any(m > bound_mu for m, _, _ in pts):
        tower.diagnostics.append(f"level {k + 1}: a subgroup exceeds the level-1 maximal slope")
    best = [(h, c) for m, h, c in pts if m == mu_max]
    top = max(h for h, _ in best)
    winners = {c for h, c in best if h == top}
    if len(winners) != 1:
        tower.diagnostics.append(f"level {k + 1}: maximal-slope subgroup is not unique")
    G = min(winners, key=lambda c: c.rows)
    prev = lam.index_log
    tower.levels.append(TowerLevel(k + 1, G, G.index_log - prev, mu_max))


def build_tower(X, k_max, tower=None):
    """First steps ``G_k`` of ``X[p^k]`` for ``k <= k_max``, one level at a time.

    Each ``G_{k+1}`` lies between ``G_k`` and ``p^{-1} G_k`` and meets
    ``p^{-k} T`` in ``G_k``, so only those candidates are examined.
    """
    if tower is None:
        tower = CranTower(X)
    while len(tower.levels) < k_max:
        _next_level(X, tower, tower.mu_max)
    for i in range(1, len(tower.levels)):
        if tower.levels[i].a > tower.levels[i - 1].a:
            tower.diagnostics.append(f"level {i + 1}: step heights increased")
    return tower


def classify_tower(tower, X=None):
    """Return a ``DescentStep`` or ``None`` when the tower must be deepened."""
    X = tower.module if X is None else X
    lv = tower.levels
    if not lv:
        return None
    n = X.n
    if lv[0].height == n:
        return DescentStep(ALREADY_SEMISTABLE, X, lv[0].mu_max, levels=len(lv))
    K = len(lv)
    if K >= 2 and lv[-1].a == 0:
        lam = lv[-1].lattice
        return DescentStep(ISOGENY, X, lv[0].mu_max, lam, apply_isogeny(X, lam), levels=K)
    if K >= 3 and lv[-1].a == lv[-2].a > 0:
        return _try_pdivisible(tower, X, lv[-1].a)
    return None


def _try_pdivisible(tower, X, c):
    p, n = X.p, X.n
    K = len(tower.levels)
    short = sorted(lll_rows(tower.levels[-1].lattice.scaled_rows(K)), key=lambda v: sum(x * x for x in v))
    W = saturate(short[:c], n)
    if len(W) != c:
        return None
    k0 = None
    for cand in range(K - 1):
        base = tower.lattice(cand)
        inter = base.intersect_subspace(W)
        ok = True
        for k in range(cand, K + 1):
            grown = base + Lattice.from_rational(p, [[x / p ** (k - cand) for x in v] for v in inter], n) if inter else base
            if grown != tower.lattice(k):
                ok = False
                break
        if ok:
            k0 = cand
            break
    if k0 is None:
        return None
    base = tower.lattice(k0)
    A_basis = base.intersect_subspace(W)
    A = module_on_basis(X, A_basis)
    mu_max = tower.mu_max
    if validate(A) or A.n != c or A.mu != mu_max or not mu_max > X.mu:
        return None
    if not is_semistable(A):
        return None
    return DescentStep(PDIVISIBLE, X, mu_max, base, sub=A, sub_span=tuple(tuple(r) for r in W), k0=k0, levels=K)


# ---------------------------------------------------------------- descent


def _rational_inverse(M):
    n = len(M)
    aug = [[Fraction(x) for x in M[i]] + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next(i for i in range(col, n) if aug[i][col])
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for i in range(n):
            if i != col and aug[i][col]:
                f = aug[i][col]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[col])]
    return [row[n:] for row in aug]


def _mat(A, B):
    return [[sum(A[i][t] * B[t][j] for t in range(len(B))) for j in range(len(B[0]))] for i in range(len(A))]


def _adapted_basis(lam, W):
    """Rows ``(S, C)``: ``S`` spans ``Lam cap W``, ``S + C`` is a basis of ``Lam``."""
    B = lam.basis()
    if not W:
        return [], B
    S = lam.intersect_subspace(W)
    Binv = _rational_inverse(B)
    coef = [[int(x) for x in row] for row in _mat(S, Binv)]
    # U coef^T = [H0; 0]; rows of (U^{-1})^T after the first w complete coef
    _, U, w = hnf_with_transform([list(col) for col in zip(*coef)])
    Uinv = _rational_inverse(U)
    Q = [list(col) for col in zip(*Uinv)]
    comp = [[int(x) for x in row] for row in Q[w:]]
    return S, _mat(comp, B)


def _projection(F, cols, r):
    """Linear map ``K^r -> K^{r - s}`` whose kernel is spanned by ``cols``."""
    if not cols:
        return lambda y: list(y), r
    R, piv = k_rref(cols)
    keep = [i for i in range(r) if i not in piv]

    def proj(y):
        y = list(y)
        for row, c in zip(R, piv):
            f = y[c]
            if not f.is_zero():
                y = [a - f * b for a, b in zip(y, row)]
        return [y[i] for i in keep]

    return proj, len(keep)


def _apply(X, v):
    F = X.field
    return [sum((X.alpha[i][j] * v[j] for j in range(X.n) if v[j]), F.zero()) for i in range(X.r)]


def _working_module(X, lam, W):
    """The quotient of ``X`` on ``Lam`` by the saturated piece on ``W``.

    Returns the module on the complement basis ``C`` together with ``S``
    and ``C`` in the coordinates of ``X``.
    """
    F = X.field
    S, C = _adapted_basis(lam, W)
    if not C:
        return None, S, C
    proj, rq = _projection(F, [_apply(X, s) for s in S], X.r)
    cols = [proj(_apply(X, c)) for c in C]
    m = len(C)
    img = [[cols[j][i] for j in range(m)] for i in range(rq)]
    if rq == 0:
        return IntegralHTModule(F, m, 0, ()), S, C
    if all(x.valuation() >= 0 for row in img for x in row) and has_unit_minor(img):
        return IntegralHTModule(F, m, rq, img), S, C
    new, _ = refree(img)
    return IntegralHTModule(F, m, len(new), new), S, C


def _lift(p, n, S, C, lam_q):
    """``S + lam_q C`` as a lattice in the coordinates of ``X``."""
    rows = [list(s) for s in S] + _mat(lam_q.basis(), C)
    return Lattice.from_rational(p, rows, n)


def run_descent(X, horizon=32, bound=None):
    """Iterate towers and steps until the quotient is semistable.

    Raises ``ResourceBoundError`` carrying the partial trace when a tower
    needs more than ``horizon`` levels.
    """
    p, n = X.p, X.n
    lam = Lattice.standard(p, n)
    W = []
    steps, mus, pieces = [], [], []
    max_steps = max(4, 2 * n) * max(horizon, 1)
    while True:
        Q, S, C = _working_module(X, lam, W)
        if Q is None:
            break
        tower = CranTower(Q)
        step = None
        while step is None:
            if len(tower.levels) >= horizon:
                partial = {"steps": [s.to_json() for s in steps], "lattice": lam.to_json(), "tower": tower.a_sequence()}
                raise ResourceBoundError(f"tower did not classify within {horizon} levels", partial)
            build_tower(Q, len(tower.levels) + 1, tower)
            step = classify_tower(tower, Q)
        steps.append(step)
        mus.append(step.mu_max)
        if step.kind == ALREADY_SEMISTABLE:
            pieces.append((Q.n, Q.mu))
            break
        if step.kind == ISOGENY:
            lam = _lift(p, n, S, C, step.lattice)
        else:
            lam = _lift(p, n, S, C, step.lattice)
            W = saturate([list(w) for w in W] + _mat([list(r) for r in step.sub_span], C), n)
            pieces.append((step.sub.n, step.mu_max))
        if len(steps) > max_steps:
            raise ResourceBoundError("descent did not terminate", {"steps": [s.to_json() for s in steps]})
    final = apply_isogeny(X, lam)
    hn = poly.construct(poly.SlopeMultiset.from_pairs([(s, h) for h, s in pieces])) if pieces else poly.zero_polygon()
    filtration = []
    acc = 0
    for h, s in pieces:
        acc += h
        filtration.append((acc, s))
    finite, tail = [], None
    for st in steps:
        if st.kind == ISOGENY:
            finite.append((st.mu_max, st.kernel_height))
        else:
            tail = st.mu_max
            break
    if tail is None:
        tail = hn.first_slope() if n else Fraction(0)
    hn_nr = poly.HalfLinePolygon(poly.construct(poly.SlopeMultiset.from_pairs(finite)), tail)
    final_p = hn_polygon_torsion(truncate(final, 1), bound) if n else poly.zero_polygon()
    return DescentTrace(
        module=X,
        steps=steps,
        mu_sequence=mus,
        final=final,
        lattice=lam,
        filtration=filtration,
        hn_polygon=hn,
        hn_nr=hn_nr,
        mu_infty=tail,
        certified=final_p == hn,
        final_p_polygon=final_p,
    )


@functools.lru_cache(maxsize=512)
def _cached_descent(X, horizon):
    return run_descent(X, horizon)


def hn_renormalized(X, horizon=32):
    """HN polygon of ``X`` read off its descent."""
    return _cached_descent(X, horizon).hn_polygon


def hn_nonrenormalized(X, horizon=32):
    return _cached_descent(X, horizon).hn_nr


@dataclass(frozen=True)
class ConvergenceReport:
    rescaled: tuple
    above_limit: bool
    monotone: bool
    limit: poly.ConcavePolygon | None

    @property
    def ok(self):
        return self.above_limit and self.monotone

    def values_at(self, x):
        return [P(x) for _, P in self.rescaled]


def empirical_convergence(X, N, bound=None, horizon=32):
    """``(1/n) HN(X[p^n])(n x)`` for ``n <= N`` compared with the limit polygon."""
    if N <= 0 or X.n == 0:
        return ConvergenceReport((), True, True, None)
    seq = [hn_polygon_torsion(truncate(X, m), bound) for m in range(1, N + 1)]
    rep = poly.renormalize_check(seq, X.n)
    limit = hn_renormalized(X, horizon)
    above = all(poly.dominates(R, limit) in ("geq", "equal") for _, R in rep.rescaled)
    return ConvergenceReport(rep.rescaled, above, rep.divisor_pairs_ok, limit)


def truncation_matches_nonrenormalized(X, n, bound=None, horizon=32):
    """Whether ``HN(X[p^n])`` and the non-renormalized polygon agree on ``[0, n]``."""
    direct = hn_polygon_torsion(truncate(X, n), bound)
    if direct.domain_end < n:
        return False
    return poly.restrict(direct, n) == hn_nonrenormalized(X, horizon).restrict(n)


@dataclass(frozen=True)
class KernelBoundReport:
    applicable: bool
    exponent: int  # least e with Lam <= p^{-e} T
    bound: int
    holds: bool | None


def kernel_bound_report(trace):
    """Experimental: is the total isogeny kernel killed by ``p^ht``?

    Only meaningful when ``gcd(dim, ht) = 1``; otherwise ``holds`` is None.
    Reports, never raises.
    """
    X = trace.module
    applicable = X.n > 0 and math.gcd(X.dim, X.n) == 1
    e = trace.lattice.N
    return KernelBoundReport(applicable, e, X.n, (e <= X.n) if applicable else None)
