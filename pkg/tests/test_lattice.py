import itertools
import random
from fractions import Fraction
from math import gcd

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import Matrix
from sympy.matrices.normalforms import hermite_normal_form, smith_normal_form

from hnfil.errors import InvalidInputError, ResourceBoundError
from hnfil.lattice import (
    Lattice,
    Subgroup,
    count_subgroups,
    enumerate_subgroups,
    hnf,
    integer_kernel,
    lll_rows,
    rank_mod_p,
    saturate,
    smith_int,
    subspaces,
)


def _same_lattice(A, B):
    # column Hermite forms of the transposes are canonical for the row lattices
    A = [r for r in A if any(r)]
    B = [r for r in B if any(r)]
    if not A or not B:
        return not A and not B
    return hermite_normal_form(Matrix(A).T) == hermite_normal_form(Matrix(B).T)


int_rows = st.integers(1, 4).flatmap(
    lambda n: st.lists(st.lists(st.integers(-12, 12), min_size=n, max_size=n), min_size=1, max_size=4)
)


@settings(max_examples=100, deadline=None)
@given(int_rows)
def test_hnf_spans_same_lattice(rows):
    H = hnf(rows)
    assert _same_lattice(H, [r for r in rows if any(r)])
    assert len(H) == Matrix(rows).rank()


@settings(max_examples=100, deadline=None)
@given(int_rows)
def test_integer_kernel_is_left_kernel(rows):
    for x in integer_kernel(rows):
        assert all(sum(x[i] * rows[i][j] for i in range(len(rows))) == 0 for j in range(len(rows[0])))
    assert len(integer_kernel(rows)) == len(rows) - Matrix(rows).rank()


@settings(max_examples=80, deadline=None)
@given(int_rows)
def test_saturate_is_primitive(rows):
    n = len(rows[0])
    S = saturate(rows, n)
    r = Matrix(rows).rank()
    assert len(S) == r
    if r:
        minors = [Matrix([S[i] for i in range(r)]).extract(list(range(r)), list(c)).det() for c in itertools.combinations(range(n), r)]
        assert abs(gcd(*[int(m) for m in minors])) == 1
        for v in rows:
            assert Matrix(S + [v]).rank() == r


def test_smith_int_matches_sympy():
    rng = random.Random(5)
    for _ in range(60):
        n = rng.randint(1, 4)
        while True:
            A = [[rng.randint(-9, 9) for _ in range(n)] for _ in range(n)]
            if Matrix(A).det():
                break
        d, U, V, Vi = smith_int(A)
        S = smith_normal_form(Matrix(A))
        assert [abs(x) for x in d] == [abs(int(S[i, i])) for i in range(n)]
        assert Matrix(U) * Matrix(A) * Matrix(V) == Matrix.diag(*d)
        assert Matrix(V) * Matrix(Vi) == Matrix.eye(n)


def test_lll_preserves_lattice():
    rows = [[1, 0, 0, 1345], [0, 1, 0, 35], [0, 0, 1, 154]]
    R = lll_rows(rows)
    assert _same_lattice(R, rows)
    assert max(sum(x * x for x in r) for r in R) < max(sum(x * x for x in r) for r in rows)


def test_rank_mod_p():
    assert rank_mod_p([[1, 2], [2, 4]], 3) == 1
    assert rank_mod_p([[2, 0], [0, 2]], 2) == 0


@pytest.mark.parametrize("n,p,count", [(1, 2, 2), (2, 2, 5), (2, 3, 6), (3, 2, 16)])
def test_subspace_counts(n, p, count):
    # sum of Gaussian binomials
    subs = list(subspaces(n, p))
    assert len(subs) == count
    assert all(rank_mod_p(B, p) == len(B) for B in subs if B)


def _elements(p, e):
    return list(itertools.product(*[range(p ** x) for x in e]))


def _generated(p, e, gens):
    mods = [p ** x for x in e]
    seen = {tuple(0 for _ in e)}
    frontier = list(seen)
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                b = tuple((x + y) % m for x, y, m in zip(a, g, mods))
                if b not in seen:
                    seen.add(b)
                    nxt.append(b)
        frontier = nxt
    return frozenset(seen)


def _brute_subgroups(p, e):
    # every subgroup of a group of rank <= 2 is generated by two elements
    els = _elements(p, e)
    out = set()
    for a, b in itertools.combinations_with_replacement(els, 2):
        out.add(_generated(p, e, [a, b]))
    return out


@pytest.mark.parametrize("p,e", [(2, (1,)), (2, (2,)), (2, (1, 1)), (2, (2, 1)), (2, (1, 2)), (3, (1, 1)), (2, (2, 2)), (3, (2, 1))])
def test_enumeration_matches_brute_force(p, e):
    got = set()
    for sub in enumerate_subgroups(p, e):
        S = _generated(p, e, sub.generators() or [tuple(0 for _ in e)])
        assert len(S) == p ** sub.log_order
        got.add(S)
    n_enum = sum(1 for _ in enumerate_subgroups(p, e))
    assert n_enum == len(got)
    assert got == _brute_subgroups(p, e)


@pytest.mark.parametrize("p,e", [(2, (3, 1)), (2, (2, 2, 1)), (3, (2, 2)), (2, (1, 1, 1, 1)), (5, (1, 1)), (2, (3, 2, 1))])
def test_enumeration_count_matches_partition_formula(p, e):
    assert sum(1 for _ in enumerate_subgroups(p, e)) == count_subgroups(p, e)


def test_enumeration_bound():
    with pytest.raises(ResourceBoundError):
        list(enumerate_subgroups(2, (4, 4), bound=2 ** 7))


def test_subgroup_operations():
    e = (2, 1)
    A = Subgroup.from_generators(2, e, [[2, 0]])
    B = Subgroup.from_generators(2, e, [[0, 1]])
    C = A + B
    assert C.log_order == 2
    assert A <= C and B <= C and not C <= A
    assert Subgroup.whole(2, e).log_order == 3
    assert Subgroup.zero(2, e).log_order == 0


def test_lattice_basics():
    lam = Lattice.from_rational(2, [[Fraction(1, 2), 0]], 2)
    assert lam.index_log == 1
    assert lam.contains(Lattice.standard(2, 2))
    assert lam.contains_vector([Fraction(1, 2), 0])
    assert not lam.contains_vector([0, Fraction(1, 2)])
    mu = Lattice.from_rational(2, [[0, Fraction(1, 2)]], 2)
    assert (lam + mu).index_log == 2
    assert Lattice.from_rational(2, [[1, 0]], 2) == Lattice.standard(2, 2)
    with pytest.raises(InvalidInputError):
        Lattice.from_rational(2, [[Fraction(1, 3), 0]], 2)


def test_intersect_subspace_keeps_denominators():
    lam = Lattice.from_rational(2, [[Fraction(1, 4), Fraction(1, 4)]], 2)
    (v,) = lam.intersect_subspace([[1, 1]])
    assert [abs(x) for x in v] == [Fraction(1, 4), Fraction(1, 4)]


@settings(max_examples=60, deadline=None)
@given(
    st.sampled_from([2, 3]),
    st.lists(st.lists(st.integers(-8, 8), min_size=3, max_size=3), min_size=1, max_size=3),
    st.integers(0, 3),
)
def test_lattice_contains_its_generators(p, rows, N):
    vecs = [[Fraction(x, p ** N) for x in r] for r in rows]
    lam = Lattice.from_rational(p, vecs, 3)
    assert all(lam.contains_vector(v) for v in vecs)
    assert lam.contains(Lattice.standard(p, 3))
    assert lam.index_log <= 3 * N
