import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from sympy import Matrix
from sympy.matrices.normalforms import smith_normal_form

from hnfil import kernel
from hnfil.errors import InvalidInputError, ResourceBoundError
from hnfil.rational import format_rational, parse_rational, vp
from hnfil.valring import (
    INF,
    FieldConfig,
    TorsionModule,
    base_change,
    elementary_divisors,
    fitting_degree,
    has_unit_minor,
    k_kernel,
    k_rank,
    set_bits_guard,
    smith_transform,
    torsion_length,
)

F22 = FieldConfig(2, 2)


@st.composite
def elements(draw, field=F22, allow_zero=True):
    coeffs = draw(
        st.lists(
            st.fractions(min_value=-20, max_value=20, max_denominator=12),
            min_size=field.k,
            max_size=field.k,
        )
    )
    x = field.element(coeffs)
    if not allow_zero:
        assume(not x.is_zero())
    return x


def test_uniformizer_power_is_p():
    pi = F22.pi()
    assert pi * pi == F22.scalar(2)
    assert pi.valuation() == Fraction(1, 2)
    F3 = FieldConfig(3, 3)
    assert F3.pi() * F3.pi() * F3.pi() == F3.scalar(3)


def test_field_rejects_bad_parameters():
    with pytest.raises(InvalidInputError):
        FieldConfig(4, 1)
    with pytest.raises(InvalidInputError):
        FieldConfig(2, 0)


def test_valuation_examples():
    assert F22.element([1, 0]).valuation() == 0
    assert F22.element([0, 2]).valuation() == Fraction(3, 2)
    assert F22.element([Fraction(1, 4), 0]).valuation() == -2
    assert F22.zero().valuation() == INF


def test_residue_and_json():
    x = F22.element([Fraction(1, 3), 5])
    assert x.residue(2) == [3, 1]  # 1/3 = 3 mod 4
    assert F22.element(["1/3", "5"]) == x
    assert type(x).from_json(F22, x.to_json()) == x
    with pytest.raises(InvalidInputError):
        F22.element([Fraction(1, 2)]).residue(1)


@settings(max_examples=200, deadline=None)
@given(elements(), elements(), elements())
def test_ring_axioms(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    assert a - a == F22.zero()


@settings(max_examples=200, deadline=None)
@given(elements(allow_zero=False), elements(allow_zero=False))
def test_valuation_is_multiplicative_and_ultrametric(a, b):
    assert (a * b).valuation() == a.valuation() + b.valuation()
    assert (a + b).valuation() >= min(a.valuation(), b.valuation())
    assert a * a.inverse() == F22.one()
    assert a.inverse().valuation() == -a.valuation()


def test_base_change_scales_valuation_index():
    x = F22.element([3, 2])
    y = base_change(x, 3)
    assert y.field == FieldConfig(2, 6)
    assert y.valuation() == x.valuation()
    assert base_change(F22.pi(), 2) == FieldConfig(2, 4).pi_power(2)


def test_rational_helpers():
    assert parse_rational("3/2") == Fraction(3, 2)
    assert parse_rational("-4") == -4
    assert format_rational(Fraction(6, 4)) == "3/2"
    assert format_rational(Fraction(5)) == "5"
    assert vp(24, 2) == 3
    with pytest.raises(InvalidInputError):
        parse_rational("1.5")
    with pytest.raises(InvalidInputError):
        parse_rational(0.5)


def test_torsion_module_degree():
    M = TorsionModule((Fraction(1, 2), 1))
    assert M.deg == Fraction(3, 2)
    with pytest.raises(InvalidInputError):
        TorsionModule((0,))


def _int_matrix(rng, rows, cols, p):
    return [[rng.choice([0, 1, p, p * p, 3 * p, p ** 3, 1 + p]) * rng.choice([1, -1]) for _ in range(cols)] for _ in range(rows)]


def test_elementary_divisors_match_integer_smith_form():
    # over Z_(p) the divisors are the p-adic valuations of the integer Smith invariants
    rng = random.Random(7)
    for _ in range(80):
        p = rng.choice([2, 3, 5])
        rows, cols = rng.randint(1, 4), rng.randint(1, 4)
        A = _int_matrix(rng, rows, cols, p)
        F = FieldConfig(p, 1)
        got = elementary_divisors([[F.scalar(x) for x in r] for r in A])
        S = smith_normal_form(Matrix(A))
        want = sorted(vp(int(S[i, i]), p) if S[i, i] else INF for i in range(min(rows, cols)))
        assert got == want


def _det(M):
    n = len(M)
    if n == 0:
        return F22.one()
    total = F22.zero()
    for perm in itertools.permutations(range(n)):
        sign = 1
        for i in range(n):
            for j in range(i + 1, n):
                if perm[i] > perm[j]:
                    sign = -sign
        term = F22.scalar(sign)
        for i, j in enumerate(perm):
            term = term * M[i][j]
        total = total + term
    return total


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3).flatmap(lambda n: st.lists(st.lists(elements(), min_size=n, max_size=n), min_size=n, max_size=n)))
def test_elementary_divisors_sum_to_determinant_valuation(M):
    M = [[x if x.valuation() >= 0 else x * x.inverse() for x in row] for row in M]
    assert sum(elementary_divisors(M)) == _det(M).valuation()


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3).flatmap(lambda r: st.lists(st.lists(elements(), min_size=3, max_size=3), min_size=r, max_size=r)))
def test_smith_transform_diagonalizes(A):
    A = [[x if x.valuation() >= 0 else x * x.inverse() for x in row] for row in A]
    pivots, D, V, Vinv = smith_transform(A)
    n = len(A[0])
    for i in range(n):
        for j in range(n):
            s = sum((V[i][t] * Vinv[t][j] for t in range(n)), F22.zero())
            assert s == (F22.one() if i == j else F22.zero())
    for i, row in enumerate(D):
        for j, x in enumerate(row):
            if (i, j) not in {(a, b) for a, b, _ in pivots}:
                assert x.is_zero()
    assert sorted(v for _, _, v in pivots) == [v for v in elementary_divisors(A) if v != INF]


def test_fitting_degree_and_torsion_length_agree():
    # two independent routes to the degree of O alpha(V)
    rng = random.Random(11)
    for _ in range(150):
        p, k = rng.choice([2, 3]), rng.randint(1, 3)
        F = FieldConfig(p, k)
        r, n = rng.randint(1, 3), rng.randint(1, 3)
        divs = [Fraction(rng.randint(1, 2 * k), k) for _ in range(r)]
        alpha = [[F.pi_power(rng.randint(0, 3)) * F.element([rng.randint(1, p - 1)]) if rng.random() < 0.8 else F.zero() for _ in range(n)] for _ in range(r)]
        V = [[rng.randint(0, p ** 2) for _ in range(n)] for _ in range(rng.randint(1, n))]
        gens = [[sum((alpha[i][j] * v[j] for j in range(n)), F.zero()) for v in V] for i in range(r)]
        res = [[x.residue(2) for x in row] for row in alpha]
        assert fitting_degree(gens, TorsionModule(tuple(divs))) == torsion_length(res, V, divs, p, k)


@pytest.mark.skipif(kernel._ckernel is None, reason="compiled kernel not built")
def test_compiled_and_python_kernels_agree():
    rng = random.Random(3)
    for _ in range(300):
        p, k = rng.choice([2, 3, 5]), rng.randint(1, 4)
        N = rng.randint(1, 3)
        r, n = rng.randint(1, 3), rng.randint(1, 3)
        A = [[[rng.randrange(p ** N) for _ in range(k)] for _ in range(n)] for _ in range(r)]
        V = [[rng.randrange(p ** N) for _ in range(n)] for _ in range(rng.randint(1, 3))]
        shifts = [rng.randint(0, k * N - 1) for _ in range(r)]
        old = kernel.set_backend("python")
        try:
            a = kernel.smith_image(A, V, shifts, p, k, N)
            kernel.set_backend("compiled")
            b = kernel.smith_image(A, V, shifts, p, k, N)
        finally:
            kernel.set_backend(old)
        assert list(a) == list(b)


def test_kernel_ranks_and_kernels():
    M = [[F22.one(), F22.pi()]]
    assert k_rank(M) == 1
    (v,) = k_kernel(M, F22, 2)
    assert M[0][0] * v[0] + M[0][1] * v[1] == F22.zero()
    assert has_unit_minor([[F22.pi(), F22.one()]])
    assert not has_unit_minor([[F22.pi(), F22.scalar(2)]])


def test_bits_guard_aborts():
    old = set_bits_guard(8)
    try:
        with pytest.raises(ResourceBoundError):
            F22.element([2 ** 20 + 1]) * F22.element([2 ** 20 + 3])
    finally:
        set_bits_guard(old)
