import random
from fractions import Fraction

import pytest

from hnfil.descent import (
    build_tower,
    classify_tower,
    empirical_convergence,
    hn_nonrenormalized,
    hn_renormalized,
    kernel_bound_report,
    run_descent,
    truncation_matches_nonrenormalized,
)
from hnfil.errors import ResourceBoundError
from hnfil.htmod import apply_isogeny, first_cran, hn_polygon_torsion, random_integral_module, truncate
from hnfil.lattice import Lattice

from .conftest import P


def test_x1_is_done(examples):
    tr = run_descent(examples["X1"])
    assert [s.kind for s in tr.steps] == ["done"]
    assert tr.hn_polygon == P((0, 0), (2, 1))
    assert tr.certified


def test_x2_takes_one_isogeny(examples):
    tr = run_descent(examples["X2"])
    assert [s.kind for s in tr.steps] == ["isogeny", "done"]
    assert tr.steps[0].lattice == Lattice.from_rational(2, [[0, Fraction(1, 2)]], 2)
    assert tr.final == examples["X1"]
    assert tr.hn_polygon == P((0, 0), (2, 1))
    assert tr.hn_nr.finite_part == P((0, 0), (1, 1))
    assert tr.hn_nr.tail_slope == Fraction(1, 2)
    assert tr.mu_sequence[0] == 1


def test_x4_splits_off_slope_one(examples):
    tr = run_descent(examples["X4"])
    assert [s.kind for s in tr.steps] == ["pdivisible", "done"]
    assert tr.filtration == [(1, Fraction(1)), (2, Fraction(0))]
    assert tr.hn_polygon == P((0, 0), (1, 1), (2, 1))
    assert tr.hn_nr.tail_slope == 1
    assert tr.certified


def test_x3_split_module(examples):
    tr = run_descent(examples["X3"])
    assert [s.kind for s in tr.steps] == ["pdivisible", "done"]
    assert tr.hn_polygon == P((0, 0), (1, 1), (2, 1))


def test_trace_json_shape(examples):
    data = run_descent(examples["X2"]).to_json()
    assert data["steps"][0]["kind"] == "isogeny"
    assert data["steps"][0]["mu_max"] == "1"
    assert "lattice" in data["steps"][0]
    assert data["hn_polygon"]["breakpoints"] == [["0", "0"], ["2", "1"]]
    assert data["certified"] is True


def test_x2_convergence_values(examples):
    rep = empirical_convergence(examples["X2"], 4, bound=2 ** 8)
    assert rep.values_at(1) == [1, Fraction(3, 4), Fraction(2, 3), Fraction(5, 8)]
    assert rep.ok


@pytest.mark.parametrize("name", ["X2", "X4"])
@pytest.mark.parametrize("n", [1, 2])
def test_truncations_match_nonrenormalized(examples, name, n):
    assert truncation_matches_nonrenormalized(examples[name], n)


def test_horizon_exhaustion_carries_partial_trace(examples):
    with pytest.raises(ResourceBoundError) as ei:
        run_descent(examples["X4"], horizon=2)
    assert ei.value.partial is not None


def test_tower_matches_exhaustive_first_steps():
    # level-wise candidates against enumeration of all subgroups of X[p^k]
    rng = random.Random(5)
    checked = 0
    for _ in range(60):
        p = rng.choice([2, 3])
        k, n = rng.randint(1, 3), rng.randint(1, 3)
        X = random_integral_module(rng, p, k, n, max_val=3, rational_share=rng.choice([0, 0.5]))
        K = 1
        while p ** (n * (K + 1)) <= 3 ** 6 and K < 3:
            K += 1
        tower = build_tower(X, K)
        for lv in tower.levels:
            G, mu = first_cran(truncate(X, lv.k), bound=10 ** 6)
            assert Lattice.from_rows(p, lv.k, [list(r) for r in G.rows], n) == lv.lattice
            assert mu == lv.mu_max
            checked += 1
        assert not tower.diagnostics
    assert checked > 100


def test_classify_tower_needs_depth(examples):
    tower = build_tower(examples["X2"], 1)
    assert classify_tower(tower) is None
    tower = build_tower(examples["X2"], 2, tower)
    assert classify_tower(tower).kind == "isogeny"


def test_random_descents_are_certified():
    rng = random.Random(41)
    for _ in range(80):
        p = rng.choice([2, 3])
        X = random_integral_module(rng, p, rng.randint(1, 3), rng.randint(1, 3), max_val=3)
        tr = run_descent(X)
        assert tr.certified
        assert hn_polygon_torsion(truncate(tr.final, 1)) == tr.hn_polygon
        assert tr.hn_nr.tail_slope == tr.hn_polygon.first_slope()
        assert tr.hn_polygon.has_integer_breakpoints()
        assert (tr.hn_polygon.domain_end, tr.hn_polygon.end_value) == (X.n, X.dim)
        assert tr.lattice.contains(Lattice.standard(p, X.n))
        assert apply_isogeny(X, tr.lattice) == tr.final


def test_cached_wrappers_agree(examples):
    X = examples["X2"]
    assert hn_renormalized(X) == run_descent(X).hn_polygon
    assert hn_nonrenormalized(X) == run_descent(X).hn_nr


def test_kernel_bound_report():
    rng = random.Random(53)
    seen = 0
    for _ in range(40):
        X = random_integral_module(rng, rng.choice([2, 3]), rng.randint(1, 3), rng.randint(1, 3), max_val=3)
        rep = kernel_bound_report(run_descent(X))
        assert rep.bound == X.n
        if rep.applicable:
            seen += 1
            assert rep.holds == (rep.exponent <= X.n)
        else:
            assert rep.holds is None
    assert seen


def test_kernel_bound_on_x2(examples):
    rep = kernel_bound_report(run_descent(examples["X2"]))
    assert rep.applicable and rep.exponent == 1 and rep.holds
