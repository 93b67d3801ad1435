from fractions import Fraction

import pytest

from hnfil import polygon as poly
from hnfil.errors import InvalidInputError
from hnfil.newton import SlopeData
from hnfil.strata import (
    StratumLabel,
    classify_module,
    dominance,
    enumerate_nu,
    from_levi,
    hecke_labels,
    in_window,
    levi_count,
    levi_data,
    mu_vector,
    nu_ss,
    stratum_dim,
)

h = Fraction(1, 2)


def L(*xs):
    return StratumLabel(tuple(Fraction(x) for x in xs))


def test_enumeration_examples():
    assert enumerate_nu(2, 1) == [L(1, 0), L(h, h)]
    assert enumerate_nu(1, 0) == [L(0)]
    assert enumerate_nu(3, 1) == [L(1, 0, 0), L(h, h, 0), L(Fraction(1, 3), Fraction(1, 3), Fraction(1, 3))]


def _integer_chains(n, d):
    # breakpoint sets: chains of integer points with strictly decreasing slopes in [0, 1]
    out = set()

    def rec(pts):
        x, y = pts[-1]
        if (x, y) == (n, d):
            out.add(StratumLabel.from_polygon(poly.ConcavePolygon(tuple(pts))))
            return
        for x2 in range(x + 1, n + 1):
            for y2 in range(y, min(d, y + x2 - x) + 1):
                s = Fraction(y2 - y, x2 - x)
                if len(pts) >= 2:
                    (a, b) = pts[-2]
                    if not s < Fraction(y - b, x - a):
                        continue
                rec(pts + [(x2, y2)])

    rec([(0, 0)])
    return out


@pytest.mark.parametrize("n", range(1, 7))
def test_enumeration_against_integer_chains(n):
    for d in range(n + 1):
        labels = enumerate_nu(n, d)
        assert len(set(labels)) == len(labels)
        assert set(labels) == _integer_chains(n, d)
        assert all(lab.is_integral() for lab in labels)


@pytest.mark.parametrize("n", range(1, 7))
def test_dominance_extremes(n):
    for d in range(n + 1):
        labels = enumerate_nu(n, d)
        lo, hi = nu_ss(n, d), mu_vector(n, d)
        assert labels[0] == hi and labels[-1] == lo
        for lab in labels:
            assert dominance(lo, lab) in ("leq", "equal")
            assert dominance(lab, hi) in ("leq", "equal")
        # the order is a linear extension of dominance
        for i, a in enumerate(labels):
            for b in labels[i + 1:]:
                assert dominance(a, b) != "leq"


def test_dimension_examples():
    assert stratum_dim(mu_vector(2, 1), L(1, 0)) == 0
    assert stratum_dim(mu_vector(2, 1), nu_ss(2, 1)) == 1
    assert stratum_dim(mu_vector(4, 2), L(1, h, h, 0)) == 1


@pytest.mark.parametrize("n", range(1, 7))
def test_semistable_stratum_is_top_dimensional(n):
    for d in range(n + 1):
        mu = mu_vector(n, d)
        dims = [stratum_dim(mu, lab) for lab in enumerate_nu(n, d)]
        assert all(x >= 0 and x.denominator == 1 for x in dims)
        assert max(dims) == stratum_dim(mu, nu_ss(n, d))
        assert stratum_dim(mu, mu) == 0


@pytest.mark.parametrize("n", range(2, 9))
def test_corank_one_dimension_matches_levi_count(n):
    mu = mu_vector(n, n - 1)
    for nu in enumerate_nu(n, n - 1):
        L_ = levi_data(nu)
        r = L_.block_sizes[0] if L_.slopes[0] == 1 else 0
        assert stratum_dim(mu, nu) == n - r - 1 == levi_count(nu)


def test_levi_examples():
    a = levi_data(L(1, 0))
    assert (a.block_sizes, a.slopes, a.block_omega_ranks) == ((1, 1), (1, 0), (0, 1))
    b = levi_data(L(1, 1, h, h, 0))
    assert (b.heights, b.slopes, b.block_omega_ranks) == ((2, 4, 5), (1, h, 0), (0, 1, 1))
    assert len(levi_data(nu_ss(4, 2)).heights) == 1
    assert from_levi(b) == L(1, 1, h, h, 0)


def test_levi_rejects_non_integral_label():
    with pytest.raises(InvalidInputError):
        levi_data(L(Fraction(2, 3), Fraction(1, 3)))


def test_hecke_labels():
    assert hecke_labels(2, 2) == [(0, 0), (1, 0), (2, 0)]
    assert hecke_labels(1, 5) == [(0,)]
    assert hecke_labels(2, 4, window=True) == [(3, 0), (4, 0)]
    assert not in_window((2, 0))


def test_label_validation_and_json():
    with pytest.raises(InvalidInputError):
        L(0, 1)
    with pytest.raises(InvalidInputError):
        L(2, 0)
    lab = L(1, h, h, 0)
    assert StratumLabel.from_json(lab.to_json()) == lab
    assert lab.to_json() == {"nu": ["1", "1/2", "1/2", "0"]}


def test_classification_of_examples(examples):
    c = classify_module(examples["X2"], SlopeData(((1, 2),)))
    assert c.hn_label == nu_ss(2, 1) and c.newton_label == nu_ss(2, 1) and c.ok
    for name in ("X3", "X4"):
        c = classify_module(examples[name], SlopeData(((0, 1), (1, 1))))
        assert c.hn_label == L(1, 0) == c.newton_label
        assert c.ok and c.relation == "equal"


def test_classification_flags_violation(examples):
    c = classify_module(examples["X4"], SlopeData(((1, 2),)))
    assert not c.ok
