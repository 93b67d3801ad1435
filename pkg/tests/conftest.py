import json
import random
from fractions import Fraction

import pytest
from hypothesis import strategies as st

from hnfil import polygon as poly
from hnfil.htmod import IntegralHTModule, random_integral_module, schematic_closure, truncate
from hnfil.lattice import enumerate_subgroups
from hnfil.selftest import default_corpus

CORPUS = default_corpus()


def load_example(name):
    return IntegralHTModule.from_json(json.loads((CORPUS / f"{name.lower()}.json").read_text())["module"])


@pytest.fixture(scope="session")
def examples():
    return {name: load_example(name) for name in ("X1", "X2", "X3", "X4")}


@pytest.fixture(scope="session")
def expected():
    return json.loads((CORPUS / "expected.json").read_text())


def P(*pts):
    return poly.ConcavePolygon(tuple((Fraction(x), Fraction(y)) for x, y in pts))


# ---------------------------------------------------------------- strategies

small_fracs = st.fractions(min_value=-3, max_value=3, max_denominator=6)


@st.composite
def polygons(draw, max_segments=4):
    pairs = draw(
        st.lists(
            st.tuples(small_fracs, st.fractions(min_value=Fraction(1, 4), max_value=3, max_denominator=4)),
            min_size=0,
            max_size=max_segments,
        )
    )
    return poly.construct(poly.SlopeMultiset.from_pairs(pairs))


def random_polygon(rng, max_segments=4):
    pairs = []
    for _ in range(rng.randint(0, max_segments)):
        s = Fraction(rng.randint(-12, 12), rng.randint(1, 4))
        m = Fraction(rng.randint(1, 8), rng.randint(1, 3))
        pairs.append((s, m))
    return poly.construct(poly.SlopeMultiset.from_pairs(pairs))


def random_torsion_module(rng, p, max_log, k=None):
    """A torsion module of order at most ``p**max_log``, sometimes of mixed cyclic type."""
    fixed = k
    while True:
        k = fixed or rng.randint(1, 3)
        n = rng.randint(1, max_log)
        m = rng.randint(1, max_log // n)
        X = random_integral_module(rng, p, k, n, max_val=2)
        T = truncate(X, m)
        if rng.random() < 0.4 and m > 1:
            subs = list(enumerate_subgroups(p, T.cyclic_type))
            sub = rng.choice(subs)
            if sub.log_order:
                return schematic_closure(T, sub)
        return T


@pytest.fixture
def rng():
    return random.Random(20240611)


# ---------------------------------------------------------------- acceptance summary

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, name): acceptance criterion")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    num = report.user_properties and dict(report.user_properties).get("criterion")
    if num:
        props = dict(report.user_properties)
        _criteria[num] = (props["criterion_name"], report.passed, report.duration)


@pytest.fixture(autouse=True)
def _criterion_props(request):
    m = request.node.get_closest_marker("criterion")
    if m:
        request.node.user_properties.append(("criterion", m.args[0]))
        request.node.user_properties.append(("criterion_name", m.args[1]))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_criteria):
        name, ok, dur = _criteria[num]
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'} {name} ({dur:.1f}s)")
