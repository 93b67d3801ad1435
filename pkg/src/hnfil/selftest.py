"""Replay the bundled worked examples, one verdict per acceptance criterion."""

import json
from importlib import resources
from pathlib import Path

from . import polygon as poly
from .descent import empirical_convergence, run_descent, truncation_matches_nonrenormalized
from .errors import HNError, InvalidInputError
from .htmod import IntegralHTModule, apply_isogeny, direct_sum, hn_polygon_torsion, is_semistable, truncate
from .lattice import Lattice
from .newton import SlopeData, check_bounds
from .rational import parse_rational
from .strata import StratumLabel, enumerate_nu, levi_count, levi_data, mu_vector, nu_ss, stratum_dim

CRITERIA = {
    1: "tropical algebra",
    2: "split sums",
    3: "descent termination and certification",
    4: "isogeny invariance",
    5: "renormalization shadow",
    6: "integer breakpoints",
    7: "Hodge and Newton bounds",
    8: "tail slope and truncations",
    9: "discrete valuation descent",
    10: "stratum dimensions",
    11: "determinism",
}


def default_corpus():
    return Path(str(resources.files("hnfil") / "corpus"))


def _poly(pts):
    return poly.ConcavePolygon(tuple((parse_rational(x), parse_rational(y)) for x, y in pts))


def load_corpus(path):
    path = Path(path)
    files = sorted(path.glob("*.json")) if path.is_dir() else []
    if not files:
        raise InvalidInputError(f"no corpus files in {path}")
    data = {}
    for f in files:
        try:
            data[f.stem] = json.loads(f.read_text())
        except json.JSONDecodeError as e:
            raise InvalidInputError(f"{f.name}: {e}") from None
    for need in ("expected", "strata", "discrete"):
        if need not in data:
            raise InvalidInputError(f"corpus lacks {need}.json")
    modules = {}
    for stem, blob in data.items():
        if isinstance(blob, dict) and "module" in blob and "name" in blob:
            modules[blob["name"]] = IntegralHTModule.from_json(blob["module"])
    if not modules:
        raise InvalidInputError("corpus has no module fixtures")
    return data, modules


def _check(results, num, cond, detail=""):
    ok, notes = results.get(num, (True, []))
    if not cond:
        notes = notes + [detail]
    results[num] = (ok and bool(cond), notes)


def _evaluate(data, modules):
    exp = data["expected"]
    res = {i: (True, []) for i in CRITERIA}
    traces = {}
    polys_seen = []

    # 1
    pc = exp["polygons"]["convolution"]
    f, g = _poly(pc["f"]), _poly(pc["g"])
    conv = poly.tropical_convolve(f, g)
    _check(res, 1, conv == _poly(pc["result"]), "convolution example")
    _check(res, 1, conv == poly.tropical_convolve(g, f), "commutativity")
    _check(res, 1, conv == poly.convolve_bruteforce(f, g), "merge differs from direct sup")
    for lam, lf, lg, lfg in pc["legendre"]:
        lam = parse_rational(lam)
        vals = [poly.legendre_transform(P, lam) for P in (f, g, conv)]
        _check(res, 1, vals == [parse_rational(lf), parse_rational(lg), parse_rational(lfg)], f"Legendre at {lam}")
        _check(res, 1, vals[2] == vals[0] + vals[1], "Legendre additivity")
    du = exp["polygons"]["dual"]
    D = poly.dual_polygon(_poly(du["P"]), parse_rational(du["ht"]), parse_rational(du["dim"]))
    _check(res, 1, D == _poly(du["result"]), "dual example")
    env = exp["polygons"]["envelope"]
    pts = [(parse_rational(x), parse_rational(y)) for x, y in env["points"]]
    _check(res, 1, poly.concave_envelope(pts) == _poly(env["result"]), "envelope example")

    # 2
    for item in exp["split_sums"]:
        parts = [IntegralHTModule.from_json(m) for m in item["summands"]]
        total = parts[0]
        for q in parts[1:]:
            total = direct_sum(total, q)
        _check(res, 2, total == modules[item["sum"]], "direct sum differs from fixture")
        lhs = hn_polygon_torsion(truncate(total, 1))
        rhs = poly.zero_polygon()
        for q in parts:
            rhs = poly.tropical_convolve(rhs, hn_polygon_torsion(truncate(q, 1)))
        _check(res, 2, lhs == rhs, "HN of the sum is not the convolution")
    for name, X in modules.items():
        t = truncate(X, 1)
        lhs = hn_polygon_torsion(direct_sum(t, t), bound=X.p ** 8)
        rhs = poly.tropical_convolve(hn_polygon_torsion(t), hn_polygon_torsion(t))
        _check(res, 2, lhs == rhs, f"{name} + {name}")

    # 3, 6, 7, 8
    for name, X in sorted(modules.items()):
        e = exp["modules"].get(name, {})
        tr = run_descent(X, 32)
        traces[name] = tr
        polys_seen.append(tr.hn_polygon)
        _check(res, 3, tr.certified, f"{name}: final module not of HN type")
        if "hn" in e:
            _check(res, 3, tr.hn_polygon == _poly(e["hn"]), f"{name}: HN polygon")
        if "steps" in e:
            _check(res, 3, [s.kind for s in tr.steps] == e["steps"], f"{name}: step kinds")
        if "filtration" in e:
            want = [(r, parse_rational(s)) for r, s in e["filtration"]]
            _check(res, 3, tr.filtration == want, f"{name}: filtration")
        if "hn_p" in e:
            _check(res, 3, hn_polygon_torsion(truncate(X, 1)) == _poly(e["hn_p"]), f"{name}: HN of p-torsion")
        if "semistable" in e:
            _check(res, 3, is_semistable(X) == e["semistable"], f"{name}: semistability")
        rep = check_bounds(tr.hn_polygon, None, (X.dim, X.n))
        _check(res, 7, rep.hodge_ok, f"{name}: Hodge bound")
        if "newton" in e:
            rep = check_bounds(tr.hn_polygon, SlopeData(tuple(map(tuple, e["newton"]))), (X.dim, X.n))
            _check(res, 7, rep.ok and rep.newton_relation == "equal", f"{name}: Newton bound")
        _check(res, 8, tr.hn_nr.tail_slope == tr.hn_polygon.first_slope(), f"{name}: tail slope")
        if "nr_tail" in e:
            _check(res, 8, tr.hn_nr.tail_slope == parse_rational(e["nr_tail"]), f"{name}: tail value")
            _check(res, 8, tr.hn_nr.finite_part == _poly(e["nr_finite"]), f"{name}: finite part")
        for n in e.get("truncation_levels", []):
            _check(res, 8, truncation_matches_nonrenormalized(X, n), f"{name}: truncation at level {n}")
    fal = exp["falsified_newton"]
    rep = check_bounds(_poly(fal["hn"]), SlopeData(tuple(map(tuple, fal["newton"]))))
    _check(res, 7, not rep.ok, "falsified Newton claim was accepted")

    # 4
    for name, X in sorted(modules.items()):
        for vecs in exp["isogenies"]:
            if len(vecs[0]) != X.n:
                continue
            lam = Lattice.from_rational(X.p, [[parse_rational(x) for x in v] for v in vecs], X.n)
            Y = apply_isogeny(X, lam)
            trY = run_descent(Y, 32)
            polys_seen.append(trY.hn_polygon)
            _check(res, 4, trY.hn_polygon == traces[name].hn_polygon, f"{name}: isogeny {vecs}")

    # 5
    for name, X in sorted(modules.items()):
        e = exp["modules"].get(name, {})
        N = len(e.get("convergence_at_1", [])) or 2
        rep = empirical_convergence(X, N, bound=X.p ** (X.n * N))
        _check(res, 5, rep.ok, f"{name}: rescaled polygons")
        if "convergence_at_1" in e:
            want = [parse_rational(v) for v in e["convergence_at_1"]]
            _check(res, 5, rep.values_at(1) == want, f"{name}: values at x=1")

    # 9
    for i, blob in enumerate(data["discrete"]["modules"]):
        X = IntegralHTModule.from_json(blob)
        try:
            tr = run_descent(X, 16)
            polys_seen.append(tr.hn_polygon)
            _check(res, 9, X.field.k == 1 and tr.certified, f"discrete module {i}")
        except HNError as err:
            _check(res, 9, False, f"discrete module {i}: {err}")

    # 6
    for P in polys_seen:
        _check(res, 6, P.has_integer_breakpoints(), f"non-integral breakpoint in {P}")

    # 10
    st = data["strata"]
    for item in st["dims"]:
        nu = StratumLabel(tuple(parse_rational(x) for x in item["nu"]))
        mu = mu_vector(item["n"], item["d"])
        _check(res, 10, stratum_dim(mu, nu) == parse_rational(item["dim"]), f"dim at {nu}")
        _check(res, 10, stratum_dim(mu, mu) == 0, "dim at mu")
    for item in st["enumerations"]:
        got = [lab.nu for lab in enumerate_nu(item["n"], item["d"])]
        want = [tuple(parse_rational(x) for x in lab) for lab in item["labels"]]
        _check(res, 10, got == want, f"labels for ({item['n']}, {item['d']})")
    for n in range(2, st["corank_one_max_n"] + 1):
        mu = mu_vector(n, n - 1)
        for nu in enumerate_nu(n, n - 1):
            L = levi_data(nu)
            r = L.block_sizes[0] if L.slopes[0] == 1 else 0
            _check(res, 10, stratum_dim(mu, nu) == n - r - 1 == levi_count(nu), f"corank one, n={n}, nu={nu}")
        _check(res, 10, all(stratum_dim(mu, nu) <= stratum_dim(mu, nu_ss(n, n - 1)) for nu in enumerate_nu(n, n - 1)), "top stratum")

    return res, traces


def _digest(traces):
    return json.dumps({k: v.to_json() for k, v in sorted(traces.items())}, sort_keys=True)


def run_selftest(corpus=None):
    """Return ``[(criterion, name, passed, notes)]``."""
    data, modules = load_corpus(corpus or default_corpus())
    res, traces = _evaluate(data, modules)
    _, traces2 = _evaluate(data, modules)
    same = _digest(traces) == _digest(traces2)
    res[11] = (same, [] if same else ["two runs serialized differently"])
    return [(i, CRITERIA[i], res[i][0], res[i][1]) for i in sorted(CRITERIA)]
