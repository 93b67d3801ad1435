"""Command-line front end.

Exit codes: 0 success, 1 a mathematical check failed, 2 invalid input,
3 a resource bound was hit.
"""

import argparse
import json
import os
import sys
from functools import reduce
from pathlib import Path

from . import polygon as poly
from .descent import run_descent
from .errors import HNError, InvalidInputError, ResourceBoundError
from .htmod import (
    IntegralHTModule,
    TorsionHTModule,
    hn_polygon_torsion,
    is_semistable,
    validate,
)
from .newton import SlopeData, check_bounds, newt_flip
from .rational import format_rational, parse_rational
from .render import polygon_svg
from .strata import (
    StratumLabel,
    classify_module,
    enumerate_nu,
    hecke_labels,
    in_window,
    levi_count,
    levi_data,
    mu_vector,
    stratum_dim,
)

OK, FAILED, INVALID, RESOURCE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(INVALID)


def _dumps(obj):
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _read_json(path):
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise InvalidInputError(f"cannot read {path}: {e.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InvalidInputError(f"{path}: not valid JSON ({e.msg} at line {e.lineno})") from None


def _in_file(path, loader):
    try:
        return loader(_read_json(path))
    except InvalidInputError as e:
        raise InvalidInputError(f"{path}: {e}") from None


def _load_polygon(path):
    return _in_file(path, poly.ConcavePolygon.from_json)


def _load_module(path):
    def load(data):
        if isinstance(data, dict) and "cyclic_type" in data:
            return TorsionHTModule.from_json(data)
        return IntegralHTModule.from_json(data)

    return _in_file(path, load)


def _rational(text):
    try:
        return parse_rational(text)
    except InvalidInputError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _rational_list(text):
    return tuple(_rational(x) for x in text.split(","))


def _emit(args, text):
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_polygon(args, P, title=None):
    if getattr(args, "svg", None):
        Path(args.svg).write_text(polygon_svg(P, title))
    _emit(args, P.to_csv() if getattr(args, "csv", False) else _dumps(P.to_json()))
    return OK


# ---------------------------------------------------------------- polygon


def cmd_polygon(args):
    v = args.verb
    if v == "conv":
        P = reduce(poly.tropical_convolve, [_load_polygon(f) for f in args.inputs])
        return _emit_polygon(args, P, "convolution")
    if v == "legendre":
        P = _load_polygon(args.input)
        _emit(args, _dumps({"lambda": format_rational(args.lam), "value": format_rational(poly.legendre_transform(P, args.lam))}))
        return OK
    if v == "dual":
        P = _load_polygon(args.input)
        ht = args.ht if args.ht is not None else P.domain_end
        dim = args.dim if args.dim is not None else P.end_value
        return _emit_polygon(args, poly.dual_polygon(P, ht, dim), "dual")
    if v == "envelope":
        data = _read_json(args.input)
        if not isinstance(data, dict) or not isinstance(data.get("points"), list):
            raise InvalidInputError(f"{args.input}: expected an object with a 'points' list")
        pts = []
        for i, pt in enumerate(data["points"]):
            if not isinstance(pt, list) or len(pt) != 2:
                raise InvalidInputError(f"{args.input}: /points/{i}: point must be a pair")
            pts.append((parse_rational(pt[0], f"/points/{i}/0"), parse_rational(pt[1], f"/points/{i}/1")))
        return _emit_polygon(args, poly.concave_envelope(pts), "envelope")
    if v == "cmp":
        rel = poly.dominates(_load_polygon(args.a), _load_polygon(args.b))
        _emit(args, _dumps({"relation": rel}))
        return OK
    if v == "plot":
        P = _load_polygon(args.input)
        if args.svg or args.csv:
            return _emit_polygon(args, P, args.title)
        _emit(args, polygon_svg(P, args.title))
        return OK
    raise AssertionError(v)


# ---------------------------------------------------------------- module


def _module_hn(X, horizon):
    if isinstance(X, TorsionHTModule):
        return hn_polygon_torsion(X)
    return run_descent(X, horizon).hn_polygon


def cmd_module(args):
    X = _load_module(args.input)
    v = args.verb
    if v == "validate":
        problems = validate(X)
        _emit(args, _dumps({"valid": not problems, "problems": problems}))
        return INVALID if problems else OK
    if v == "metrics":
        if isinstance(X, TorsionHTModule):
            out = {"deg": format_rational(X.deg), "ht": X.ht}
        else:
            out = {"dim": X.dim, "ht": X.ht}
        try:
            out["mu"] = format_rational(X.mu)
        except HNError:
            out["mu"] = None
        _emit(args, _dumps(out))
        return OK
    if v == "hn":
        return _emit_polygon(args, _module_hn(X, args.horizon), "HN polygon")
    if v == "semistable":
        _emit(args, _dumps({"semistable": is_semistable(X)}))
        return OK
    raise AssertionError(v)


# ---------------------------------------------------------------- descent


def cmd_descent(args):
    X = _load_module(args.input)
    if not isinstance(X, IntegralHTModule):
        raise InvalidInputError(f"{args.input}: descent needs an integral module")
    try:
        trace = run_descent(X, args.horizon)
    except ResourceBoundError as e:
        if args.trace and e.partial is not None:
            Path(args.trace).write_text(_dumps(e.partial))
        raise
    data = trace.to_json()
    if args.trace:
        Path(args.trace).write_text(_dumps(data))
    summary = {
        "steps": [s.kind for s in trace.steps],
        "hn_polygon": data["hn_polygon"],
        "hn_nonrenormalized": data["hn_nonrenormalized"],
        "certified": trace.certified,
    }
    _emit(args, _dumps(summary))
    return OK if trace.certified else FAILED


# ---------------------------------------------------------------- newton


def _load_slopes(path):
    return _in_file(path, SlopeData.from_json)


def cmd_newton(args):
    if args.verb == "flip":
        return _emit_polygon(args, newt_flip(_load_slopes(args.input)), "Newton flip")
    hn = _load_polygon(args.input)
    D = _load_slopes(args.slopes) if args.slopes else None
    dims = None
    if args.dim is not None or args.ht is not None:
        if args.dim is None or args.ht is None:
            raise InvalidInputError("--dim and --ht go together")
        dims = (args.dim, args.ht)
    rep = check_bounds(hn, D, dims)
    out = {
        "ok": rep.ok,
        "hodge_ok": rep.hodge_ok,
        "hodge_relation": rep.hodge_relation,
        "newton_ok": rep.newton_ok,
        "newton_relation": rep.newton_relation,
        "isoclinic_line": rep.isoclinic_line,
    }
    _emit(args, _dumps(out))
    return OK if rep.ok else FAILED


# ---------------------------------------------------------------- strata


def _label(args):
    if args.nu is None:
        raise InvalidInputError("--nu is required")
    return StratumLabel(args.nu)


def cmd_strata(args):
    v = args.verb
    if v == "enum":
        labels = enumerate_nu(args.n, args.d)
        _emit(args, _dumps([lab.to_json()["nu"] for lab in labels]))
        return OK
    if v == "dim":
        nu = _label(args)
        if nu.n != args.n or nu.d != args.d:
            raise InvalidInputError(f"--nu has (n, d) = ({nu.n}, {format_rational(nu.d)}), expected ({args.n}, {args.d})")
        _emit(args, format_rational(stratum_dim(mu_vector(args.n, args.d), nu)) + "\n")
        return OK
    if v == "levi":
        nu = _label(args)
        L = levi_data(nu)
        out = {
            "heights": list(L.heights),
            "slopes": [format_rational(s) for s in L.slopes],
            "omega_ranks": list(L.block_omega_ranks),
            "count": levi_count(nu),
        }
        _emit(args, _dumps(out))
        return OK
    if v == "hecke":
        labels = hecke_labels(args.height, args.bound, args.window)
        _emit(args, _dumps([{"a": list(a), "in_window": in_window(a)} for a in labels]))
        return OK
    if v == "classify":
        X = _load_module(args.input)
        if not isinstance(X, IntegralHTModule):
            raise InvalidInputError(f"{args.input}: classify needs an integral module")
        claimed = _load_slopes(args.claimed) if args.claimed else None
        c = classify_module(X, claimed, args.horizon)
        out = {
            "hn_label": c.hn_label.to_json()["nu"],
            "newton_label": c.newton_label.to_json()["nu"] if c.newton_label else None,
            "relation": c.relation,
            "ok": c.ok,
        }
        _emit(args, _dumps(out))
        return OK if c.ok else FAILED
    raise AssertionError(v)


# ---------------------------------------------------------------- selftest


def cmd_selftest(args):
    from .selftest import run_selftest

    rows = run_selftest(args.corpus)
    lines = []
    for num, name, passed, notes in rows:
        lines.append(f"criterion {num}: {'PASS' if passed else 'FAIL'} {name}")
        lines += [f"    {n}" for n in notes]
    _emit(args, "\n".join(lines) + "\n")
    return OK if all(r[2] for r in rows) else FAILED


# ---------------------------------------------------------------- parser


def build_parser():
    ap = _Parser(prog="hn", description="Exact HN polygons, descent traces and strata.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def out_opts(p, polygon=False):
        p.add_argument("--out", help="write the result here instead of stdout")
        if polygon:
            p.add_argument("--csv", action="store_true", help="emit breakpoints as CSV")
            p.add_argument("--svg", help="also write an SVG plot to this path")

    pp = sub.add_parser("polygon", help="polygon calculus")
    pv = pp.add_subparsers(dest="verb", required=True, parser_class=_Parser)
    q = pv.add_parser("conv")
    q.add_argument("inputs", nargs="+")
    out_opts(q, True)
    q = pv.add_parser("legendre")
    q.add_argument("input")
    q.add_argument("--lam", type=_rational, required=True)
    out_opts(q)
    q = pv.add_parser("dual")
    q.add_argument("input")
    q.add_argument("--ht", type=_rational)
    q.add_argument("--dim", type=_rational)
    out_opts(q, True)
    q = pv.add_parser("envelope")
    q.add_argument("input")
    out_opts(q, True)
    q = pv.add_parser("cmp")
    q.add_argument("a")
    q.add_argument("b")
    out_opts(q)
    q = pv.add_parser("plot")
    q.add_argument("input")
    q.add_argument("--title")
    out_opts(q, True)
    pp.set_defaults(func=cmd_polygon)

    mp = sub.add_parser("module", help="Hodge-Tate modules")
    mv = mp.add_subparsers(dest="verb", required=True, parser_class=_Parser)
    for verb in ("validate", "metrics", "hn", "semistable"):
        q = mv.add_parser(verb)
        q.add_argument("input")
        if verb == "hn":
            q.add_argument("--horizon", type=int, default=32)
            out_opts(q, True)
        else:
            out_opts(q)
    mp.set_defaults(func=cmd_module)

    dp = sub.add_parser("descent", help="run the descent algorithm")
    dp.add_argument("input")
    dp.add_argument("--horizon", type=int, default=32)
    dp.add_argument("--trace", help="write the full trace as JSON")
    out_opts(dp)
    dp.set_defaults(func=cmd_descent)

    np_ = sub.add_parser("newton", help="Newton and Hodge bounds")
    nv = np_.add_subparsers(dest="verb", required=True, parser_class=_Parser)
    q = nv.add_parser("flip")
    q.add_argument("input")
    out_opts(q, True)
    q = nv.add_parser("check")
    q.add_argument("input", help="HN polygon JSON")
    q.add_argument("--slopes", help="slope data JSON")
    q.add_argument("--dim", type=_rational)
    q.add_argument("--ht", type=_rational)
    out_opts(q)
    np_.set_defaults(func=cmd_newton)

    sp = sub.add_parser("strata", help="stratum labels")
    sv = sp.add_subparsers(dest="verb", required=True, parser_class=_Parser)
    q = sv.add_parser("enum")
    q.add_argument("-n", type=int, required=True)
    q.add_argument("-d", type=int, required=True)
    out_opts(q)
    q = sv.add_parser("dim")
    q.add_argument("-n", type=int, required=True)
    q.add_argument("-d", type=int, required=True)
    q.add_argument("--nu", type=_rational_list)
    out_opts(q)
    q = sv.add_parser("levi")
    q.add_argument("--nu", type=_rational_list)
    out_opts(q)
    q = sv.add_parser("hecke")
    q.add_argument("--height", type=int, required=True)
    q.add_argument("--bound", type=int, required=True)
    q.add_argument("--window", action="store_true")
    out_opts(q)
    q = sv.add_parser("classify")
    q.add_argument("input")
    q.add_argument("--claimed", help="slope data JSON")
    q.add_argument("--horizon", type=int, default=32)
    out_opts(q)
    sp.set_defaults(func=cmd_strata)

    tp = sub.add_parser("selftest", help="replay the bundled corpus")
    tp.add_argument("--corpus", help="corpus directory (default: bundled)")
    out_opts(tp)
    tp.set_defaults(func=cmd_selftest)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    guard = os.environ.get("HN_BITS_GUARD")
    if guard and not guard.isdigit():
        print(f"hn: error: HN_BITS_GUARD must be a non-negative integer, got {guard!r}", file=sys.stderr)
        return INVALID
    try:
        return args.func(args)
    except ResourceBoundError as e:
        print(f"hn: resource bound: {e}", file=sys.stderr)
        return RESOURCE
    except InvalidInputError as e:
        print(f"hn: invalid input: {e}", file=sys.stderr)
        return INVALID
    except HNError as e:
        print(f"hn: error: {e}", file=sys.stderr)
        return INVALID


if __name__ == "__main__":
    sys.exit(main())
