"""Command line front end.

    artifact limit --type sl3 --nilpotent n.json
    artifact jordan --type C2 --samples 10
    artifact qcp --type sl3 --samples 100 --seed 7
    artifact qcp --type g2 --counterexample
    artifact goodfn --lambda 1 --delta 1 --check 50
    artifact count --poly -1,-2,1 --tmax 40 --tstep 5 --threads 2 --out results.csv
    artifact cp --n 3 --h 1 --reg 0.5254546821 --disc 49 --provenance "..."
    artifact psi-check --v0 3,1,-2 --samples 50
    artifact bench --poly -1,-2,1 --t 30 --threads 1,2

JSON goes to --out (default stdout, also "-").  Exit codes: 2 bad arguments,
3 missing or unreadable input, 4 an invariant failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
import time
from fractions import Fraction
from typing import Callable

from . import counting, good_functions, lie_core, limiting, regular_forms
from .lie_core import LieElement, algebra

DEFAULT_SEED = 20240917
EXIT_USAGE, EXIT_INPUT, EXIT_INVARIANT = 2, 3, 4


class InputError(Exception):
    pass


class InvariantError(Exception):
    pass


# ---------------------------------------------------------------- helpers

def root_map(x: LieElement) -> dict:
    """Coefficients keyed by root coordinates; the Cartan part under "cartan"."""
    alg = x.algebra
    fmt = (lambda c: lie_core.ex.fmt(c)) if x.exact else repr
    out = {}
    if any(x.coeffs[:alg.rank]):
        out["cartan"] = [fmt(c) for c in x.coeffs[:alg.rank]]
    for i in range(alg.rank, alg.dim):
        if x.coeffs[i]:
            out[",".join(map(str, alg.root_of_index[i]))] = fmt(x.coeffs[i])
    return out


def _read_json(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise InputError(f"{path} is not valid JSON: {e}") from e


def _elements(alg, doc) -> list[LieElement]:
    docs = doc if isinstance(doc, list) else [doc]
    out = []
    for d in docs:
        if not isinstance(d, dict):
            raise InputError("each element must be a JSON object")
        try:
            if "coeffs" in d:
                out.append(lie_core.from_json({"algebra": alg.type_tag, **d}))
            else:
                out.append(lie_core.from_root_map(alg, {k: v for k, v in d.items() if k != "algebra"}))
        except (ValueError, ZeroDivisionError) as e:
            raise InputError(str(e)) from e
    return out


def _algebra(tag: str):
    try:
        return algebra(tag)
    except (KeyError, ValueError) as e:
        raise InputError(f"unknown algebra type {tag!r}") from e


def _emit(args, text: str):
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True) + "\n"


# ---------------------------------------------------------------- self tests

def _suite_lie_core() -> list[tuple[str, Callable[[], bool]]]:
    def killing():
        return lie_core.killing_multiples(algebra("A2"))[0] == 6

    def jacobi():
        alg = algebra("C2")
        x, y, z = (alg.basis_element(i) for i in (2, 5, 7))
        br = lie_core.bracket
        return (br(x, br(y, z)) + br(y, br(z, x)) + br(z, br(x, y))).is_zero()

    def dims():
        return [algebra(t).dim for t in ("A1", "A2", "A3", "C2", "G2")] == [3, 8, 15, 10, 14]

    return [("killing multiple sl3", killing), ("jacobi C2", jacobi), ("dimensions", dims)]


def _suite_regular_forms():
    def kappas():
        return regular_forms.natural_triple(algebra("G2")).kappas == [5, 1]

    def jordan():
        rng = random.Random(1)
        alg = algebra("A2")
        for _ in range(5):
            cd = regular_forms.jordan_decompose(regular_forms.random_regular(alg, rng))
            if cd.reconstruction_error() > 1e-9 or not cd.omega_orthogonal_to_centralizer():
                return False
        return True

    def not_regular():
        alg = algebra("A2")
        try:
            regular_forms.jordan_decompose(lie_core.from_root_map(alg, {"1,0": "1", "1,1": "1"}))
        except regular_forms.NotRegularError:
            return True
        return False

    return _suite_lie_core() + [("principal kappas G2", kappas), ("jordan sl3", jordan),
                                ("non-regular rejected", not_regular)]


def _suite_limiting():
    def worked():
        alg = algebra("A2")
        n = lie_core.from_root_map(alg, {"1,0": "1", "0,1": "1", "1,1": "5"})
        res = limiting.classify(n, with_float_checks=False)
        want = [lie_core.from_root_map(alg, {"1,0": "1", "0,1": "1"}),
                lie_core.from_root_map(alg, {"1,1": "1"})]
        return limiting.same_span(res.subspace_basis, want) and res.is_quasi_centralizing

    def g2():
        return not limiting.classify(limiting.g2_counterexample(), False).is_quasi_centralizing

    return _suite_regular_forms() + [("sl3 worked example", worked), ("G2 counterexample", g2)]


def _suite_good():
    def cert():
        c = good_functions.certificate(1, 1)
        return c.is_valid() and abs(float(c.b) - 3 ** -1.5 / 4) < 1e-15

    def vdm():
        return good_functions.vandermonde_floor([0, 2, 4], 2).det == 16

    def sweep():
        return good_functions.good_suite(seed=3, functions=2, balls=4, points=20_000)["failed"] == 0

    return [("certificate (1,1)", cert), ("vandermonde", vdm), ("sublevel sweep", sweep)]


def _suite_counting():
    p = counting.DELTA49_POLY

    def comp():
        return counting.char_poly(counting.companion(p)) == (p.a2, p.a1, p.a0)

    def oracle():
        return counting.enumerate_count(p, 3) == counting.brute_force_count(p, 3)

    def threads():
        return counting.enumerate_count(p, 8, threads=1) == counting.enumerate_count(p, 8, threads=3)

    def cp():
        return counting.cp_report(counting.DELTA49)["rel_diff"] < 1e-12

    def psi():
        alg = algebra("A2")
        v0 = counting.trace_free_diagonal([3, 1, -2], alg)
        nu = lie_core.from_root_map(alg, {"1,0": "2", "0,1": "-1/3", "1,1": "5"})
        jc = counting.jacobian_check(nu, v0)
        return counting.psi_inverse(counting.psi_map(nu, v0), v0) == nu and \
            jc["unit_upper_triangular"] and jc["det_normalized"] == 1

    return [("companion char poly", comp), ("row solve vs brute force T=3", oracle),
            ("thread independence T=8", threads), ("c_p closed forms", cp), ("psi", psi)]


SUITES = {
    "limit": _suite_limiting, "qcp": _suite_limiting, "jordan": _suite_regular_forms,
    "goodfn": _suite_good, "count": _suite_counting, "cp": _suite_counting,
    "psi-check": _suite_counting, "bench": _suite_counting,
}


def run_selftest(args) -> int:
    results = []
    for name, fn in SUITES[args.command]():
        try:
            ok = bool(fn())
        except Exception as e:  # a crash is a failure, reported by name
            ok = False
            name = f"{name} ({type(e).__name__}: {e})"
        results.append({"check": name, "passed": ok})
    failed = sum(not r["passed"] for r in results)
    _emit(args, _dumps({"command": args.command, "passed": len(results) - failed,
                        "failed": failed, "checks": results}))
    return EXIT_INVARIANT if failed else 0


# ---------------------------------------------------------------- commands

def _samples(alg, args) -> list[LieElement]:
    if args.nilpotent:
        return _elements(alg, _read_json(args.nilpotent))
    rng = random.Random(args.seed)
    return [regular_forms.random_regular(alg, rng) for _ in range(args.samples)]


def cmd_limit(args) -> int:
    alg = _algebra(args.type)
    if not args.nilpotent:
        raise InputError("limit needs --nilpotent")
    lines = []
    for n in _elements(alg, _read_json(args.nilpotent)):
        try:
            res = limiting.classify(n, with_float_checks=False)
        except ValueError as e:
            raise InvariantError(str(e)) from e
        doc = res.to_json()
        doc["input"] = root_map(n)
        doc["basis"] = [root_map(v) for v in res.subspace_basis]
        lines.append(_dumps(doc))
    _emit(args, "".join(lines))
    return 0


def cmd_jordan(args) -> int:
    alg = _algebra(args.type)
    docs, bad = [], 0
    for n in _samples(alg, args):
        try:
            cd = regular_forms.jordan_decompose(n, args.backend)
        except regular_forms.NotRegularError as e:
            raise InvariantError(str(e)) from e
        err = cd.reconstruction_error()
        ok = err <= 1e-9 and cd.omega_orthogonal_to_centralizer()
        bad += not ok
        doc = cd.to_json()
        doc.update({"reconstruction_error_ok": err <= 1e-9,
                    "omega_orthogonal_to_centralizer": cd.omega_orthogonal_to_centralizer(),
                    "omega_heights": cd.omega_heights()})
        docs.append(doc)
    _emit(args, _dumps({"type": args.type, "elements": docs, "failures": bad}))
    return EXIT_INVARIANT if bad else 0


def cmd_qcp(args) -> int:
    alg = _algebra(args.type)
    if args.counterexample:
        try:
            n = limiting.g2_counterexample(alg)
        except ValueError as e:
            raise InputError(str(e)) from e
        res = limiting.classify(n, with_float_checks=False)
        regular = not regular_forms.vanishing_simple_roots(n)
        _emit(args, _dumps({"type": args.type, "qcp": res.is_quasi_centralizing,
                            "regular": regular, "witness": root_map(n),
                            "leading_degree": res.leading_degree}))
        return 0 if regular and not res.is_quasi_centralizing else EXIT_INVARIANT
    failures, not_centralizing, not_abelian = 0, 0, 0
    for n in _samples(alg, args):
        res = limiting.classify(n, with_float_checks=False)
        failures += not res.is_quasi_centralizing
        not_centralizing += not res.is_centralizing
        not_abelian += not res.is_abelian
    _emit(args, _dumps({"type": args.type, "qcp": failures == 0, "failures": failures,
                        "samples": args.samples if not args.nilpotent else None,
                        "seed": args.seed, "height": alg.height,
                        "not_centralizing": not_centralizing, "not_abelian": not_abelian}))
    # a failure is only an invariant violation where the classification predicts success
    return EXIT_INVARIANT if failures and alg.height <= 3 else 0


def cmd_goodfn(args) -> int:
    try:
        cert = good_functions.certificate(args.Lambda, args.delta)
    except ValueError as e:
        raise InputError(str(e)) from e
    doc = {"certificate": cert.to_json(), "valid": cert.is_valid()}
    if args.check:
        s = good_functions.good_suite(seed=args.seed, functions=args.check, balls=args.balls,
                                      Lambda=args.Lambda, delta=args.delta)
        doc.update({"passed": s["passed"], "failed": s["failed"], "worst_ratio": s["worst_ratio"],
                    "seed": args.seed})
    _emit(args, _dumps(doc))
    return 0 if doc["valid"] and not doc.get("failed") else EXIT_INVARIANT


def _poly(text: str) -> counting.CubicPoly:
    try:
        return counting.CubicPoly.parse(text)
    except ValueError as e:
        raise InputError(f"bad --poly {text!r}: {e}") from e


def cmd_count(args) -> int:
    p = _poly(args.poly)
    if not (p.irreducible and p.split_over_R):
        raise InvariantError(f"{args.poly}: counting needs p irreducible over Q and split over R")
    tmin = args.tmin if args.tmin is not None else args.tstep
    radii = list(range(tmin, args.tmax + 1, args.tstep))
    if not radii or radii[-1] != args.tmax:
        radii.append(args.tmax)
    rows = counting.count_table(p, radii, args.threads, single_pass=args.single_pass)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["T", "N", "seconds"])
    for r in rows:
        w.writerow([r.T, r.N, "" if args.no_timing else f"{r.seconds:.3f}"])
    _emit(args, buf.getvalue())
    ns = [r.N for r in rows]
    return 0 if ns == sorted(ns) else EXIT_INVARIANT


def cmd_cp(args) -> int:
    try:
        inv = counting.FieldInvariants(args.disc, args.h, args.reg, args.provenance)
        doc = {"cp_general": counting.cp_value(args.n, inv)}
    except ValueError as e:
        raise InputError(str(e)) from e
    if args.n == 3:
        s = counting.cp_n3(inv)
        doc.update({"cp_n3": s, "rel_diff": abs(doc["cp_general"] - s) / s})
    else:
        doc.update({"cp_n3": None, "rel_diff": None})
    doc["provenance"] = inv.provenance
    _emit(args, _dumps(doc))
    return EXIT_INVARIANT if doc["rel_diff"] is not None and doc["rel_diff"] > 1e-12 else 0


def cmd_psi(args) -> int:
    alg = _algebra(args.type)
    try:
        diag = [Fraction(x) for x in args.v0.split(",")]
        v0 = counting.trace_free_diagonal(diag, alg)
    except (ValueError, ZeroDivisionError) as e:
        raise InputError(f"bad --v0: {e}") from e
    rng = random.Random(args.seed)
    pos = alg.positive_indices
    round_trip = jac = tri = 0
    try:
        for _ in range(args.samples):
            nu = LieElement(alg, tuple(Fraction(rng.randint(-9, 9), rng.randint(1, 9)) if i in pos
                                       else Fraction(0) for i in range(alg.dim)))
            round_trip += counting.psi_inverse(counting.psi_map(nu, v0), v0) == nu
            jc = counting.jacobian_check(nu, v0)
            jac += jc["det_normalized"] == 1
            tri += jc["unit_upper_triangular"]
    except counting.SingularPointError as e:
        raise InvariantError(str(e)) from e
    doc = {"type": args.type, "v0": [lie_core.ex.fmt(d) for d in diag], "samples": args.samples,
           "seed": args.seed, "round_trip": round_trip, "jacobian_one": jac,
           "unit_upper_triangular": tri, "raw_jacobian": lie_core.ex.fmt(jc["det_raw"])}
    if len(diag) == 3 and args.sandwich:
        import numpy as np
        doc["sandwich"] = [counting.star_ball_sandwich(np.diag([float(d) for d in diag]), t)
                           for t in args.sandwich]
    _emit(args, _dumps(doc))
    ok = round_trip == jac == tri == args.samples and all(s["holds"] for s in doc.get("sandwich", []))
    return 0 if ok else EXIT_INVARIANT


def cmd_bench(args) -> int:
    p = _poly(args.poly)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["T", "threads", "N", "seconds"])
    counts = set()
    for t in args.t:
        for k in args.threads:
            t0 = time.perf_counter()
            n = counting.enumerate_count(p, t, threads=k)
            counts.add((t, n))
            w.writerow([t, k, n, f"{time.perf_counter() - t0:.3f}"])
    _emit(args, buf.getvalue())
    return 0 if len(counts) == len(set(args.t)) else EXIT_INVARIANT


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="artifact", description="Regular nilpotents, limiting "
                                 "algebras and integer matrix counting.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, out=True):
        p.add_argument("--selftest", action="store_true", help="run the module checks only")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        if out:
            p.add_argument("--out", default="-", help="output path, '-' for stdout")
        return p

    p = common(sub.add_parser("limit", help="limiting Lie algebra of regular nilpotents"))
    p.add_argument("--type", default="sl3")
    p.add_argument("--nilpotent", help="JSON file: root map or list of root maps")
    p.set_defaults(func=cmd_limit)

    p = common(sub.add_parser("jordan", help="Jordan normal form data"))
    p.add_argument("--type", default="sl3")
    p.add_argument("--nilpotent")
    p.add_argument("--samples", type=int, default=10)
    p.add_argument("--backend", choices=("float", "exact"), default="float")
    p.set_defaults(func=cmd_jordan)

    p = common(sub.add_parser("qcp", help="quasi-centralizing classification"))
    p.add_argument("--type", default="sl3")
    p.add_argument("--nilpotent")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--counterexample", action="store_true")
    p.set_defaults(func=cmd_qcp)

    p = common(sub.add_parser("goodfn", help="(C, alpha)-good certificate"))
    p.add_argument("--lambda", dest="Lambda", type=Fraction, default=Fraction(1))
    p.add_argument("--delta", type=Fraction, default=Fraction(1))
    p.add_argument("--check", type=int, default=0, help="number of random functions to test")
    p.add_argument("--balls", type=int, default=50)
    p.set_defaults(func=cmd_goodfn)

    p = common(sub.add_parser("count", help="N(T) table as CSV"))
    p.add_argument("--poly", default="-1,-2,1")
    p.add_argument("--tmax", type=int, default=20)
    p.add_argument("--tstep", type=int, default=5)
    p.add_argument("--tmin", type=int)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--single-pass", action="store_true",
                   help="one enumeration at tmax, every row read from it")
    p.add_argument("--no-timing", action="store_true", help="leave the seconds column empty")
    p.set_defaults(func=cmd_count)

    p = common(sub.add_parser("cp", help="leading constant c_p"))
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--h", type=int, default=counting.DELTA49.h)
    p.add_argument("--reg", type=float, default=counting.DELTA49.reg)
    p.add_argument("--disc", type=float, default=counting.DELTA49.disc)
    p.add_argument("--provenance", default=counting.DELTA49.provenance)
    p.set_defaults(func=cmd_cp)

    p = common(sub.add_parser("psi-check", help="change of variables checks"))
    p.add_argument("--type", default="sl3")
    p.add_argument("--v0", default="3,1,-2", help="diagonal entries")
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--sandwich", type=_int_list, default=[10, 20, 40])
    p.set_defaults(func=cmd_psi)

    p = common(sub.add_parser("bench", help="count timings per thread count"))
    p.add_argument("--poly", default="-1,-2,1")
    p.add_argument("--t", type=_int_list, default=[20])
    p.add_argument("--threads", type=_int_list, default=[1, 2])
    p.set_defaults(func=cmd_bench)
    return ap


def run(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else 0
    if getattr(args, "threads", None) is None and args.command == "count":
        args.threads = counting.default_threads()
    try:
        if args.selftest:
            return run_selftest(args)
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except InvariantError as e:
        print(f"invariant violated: {e}", file=sys.stderr)
        return EXIT_INVARIANT


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
