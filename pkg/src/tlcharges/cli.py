"""tlcharges command line.

Exit status: 0 when every check passes, 1 on a mismatch, 2 on bad usage.
Reports go to stdout as JSON; errors go to stderr as JSON.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence

from . import export
from .charges import build_charge, triangle_check, delta
from .fixtures import KS, SERIES, diff, load_fixture
from .matrep import (ChainParams, ChainTooShort, Twist, TwistError, parse_scalar, charge_matrix,
                     charge_operator, commutator_norm, operator_commutator_residual, tl_hamiltonian)
from .oracles import a_series, boost_series, transfer_term
from .verify import check_identities, check_reachable, commutator_density

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE = 0, 1, 2
DENSE_LIMIT = 12


class UsageError(Exception):
    pass


def thread_cap() -> int:
    raw = os.environ.get("TLCHARGES_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"TLCHARGES_THREADS must be an integer, got {raw!r}") from None
    return max(1, n)


def parallel_map(fn: Callable, items: Iterable) -> list:
    """Map in worker processes when TLCHARGES_THREADS > 1, else serially."""
    items = list(items)
    workers = min(thread_cap(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def emit(report: dict) -> None:
    json.dump(report, sys.stdout, indent=2, default=str)
    sys.stdout.write("\n")


# ---- subcommands -----------------------------------------------------------

def cmd_gen(args) -> int:
    text = export.render(build_charge(args.k), args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify_symbolic(args) -> int:
    start = time.perf_counter()
    comm = commutator_density(args.k)
    report = {
        "k": args.k,
        "charge_terms": len(build_charge(args.k)),
        "commutator_terms": len(comm),
        "reachable": len(comm.reachable),
        "residual": [{"word": w, "coeff": str(c)} for w, c in comm.word_terms()],
    }
    ok = not comm
    if args.reachable:
        rr = check_reachable(args.k)
        report["reachable_check"] = {"checked": rr.checked, "tl1_words": rr.tl1_words,
                                     "nonzero": rr.nonzero, "disagreements": rr.disagreements}
        ok = ok and rr.ok
    report["elapsed"] = round(time.perf_counter() - start, 3)
    report["ok"] = ok
    emit(report)
    return EXIT_OK if ok else EXIT_MISMATCH


def _chain_params(args) -> ChainParams:
    q = parse_scalar(args.q)
    twist = Twist.parse(args.twist)
    params = ChainParams(args.L, q, twist)
    if args.exact and not params.exact:
        raise UsageError("--exact needs a rational q and a rational twist")
    if not args.exact and params.exact:
        a, b, c, d = (complex(x) for x in twist.entries)
        params = ChainParams(args.L, complex(q), Twist(twist.kind, (a, b, c, d)))
    return params


def cmd_verify_numeric(args) -> int:
    params = _chain_params(args)
    start = time.perf_counter()
    if params.exact or params.L <= DENSE_LIMIT:
        ham = tl_hamiltonian(params)
        charge = charge_matrix(args.k, params)
        absolute = commutator_norm(charge, ham)
        scale = charge.norm() * ham.norm() or 1.0
        relative = absolute / scale
        method = "exact" if params.exact else "dense"
    else:
        ham_op = charge_operator(1, params)
        relative = operator_commutator_residual(charge_operator(args.k, params), ham_op)
        absolute = None
        method = "matrix-free"
    ok = absolute == 0.0 if params.exact else relative < args.tol
    emit({
        "k": args.k, "L": params.L, "q": str(params.q), "twist": args.twist, "method": method,
        "commutator_norm": absolute, "relative": relative,
        "elapsed": round(time.perf_counter() - start, 3), "ok": ok,
    })
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_oracle(args) -> int:
    if args.series == "transfer":
        density = transfer_term(args.k)
    elif args.series == "boost":
        density = boost_series(args.k)[-1]
    else:
        density = a_series(args.k)
    sys.stdout.write(export.render(density, args.format))
    return EXIT_OK


def cmd_props_triangle(args) -> int:
    rows = []
    for k in range(1, args.max_k + 1):
        deltas = all(not delta(k, w, t) for w in range(2, k + 2) for t in range(1, w))
        rows.append({"k": k, "triangle": triangle_check(k), "delta_vanishes": deltas})
    ok = all(r["triangle"] and r["delta_vanishes"] for r in rows)
    emit({"max_k": args.max_k, "rows": rows, "ok": ok})
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_props_identities(args) -> int:
    start = time.perf_counter()
    report = check_identities(args.k).as_dict()
    report["elapsed"] = round(time.perf_counter() - start, 3)
    emit(report)
    return EXIT_OK if report["ok"] else EXIT_MISMATCH


def _series_density(job: tuple[str, int]):
    series, k = job
    if series == "Q":
        computed = build_charge(k)
    elif series == "A":
        computed = a_series(k)
    else:
        computed = boost_series(k)[-1]
    return diff(load_fixture(series, k), computed).as_dict()


def cmd_selftest(args) -> int:
    start = time.perf_counter()
    jobs = [(s, k) for s in SERIES for k in KS]
    results = parallel_map(_series_density, jobs)
    ok = all(r["ok"] for r in results)
    emit({"fixtures": results, "ok": ok, "elapsed": round(time.perf_counter() - start, 3)})
    return EXIT_OK if ok else EXIT_MISMATCH


# ---- parser ----------------------------------------------------------------

def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tlcharges", description="Local conserved charges of the XXZ chain in TL form.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("gen", help="emit the charge density Q_k")
    gen.add_argument("--k", type=_positive, required=True)
    gen.add_argument("--format", choices=export.FORMATS, default="json")
    gen.add_argument("--out")
    gen.set_defaults(func=cmd_gen)

    verify = sub.add_parser("verify", help="check [Q_k, H] = 0")
    vsub = verify.add_subparsers(dest="mode", required=True, parser_class=_Parser)
    sym = vsub.add_parser("symbolic", help="commutator density in the diagram algebra")
    sym.add_argument("--k", type=_positive, required=True)
    sym.add_argument("--reachable", action="store_true",
                     help="also compare the direct and environment-code sums on every reachable word")
    sym.set_defaults(func=cmd_verify_symbolic)
    num = vsub.add_parser("numeric", help="commutator of spin-chain matrices")
    num.add_argument("--k", type=_positive, required=True)
    num.add_argument("--L", type=_positive, required=True)
    num.add_argument("--q", required=True, help="rational 'p/r' or complex 're,im'")
    num.add_argument("--twist", default="none", help="none | diag:X | exp:f | general:a,b,c,d")
    num.add_argument("--exact", action="store_true")
    num.add_argument("--tol", type=float, default=1e-10)
    num.set_defaults(func=cmd_verify_numeric)

    oracle = sub.add_parser("oracle", help="independent constructions")
    oracle.add_argument("series", choices=("transfer", "boost", "aseries"))
    oracle.add_argument("--k", type=_positive, required=True)
    oracle.add_argument("--format", choices=export.FORMATS, default="json")
    oracle.set_defaults(func=cmd_oracle)

    props = sub.add_parser("props", help="structural properties")
    psub = props.add_subparsers(dest="prop", required=True, parser_class=_Parser)
    tri = psub.add_parser("triangle")
    tri.add_argument("--max-k", type=_positive, default=12)
    tri.set_defaults(func=cmd_props_triangle)
    ident = psub.add_parser("identities")
    ident.add_argument("--k", type=int, required=True)
    ident.set_defaults(func=cmd_props_identities)

    selftest = sub.add_parser("selftest", help="regenerate every golden table and diff")
    selftest.set_defaults(func=cmd_selftest)
    return parser


def _fail(kind: str, message: str) -> int:
    json.dump({"error": kind, "message": message}, sys.stderr)
    sys.stderr.write("\n")
    return EXIT_USAGE


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        return _fail("usage", str(exc))
    except (ChainTooShort, TwistError, ValueError) as exc:
        return _fail(type(exc).__name__, str(exc))


if __name__ == "__main__":
    sys.exit(main())
