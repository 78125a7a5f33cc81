"""Command line front end. Exit codes: 0 ok, 1 violations found, 2 usage or data error."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction
from importlib import resources

from . import cval, modpoly, quatorder, shiftval, velu

EXIT_OK, EXIT_VIOLATIONS, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _read(path):
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def _write(path, text):
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from exc


def load_phi(level=None, path=None) -> modpoly.BivarPoly:
    """From a file if given, else computed, else a shipped or MODPOLY_DATA_DIR file."""
    if path:
        return modpoly.parse_modpoly_file(_read(path), level)
    if level is None:
        raise UsageError("give --level or --in")
    name = f"phi_{level}.txt"
    override = os.environ.get("MODPOLY_DATA_DIR")
    if override and os.path.exists(os.path.join(override, name)):
        return modpoly.parse_modpoly_file(_read(os.path.join(override, name)), level)
    try:
        return modpoly.compute_phi(level)
    except ValueError:
        pass
    shipped = resources.files("phidiv").joinpath("data", name)
    if shipped.is_file():
        return modpoly.parse_modpoly_file(shipped.read_text(), level)
    raise UsageError(f"Phi_{level} is neither computable here nor available as {name}")


class Out:
    def __init__(self, fmt, stream=None):
        self.fmt = fmt
        self.stream = stream or sys.stdout

    def emit(self, text, **record):
        if self.fmt == "json":
            print(json.dumps(record, default=str, sort_keys=True), file=self.stream)
        else:
            print(text, file=self.stream)


# ---------------------------------------------------------------------------
# subcommands


def cmd_compute(args, out):
    P = modpoly.compute_phi(args.level, ceiling=args.ceiling, prec=args.prec)
    text = modpoly.serialize_modpoly(P)
    if args.out:
        _write(args.out, text)
        out.emit(f"wrote Phi_{P.n} ({len(P)} terms) to {args.out}", level=P.n, terms=len(P),
                 path=args.out)
    else:
        out.stream.write(text)
    return EXIT_OK


def cmd_ingest(args, out):
    P = modpoly.parse_modpoly_file(_read(args.file), args.level)
    try:
        P.check()
    except ValueError as exc:
        raise UsageError(f"{args.file}: {exc}") from exc
    out.emit(f"Phi_{P.n}: {len(P)} terms, degree {P.degree_x()}, symmetric",
             level=P.n, terms=len(P), degree=P.degree_x())
    return EXIT_OK


def _emit_reports(reports, out):
    bad = 0
    for r in reports:
        out.emit(r.summary(), **r.to_dict())
        bad += len(r.violations)
    return EXIT_VIOLATIONS if bad else EXIT_OK


def cmd_verify(args, out):
    P = load_phi(args.level, args.infile)
    if args.what == "main":
        if P.n % 2 == 0:
            raise UsageError("verify main needs an odd level")
        return _emit_reports(shiftval.verify_coefficient_bounds(P), out)
    if args.D is None:
        raise UsageError("verify singular needs --D")
    try:
        rec = shiftval.singular_record(args.D)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from exc
    return _emit_reports(shiftval.verify_singular(P, rec), out)


def cmd_cval(args, out):
    P = load_phi(args.level, args.infile)
    C = cval.c_val_modp(P, args.J, args.p)
    out.emit(f"C_{args.J}({P.n},{args.p}) = {C}", N=P.n, J=args.J, p=args.p, C=C)
    return EXIT_OK


def cmd_cval_scan(args, out):
    P = load_phi(args.level, args.infile)
    res = cval.ss_prime_scan(P, args.J, args.D, args.pmax)
    for p, c in res.hits:
        out.emit(f"p={p} C_{args.J}({P.n},{p}) = {c}", p=p, C=c)
    out.emit(f"char0 = {res.char0}, bound |D|N = {res.bound}, violations = {len(res.violations)}",
             char0=res.char0, bound=res.bound, violations=res.violations)
    return EXIT_VIOLATIONS if res.violations else EXIT_OK


def cmd_theta(args, out):
    order = quatorder.order_registry(args.p)
    series = quatorder.theta_series(order, args.upto)
    for m, c in enumerate(series):
        out.emit(f"{m} {c}", m=m, count=c)
    return EXIT_OK


def _c_norm(value):
    if value in (quatorder.DOUBLE, quatorder.CLASSICAL, quatorder.CALIBRATED):
        return value
    try:
        return Fraction(value)
    except ValueError as exc:
        raise UsageError(f"bad --c-norm {value!r}") from exc


def cmd_cyclic(args, out):
    order = quatorder.order_registry(args.p)
    c_norm = _c_norm(args.c_norm)
    calibration = []
    if c_norm == quatorder.CALIBRATED:
        calibration = quatorder.calibrate().lines()
        if out.fmt == "text":
            for line in calibration:
                out.emit(line)
    value = quatorder.cyclic_count(order, args.level, c_norm)
    out.emit(f"cyclic_count(O_{args.p}, {args.level}) = {value}",
             p=args.p, N=args.level, count=str(value), calibration=calibration)
    return EXIT_OK


def cmd_nv(args, out):
    fixtures = velu.load_fixtures()
    if args.fixture not in fixtures:
        raise UsageError(f"unknown fixture {args.fixture!r}; have {', '.join(sorted(fixtures))}")
    curve = fixtures[args.fixture].curve
    try:
        N = velu.representative(curve.ring.p, args.nclass)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    res = velu.g_valuation(curve, N)
    out.emit(f"{args.fixture} N={N}: n_v = {res.n_v}, n_p = {res.n_p}",
             fixture=args.fixture, N=N, n_v=res.n_v, n_p=str(res.n_p))
    return EXIT_VIOLATIONS if res.n_v < 0 else EXIT_OK


def cmd_compress(args, out):
    P = load_phi(args.level, args.infile)
    C = shiftval.compress(P, args.version)
    _write(args.out, C.dumps())
    naive, packed, saving = shiftval.digit_stats(P, C)
    out.emit(f"wrote {args.out}: {naive} → {packed} digits", naive=naive, packed=packed)
    return EXIT_OK


def cmd_decompress(args, out):
    try:
        C = shiftval.CompressedPoly.loads(_read(args.infile))
    except ValueError as exc:
        raise UsageError(f"{args.infile}: {exc}") from exc
    P = shiftval.decompress(C)
    _write(args.out, modpoly.serialize_modpoly(P))
    out.emit(f"wrote Phi_{P.n} to {args.out}", level=P.n, path=args.out)
    return EXIT_OK


def cmd_stats(args, out):
    P = load_phi(args.level, args.infile)
    naive, packed, saving = shiftval.digit_stats(P, shiftval.compress(P, args.version))
    out.emit(f"{naive} → {packed} ({saving:.0%})", naive=naive, packed=packed,
             saving=round(saving, 4))
    return EXIT_OK


def cmd_lambda(args, out):
    value = cval.lambda_N(args.level)
    line = f"lambda_{args.level} = {value:.6f}"
    record = {"N": args.level, "lambda": value}
    if args.check:
        res = cval.avg_bound_check(load_phi(args.level))
        if res.holds is None:
            line += f"; {res.note}"
        else:
            line += f"; {res.lhs:.3f} <= {res.rhs:.3f}: {res.holds}"
        record.update(lhs=res.lhs, rhs=res.rhs, holds=res.holds)
        out.emit(line, **record)
        return EXIT_VIOLATIONS if res.holds is False else EXIT_OK
    out.emit(line, **record)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(prog="phidiv", description=__doc__)
    ap.add_argument("--format", choices=("text", "json"), default="text")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def src(p, level_required=False):
        p.add_argument("--level", type=int, required=level_required)
        p.add_argument("--in", dest="infile")

    p = sub.add_parser("compute", help="compute Phi_L for a prime L")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--out")
    p.add_argument("--prec", type=int)
    p.add_argument("--ceiling", type=int, default=modpoly.DEFAULT_CEILING)
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("ingest", help="parse and validate a coefficient file")
    p.add_argument("file")
    p.add_argument("--level", type=int)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("verify", help="check coefficient valuation bounds")
    p.add_argument("what", choices=("main", "singular"))
    src(p)
    p.add_argument("--D", type=int)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("cval", help="C_J(N,p)")
    src(p)
    p.add_argument("--J", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.set_defaults(func=cmd_cval)

    p = sub.add_parser("cval-scan", help="primes where C_J(N,p) exceeds C_J(N,0)")
    src(p)
    p.add_argument("--J", type=int, required=True)
    p.add_argument("--D", type=int, required=True)
    p.add_argument("--pmax", type=int, required=True)
    p.set_defaults(func=cmd_cval_scan)

    p = sub.add_parser("theta", help="theta series of the maximal order at p")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--upto", type=int, required=True)
    p.set_defaults(func=cmd_theta)

    p = sub.add_parser("cyclic", help="cyclic isogeny count from theta coefficients")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--c-norm", default=quatorder.CALIBRATED)
    p.set_defaults(func=cmd_cyclic)

    p = sub.add_parser("nv", help="valuation of g for a shipped curve fixture")
    p.add_argument("--fixture", required=True)
    p.add_argument("--nclass", type=int, required=True, help="residue of N mod 12")
    p.set_defaults(func=cmd_nv)

    p = sub.add_parser("compress")
    src(p)
    p.add_argument("--out", required=True)
    p.add_argument("--version", type=int, default=shiftval.FORMAT_VERSION)
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("decompress")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_decompress)

    p = sub.add_parser("stats", help="digit counts before and after compression")
    src(p)
    p.add_argument("--version", type=int, default=shiftval.FORMAT_VERSION)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("lambda", help="lambda_N and optionally the averaged bound")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--check", action="store_true")
    p.set_defaults(func=cmd_lambda)
    return ap


def run(argv=None, stream=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, Out(args.format, stream))
    except (UsageError, ValueError, KeyError) as exc:
        print(f"phidiv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
