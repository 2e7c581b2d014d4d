"""Command-line front end.

Subcommands: ``eval`` (one truncated series value), ``coeffs``
(elliptic-expansion extraction to JSON), and ``check`` with the suites
``identities``, ``operators``, ``duality``, and ``convergence``.

Exit codes: 0 success, 1 configuration error, 2 numeric/pole error,
3 check failure (reports are still written).
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
import time

from mpmath import mp, mpc, mpf, workprec

from .expansions import ExtractionParams, extract_expansion
from .numeric import NumericError, PoleCollisionError
from .operators import FieldSample
from .series import SeriesKind, SeriesSpec, TruncationParams, eval_series, set_threads
from .verify import (
    check_identity_suite,
    check_operator_theorem,
    convergence_study,
    duality_suite,
    reports_to_csv,
    reports_to_json_lines,
)

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERIC = 2
EXIT_CHECK_FAILED = 3

_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"


class ConfigError(ValueError):
    pass


def parse_complex(text: str) -> mpc:
    """Parse 'x+yi' with decimal components at full working precision."""
    s = text.strip().replace(" ", "")
    if s.endswith(("i", "j")):
        body = s[:-1]
        m = re.match(rf"^(?P<re>[+-]?{_NUM})(?P<im>[+-](?:{_NUM})?)$", body)
        if m:
            imtxt = m.group("im")
            if imtxt in ("+", "-"):
                imtxt += "1"
            return mpc(mpf(m.group("re")), mpf(imtxt))
        if body in ("", "+", "-"):
            body += "1"
        try:
            return mpc(0, mpf(body))
        except ValueError as exc:
            raise ConfigError(f"cannot parse complex number {text!r}") from exc
    try:
        return mpc(mpf(s), 0)
    except ValueError as exc:
        raise ConfigError(f"cannot parse complex number {text!r}") from exc


class _Parser(argparse.ArgumentParser):
    """argparse variant whose usage errors exit with the config code."""

    def error(self, message):
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    p = _Parser(prog="polar-maass", description=__doc__)
    p.add_argument("--precision", type=int, default=None, help="working precision in bits")
    p.add_argument("--threads", type=int, default=0, help="kernel thread cap (0 = auto)")
    p.add_argument("--output", type=str, default=None, help="write JSON(-lines) report here")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    sub = p.add_subparsers(dest="command", required=True)

    def trunc_args(q):
        q.add_argument("--Ncd", type=int, default=120)
        q.add_argument("--Nt", type=int, default=None, help="defaults to --Ncd")

    q = sub.add_parser("eval", help="evaluate one truncated series value")
    q.add_argument("--kind", choices=("psi", "p"), required=True)
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--base", type=str, required=True)
    q.add_argument("--z", type=str, required=True)
    trunc_args(q)

    q = sub.add_parser("coeffs", help="extract elliptic-expansion coefficients")
    q.add_argument("--kind", choices=("psi", "p"), required=True)
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--base", type=str, required=True)
    q.add_argument("--rho", type=str, required=True)
    q.add_argument("--radius", type=float, default=0.2)
    q.add_argument("--radius2", type=float, default=0.35)
    q.add_argument("--Mquad", type=int, default=64)
    q.add_argument("--nmin", type=int, default=-4)
    q.add_argument("--nmax", type=int, default=4)
    trunc_args(q)

    q = sub.add_parser("check", help="run a verification suite")
    csub = q.add_subparsers(dest="suite", required=True)

    c = csub.add_parser("identities", help="pointwise special-function identities")
    c.add_argument("--seed", type=int, default=1)
    c.add_argument("--count", type=int, default=100)

    c = csub.add_parser("operators", help="series-level operator identities")
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--base", type=str, required=True)
    c.add_argument("--z", type=str, action="append", required=True, help="repeatable sample point")
    c.add_argument("--tol", type=float, default=1e-3)
    trunc_args(c)

    c = csub.add_parser("duality", help="elliptic coefficient duality")
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--m", type=int, required=True)
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--z1", type=str, required=True)
    c.add_argument("--z2", type=str, required=True)
    c.add_argument("--radius", type=str, default="auto")
    c.add_argument("--radius2", type=str, default="auto")
    c.add_argument("--Mquad", type=int, default=64)
    c.add_argument("--tol", type=float, default=1e-3)
    trunc_args(c)

    c = csub.add_parser("convergence", help="truncation-size study")
    c.add_argument("--target", choices=("psi", "p", "duality", "operator"), required=True)
    c.add_argument("--Nlist", type=str, default="40,80,160")
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--n", type=int, default=0)
    c.add_argument("--m", type=int, default=0)
    c.add_argument("--base", type=str, default=None)
    c.add_argument("--z", type=str, default=None)
    c.add_argument("--z1", type=str, default=None)
    c.add_argument("--z2", type=str, default=None)
    return p


def _emit(payload: dict, args) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2)
    print(text)
    if args.output and args.format == "json":
        with open(args.output, "w") as fh:
            fh.write(text + "\n")


def _emit_reports(reports, args) -> None:
    for r in reports:
        status = "pass" if r.passed else "FAIL"
        print(f"[{status}] {r.check_id} rel_err={r.rel_err:.3e} tol={r.tolerance:.1e}")
    if args.output:
        with open(args.output, "w") as fh:
            if args.format == "csv":
                fh.write(reports_to_csv(reports) + "\n")
            else:
                fh.write(reports_to_json_lines(reports, canonical=True) + "\n")


def _trunc(args, precision_bits: int) -> TruncationParams:
    n_t = args.Nt if args.Nt is not None else args.Ncd
    return TruncationParams(n_cd=args.Ncd, n_t=n_t, precision_bits=precision_bits)


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else EXIT_OK

    precision_bits = args.precision
    env = os.environ.get("POLAR_MAASS_PRECISION")
    if precision_bits is None and env:
        try:
            precision_bits = int(env)
        except ValueError:
            print(f"invalid POLAR_MAASS_PRECISION={env!r}", file=sys.stderr)
            return EXIT_CONFIG
    series_bits = 53

    set_threads(args.threads)
    try:
        with workprec(precision_bits or 128):
            if args.command == "eval":
                t0 = time.time()
                spec = SeriesSpec(
                    args.k,
                    args.n,
                    parse_complex(args.base),
                    SeriesKind.PSI if args.kind == "psi" else SeriesKind.P,
                )
                res = eval_series(spec, [parse_complex(args.z)], _trunc(args, precision_bits or series_bits))[0]
                _emit(
                    {
                        "schema": SCHEMA_VERSION,
                        "value": [float(res.value.real), float(res.value.imag)],
                        "tail": float(res.tail_estimate),
                        "runtime_ms": int((time.time() - t0) * 1000),
                    },
                    args,
                )
                return EXIT_OK

            if args.command == "coeffs":
                if not 0 < args.radius < 1 or not 0 < args.radius2 < 1:
                    raise ConfigError("radii must lie in (0, 1)")
                spec = SeriesSpec(
                    args.k,
                    args.n,
                    parse_complex(args.base),
                    SeriesKind.PSI if args.kind == "psi" else SeriesKind.P,
                )
                trunc = _trunc(args, precision_bits or series_bits)

                def eval_many(points):
                    return [r.value for r in eval_series(spec, points, trunc)]

                field = FieldSample(lambda z: eval_many([z])[0], spec.weight, eval_many)
                exp = extract_expansion(
                    field,
                    parse_complex(args.rho),
                    spec.weight,
                    range(args.nmin, args.nmax + 1),
                    ExtractionParams(r1=args.radius, r2=args.radius2, m_quad=args.Mquad),
                )
                text = exp.to_json()
                print(text)
                if args.output:
                    with open(args.output, "w") as fh:
                        fh.write(text + "\n")
                return EXIT_OK

            # check suites
            if args.suite == "identities":
                reports = check_identity_suite(
                    args.seed, args.count, precision_bits or 128
                )
            elif args.suite == "operators":
                reports = check_operator_theorem(
                    args.k,
                    args.n,
                    parse_complex(args.base),
                    [parse_complex(zt) for zt in args.z],
                    _trunc(args, series_bits),
                    tol=args.tol,
                )
            elif args.suite == "duality":
                quad = None
                if args.radius != "auto" and args.radius2 != "auto":
                    quad = ExtractionParams(
                        r1=float(args.radius),
                        r2=float(args.radius2),
                        m_quad=args.Mquad,
                        noise_factor=0.0,
                    )
                reports = duality_suite(
                    args.k,
                    [args.m],
                    [args.n],
                    parse_complex(args.z1),
                    parse_complex(args.z2),
                    _trunc(args, series_bits),
                    quad,
                    tol=args.tol,
                )
            elif args.suite == "convergence":
                n_list = [int(x) for x in args.Nlist.split(",") if x]
                spec_args = {"k": args.k, "n": args.n, "m": args.m}
                for key in ("base", "z", "z1", "z2"):
                    val = getattr(args, key)
                    if val is not None:
                        spec_args[key] = parse_complex(val)
                rows = convergence_study(args.target, spec_args, n_list)
                payload = {
                    "schema": SCHEMA_VERSION,
                    "target": args.target,
                    "rows": [
                        {
                            "N": N,
                            "value": [float(mpc(v).real), float(mpc(v).imag)],
                            "tail": t,
                        }
                        for N, v, t in rows
                    ],
                }
                _emit(payload, args)
                return EXIT_OK
            else:  # pragma: no cover
                raise ConfigError(f"unknown suite {args.suite!r}")

            _emit_reports(reports, args)
            return EXIT_OK if all(r.passed for r in reports) else EXIT_CHECK_FAILED

    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PoleCollisionError, NumericError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
