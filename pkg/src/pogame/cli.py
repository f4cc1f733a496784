"""Command-line driver for the oblivious-game certification pipeline.

Exit status: 0 when every checked invariant holds within tolerance, 1 when
any certification check fails, 2 on usage errors (argparse's convention).
Note that for five or more settings the *correct* outcome is a
non-extremal POVM with uncertified randomness, so ``certify --n 5``
exits 0 precisely when certification fails in that expected way.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import quantum_opt as qo
from . import report as report_mod
from .report import CertificationReport, provenance, render_json

ENV_SEED = "POGAME_SEED"


def _default_seed() -> int:
    raw = os.environ.get(ENV_SEED)
    if raw is None:
        return 42
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(2)


def _odd_n(value: str) -> int:
    try:
        n = int(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"n must be an integer, got {value!r}") from exc
    if n % 2 == 0 or n < 3:
        raise argparse.ArgumentTypeError(f"n must be odd and >= 3, got {n}")
    return n


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pogame",
        description="Bounds, quantum optimum, self-testing and POVM/randomness "
        "certification for the n-input oblivious game.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_bounds = sub.add_parser("bounds", help="local and PNC bounds with witnesses")
    p_bounds.add_argument("--n", type=_odd_n, required=True)

    p_opt = sub.add_parser("optimize", help="see-saw value plus certificate")
    p_opt.add_argument("--n", type=_odd_n, required=True)
    p_opt.add_argument("--seed", type=int, default=None)
    p_opt.add_argument("--restarts", type=int, default=8)
    p_opt.add_argument("--tol", type=float, default=1e-9)

    p_self = sub.add_parser("selftest", help="swap-circuit relations and extractions")
    p_self.add_argument("--n", type=int, choices=(3, 5), required=True)
    p_self.add_argument("--perturb", type=float, default=0.0)

    p_cert = sub.add_parser("certify", help="POVM certification and randomness")
    p_cert.add_argument("--n", type=_odd_n, required=True)
    p_cert.add_argument("--alpha", type=float, default=1.0)

    p_rep = sub.add_parser("report", help="full pipeline report")
    p_rep.add_argument("--n", type=_odd_n, required=True)
    p_rep.add_argument("--seed", type=int, default=None)
    p_rep.add_argument("--restarts", type=int, default=8)
    p_rep.add_argument("--tol", type=float, default=1e-9)
    p_rep.add_argument("--alpha", type=float, default=1.0)
    p_rep.add_argument("--format", choices=("json", "csv", "text"), default="json")
    p_rep.add_argument("--out", default=None)

    return parser


def _emit_checks(checks: list, to_stderr: bool = False) -> bool:
    stream = sys.stderr if to_stderr else sys.stdout
    ok = True
    for name, passed, detail in checks:
        mark = "PASS" if passed else "FAIL"
        suffix = f"  ({detail})" if detail and not passed else ""
        print(f"[{mark}] {name}{suffix}", file=stream)
        ok = ok and passed
    return ok


def _print_section(payload: dict) -> None:
    print(render_json(payload))


def _cmd_bounds(args) -> int:
    section, checks = report_mod.bounds_section(args.n)
    _print_section({"n": args.n, "bounds": section})
    return 0 if _emit_checks(checks) else 1


def _cmd_optimize(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    section, checks, result = report_mod.optimization_section(args.n, seed, args.restarts, args.tol)
    cert = qo.sos_certificate(result.setup)
    payload = {
        "n": args.n,
        "optimization": section,
        "sos": {
            "omegas": [float(w) for w in cert.omegas],
            "residual_max": float(np.max(cert.residuals)),
            "gap": cert.gap,
            "bell_value": cert.bell_value,
            "delta_expectation": cert.delta_expectation,
        },
        "provenance": provenance(seed, args.tol, {"restarts": args.restarts}),
    }
    _print_section(payload)
    return 0 if _emit_checks(checks) else 1


def _cmd_selftest(args) -> int:
    section, checks = report_mod.selftest_section(args.n, perturb=args.perturb)
    _print_section({"n": args.n, "selftest": section})
    return 0 if _emit_checks(checks) else 1


def _cmd_certify(args) -> int:
    if args.alpha <= 0:
        print("alpha must be strictly positive", file=sys.stderr)
        return 2
    povm_sec, rand_sec, checks = report_mod.certify_section(args.n, args.alpha)
    _print_section({"n": args.n, "povm": povm_sec, "randomness": rand_sec})
    return 0 if _emit_checks(checks) else 1


def _cmd_report(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    report, checks = report_mod.build_report(
        args.n, seed=seed, restarts=args.restarts, tol=args.tol, alpha=args.alpha
    )
    rendered = {
        "json": CertificationReport.to_json,
        "csv": CertificationReport.to_csv,
        "text": CertificationReport.to_text,
    }[args.format](report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(rendered)
    else:
        sys.stdout.write(rendered)
    return 0 if _emit_checks(checks, to_stderr=True) else 1


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handler = {
        "bounds": _cmd_bounds,
        "optimize": _cmd_optimize,
        "selftest": _cmd_selftest,
        "certify": _cmd_certify,
        "report": _cmd_report,
    }[args.command]
    try:
        return handler(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
