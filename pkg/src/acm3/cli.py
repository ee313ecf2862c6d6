"""``verify`` command: run identity checks on a model and print a report.

Exit status: 0 if every check passes, 1 if any fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import sys
import time

from . import checks as K
from . import jets
from . import models as M
from .report import VerificationReport, to_json, to_text

MANIFOLDS = ("flat3cos", "sphere3sas", "flat3cos-scrambled")


def build_model(name: str, n: int, seed: int) -> M.Model:
    if name == "flat3cos":
        return M.make_flat(n)
    if name == "sphere3sas":
        return M.make_sphere(n)
    if name == "flat3cos-scrambled":
        return M.scramble(M.make_flat(n), seed)
    raise ValueError(f"unknown manifold {name!r}")


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {text}")
    return v


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def _tol(text: str) -> float:
    v = float(text)
    if not v >= 0.0:
        raise argparse.ArgumentTypeError("tolerance must be non-negative")
    return v


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="verify", description="Verify almost contact metric 3-structure identities.")
    ap.add_argument("--manifold", choices=MANIFOLDS, default="flat3cos")
    ap.add_argument("--n", type=_positive_int, default=1)
    ap.add_argument("--points", type=_positive_int, default=32)
    ap.add_argument("--seed", type=_seed, default=42)
    ap.add_argument("--tol-flat", type=_tol, default=1e-9)
    ap.add_argument("--tol-curved", type=_tol, default=1e-7)
    ap.add_argument("--order", type=int, choices=(2, 3), default=3)
    ap.add_argument("--suite", choices=("all",) + K.SUITES, default="all")
    ap.add_argument("--report", choices=("text", "json"), default="text")
    ap.add_argument("--out", default=None, help="write the report here instead of stdout")
    ap.add_argument("--ode-steps", type=_positive_int, default=64)
    ap.add_argument("--list-checks", action="store_true", help="print the check catalog and exit")
    ap.add_argument("--no-timing", action="store_true", help="report elapsed_ms as 0 for byte-identical output")
    return ap


def list_checks() -> str:
    return "".join(f"{c.id}\t{c.suite}\t{c.paper_ref}\n" for c in K.catalog())


def run(args: argparse.Namespace) -> tuple:
    """Execute the selected suite; returns (exit code, report)."""
    start = time.perf_counter()
    model = build_model(args.manifold, args.n, args.seed)
    points = model.sample(args.points, args.seed)
    ctx = K.Context(model, points, args.seed, args.tol_flat, args.tol_curved, args.ode_steps)
    rep = VerificationReport(args.manifold, args.n, args.seed, args.order, model.conventions)
    with jets.limit_order(args.order):
        for c in K.select(model, args.suite):
            rep.checks.append(K.run_check(c, ctx))
    rep.elapsed_ms = 0.0 if args.no_timing else (time.perf_counter() - start) * 1000.0
    return (0 if rep.all_passed else 1), rep


def main(argv: list | None = None) -> int:
    ap = make_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    if args.list_checks:
        sys.stdout.write(list_checks())
        return 0
    code, rep = run(args)
    text = to_json(rep) if args.report == "json" else to_text(rep)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
