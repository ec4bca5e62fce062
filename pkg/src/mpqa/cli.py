"""Command-line interface.

Exit status: 0 success, 2 usage error, 3 inadmissible parameters (q <= 0),
4 numeric failure.  Data goes to stdout or ``--out``; diagnostics to stderr.
Nothing is written to stdout unless the command succeeds.
"""

from __future__ import annotations

import argparse
import io
import logging
import math
import sys

import numpy as np

from . import export
from .approximant import evaluate_approximant, solve_params
from .error_analysis import (
    DEFAULT_LAMBDA_RANGE,
    global_error,
    lambda_star,
    optimize_lambda,
    punctual_error,
    sweep_error_surface,
)
from .errors import DefectError, DomainError, MPQAError
from .fde import FdeConfig, verify
from .reference import bessel_i_series

logger = logging.getLogger("mpqa")

EXIT_OK, EXIT_USAGE, EXIT_INADMISSIBLE, EXIT_NUMERIC = 0, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mpqa", description="Quasi-rational approximation of I_nu and the half-order FDE.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("params", help="solve the six approximant parameters (JSON)")
    s.add_argument("--nu", type=float, required=True)
    s.add_argument("--lambda", dest="lam", type=float)

    s = sub.add_parser("eval", help="evaluate approximant and reference at one x")
    s.add_argument("--nu", type=float, required=True)
    s.add_argument("--x", type=float, required=True)
    s.add_argument("--lambda", dest="lam", type=float)

    s = sub.add_parser("error-curve", help="punctual error on a uniform grid")
    s.add_argument("--nu", type=float, required=True)
    s.add_argument("--lambda", dest="lam", type=float)
    s.add_argument("--a", type=float, default=0.0)
    s.add_argument("--b", type=float, default=50.0)
    s.add_argument("--points", type=int, default=2000)
    s.add_argument("--out")

    s = sub.add_parser("sweep", help="global error over a (nu, lambda) grid")
    for name in ("nu-min", "nu-max", "lambda-min", "lambda-max"):
        s.add_argument(f"--{name}", type=float, required=True)
    for name in ("nu-steps", "lambda-steps"):
        s.add_argument(f"--{name}", type=int, required=True)
    s.add_argument("--out")

    s = sub.add_parser("optimize", help="lambda minimizing the global error")
    s.add_argument("--nu", type=float, required=True)
    s.add_argument("--lambda-min", type=float, default=DEFAULT_LAMBDA_RANGE[0])
    s.add_argument("--lambda-max", type=float, default=DEFAULT_LAMBDA_RANGE[1])

    s = sub.add_parser("verify-fde", help="exact vs approximate FDE solution and Caputo residual")
    s.add_argument("--nu", type=float, required=True)
    s.add_argument("--lambda", dest="lam", type=float)
    s.add_argument("--a", type=float, default=0.0)
    s.add_argument("--b", type=float, default=50.0)
    s.add_argument("--quad-nodes", type=int, default=128)
    s.add_argument("--out")
    return p


def _require(cond: bool, flag: str, msg: str) -> None:
    if not cond:
        raise UsageError(f"argument {flag}: {msg}")


def _validate(args) -> None:
    for k, v in vars(args).items():
        if isinstance(v, float):
            flag = "--lambda" if k == "lam" else "--" + k.replace("_", "-")
            _require(math.isfinite(v), flag, "must be finite")
    cmd = args.command
    if cmd in ("params", "eval", "error-curve", "optimize"):
        _require(0.0 <= args.nu <= 1.0, "--nu", f"must lie in [0, 1], got {args.nu}")
    if cmd == "verify-fde":
        _require(0.5 <= args.nu <= 1.0, "--nu", f"must lie in [0.5, 1], got {args.nu}")
    if getattr(args, "lam", None) is not None:
        _require(args.lam > 0, "--lambda", f"must be positive, got {args.lam}")
    if cmd == "eval":
        _require(args.x >= 0, "--x", f"must be >= 0, got {args.x}")
    if cmd in ("error-curve", "verify-fde"):
        _require(args.a >= 0, "--a", f"must be >= 0, got {args.a}")
        _require(args.b > args.a, "--b", f"must exceed --a, got {args.b}")
    if cmd == "error-curve":
        _require(args.points >= 64, "--points", f"must be >= 64, got {args.points}")
    if cmd == "verify-fde":
        _require(args.quad_nodes >= 32, "--quad-nodes", f"must be >= 32, got {args.quad_nodes}")
    if cmd == "sweep":
        for flag, v in (("--nu-min", args.nu_min), ("--nu-max", args.nu_max)):
            _require(0.0 <= v <= 1.0, flag, f"must lie in [0, 1], got {v}")
        for flag, v in (("--lambda-min", args.lambda_min), ("--lambda-max", args.lambda_max)):
            _require(v > 0, flag, f"must be positive, got {v}")
        for flag, v in (("--nu-steps", args.nu_steps), ("--lambda-steps", args.lambda_steps)):
            _require(v >= 1, flag, f"must be >= 1, got {v}")
        _require(args.nu_max > args.nu_min or args.nu_steps == 1, "--nu-max", "must exceed --nu-min")
        _require(
            args.lambda_max > args.lambda_min or args.lambda_steps == 1,
            "--lambda-max", "must exceed --lambda-min",
        )
    if cmd == "optimize":
        _require(args.lambda_min > 0, "--lambda-min", f"must be positive, got {args.lambda_min}")
        _require(args.lambda_max > args.lambda_min, "--lambda-max", "must exceed --lambda-min")


def _lam(args) -> float:
    return args.lam if args.lam is not None else lambda_star(args.nu)


def _cmd_params(args, out):
    out.write(solve_params(_lam(args), args.nu).to_json() + "\n")


def _cmd_eval(args, out):
    p = solve_params(_lam(args), args.nu)
    approx = evaluate_approximant(p, args.x)
    ref = bessel_i_series(args.nu, args.x)
    err = punctual_error(args.nu, p, args.x)
    export._write(out, ("x", "approximant", "reference", "punctual_error"), [(args.x, approx, ref, err)])


def _cmd_error_curve(args, out):
    rep = global_error(args.nu, _lam(args), (args.a, args.b), args.points)
    logger.info("max_error=%s argmax_x=%s", export.fmt(rep.max_error), export.fmt(rep.argmax_x))
    export.write_error_curve(out, rep)


def _cmd_sweep(args, out):
    nus = np.linspace(args.nu_min, args.nu_max, args.nu_steps)
    lams = np.linspace(args.lambda_min, args.lambda_max, args.lambda_steps)
    surface = sweep_error_surface(nus, lams)
    for nu, lmin, emin in surface.per_nu_optima:
        logger.info("nu=%s lambda_min=%s error_min=%s", export.fmt(nu), export.fmt(lmin), export.fmt(emin))
    export.write_surface(out, surface)


def _cmd_optimize(args, out):
    lam, err = optimize_lambda(args.nu, (args.lambda_min, args.lambda_max))
    export.write_optima(out, [(args.nu, lam, err)])


def _cmd_verify_fde(args, out):
    cfg = FdeConfig(args.nu, lambda_a=args.lam, lambda_b=args.lam)
    records = verify(cfg, (args.a, args.b), quad_nodes=args.quad_nodes)
    worst = max(records, key=lambda r: r.product_rel_error)
    logger.info(
        "max product_rel_error=%s at x=%s; max caputo_residual=%s",
        export.fmt(worst.product_rel_error), export.fmt(worst.x),
        export.fmt(max(r.caputo_residual for r in records)),
    )
    export.write_fde_records(out, records)


COMMANDS = {
    "params": _cmd_params,
    "eval": _cmd_eval,
    "error-curve": _cmd_error_curve,
    "sweep": _cmd_sweep,
    "optimize": _cmd_optimize,
    "verify-fde": _cmd_verify_fde,
}


def run(argv=None, stdout=None, stderr=None) -> int:
    """Execute one command; returns the exit status."""
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr
    handler = logging.StreamHandler(stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    root = logging.getLogger("mpqa")
    root.addHandler(handler)
    root.setLevel(logging.INFO)
    try:
        try:
            args = _build_parser().parse_args(argv)
            _validate(args)
        except UsageError as exc:
            stderr.write(f"mpqa: error: {exc}\n")
            return EXIT_USAGE
        buf = io.StringIO()
        try:
            COMMANDS[args.command](args, buf)
        except DefectError as exc:
            stderr.write(f"mpqa: inadmissible parameters: {exc}\n")
            return EXIT_INADMISSIBLE
        except DomainError as exc:
            stderr.write(f"mpqa: error: {exc}\n")
            return EXIT_USAGE
        except (MPQAError, ArithmeticError, FloatingPointError) as exc:
            stderr.write(f"mpqa: numeric failure: {exc}\n")
            return EXIT_NUMERIC
        text = buf.getvalue()
        if getattr(args, "out", None):
            with open(args.out, "w", newline="") as fh:
                fh.write(text)
        else:
            stdout.write(text)
        return EXIT_OK
    finally:
        root.removeHandler(handler)


def main() -> None:
    sys.exit(run())
