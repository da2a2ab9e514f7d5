"""Command-line interface: JSON in, JSON out.

Exit codes: 0 success, 1 usage or input error, 2 the input polynomial was
seen to be negative where nonnegativity is required, 3 a floating-point stage
missed its accuracy target.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from .bounds import (
    compute_mu,
    first_estimate_pair,
    lambda_star,
    n_expl,
    second_estimate_pair,
    second_estimate_threshold,
    synthesis_N,
    build_perturbation,
)
from .certify import Certificate, certify_operator_image, verify_certificate
from .errors import HypothesisViolation, PrecisionError
from .mehler import KernelParams, apply_operator, decompose, infer_M, tail_polynomial
from .polycore import Polynomial, PolynomialError, coefficient_norm, parse, polynomial_to_dict
from .verify import (
    NECESSARY_ONLY,
    gram_from_certificate,
    psd_check,
    sample_nonneg,
    sample_points,
    sample_values,
    synthesis_residual,
)

EXIT_OK, EXIT_ERROR, EXIT_HYPOTHESIS, EXIT_PRECISION = 0, 1, 2, 3
DESK_SCALE_N = 12


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load_poly(args) -> Polynomial:
    return parse(_read(args.input))


def _poly_out(p: Polynomial, args) -> dict:
    mode = args.precision
    if p.domain == "float" and mode == "exact":
        mode = "float"
    return polynomial_to_dict(p, mode)


def _params(args) -> KernelParams:
    if args.N is None or args.lambda_sq is None:
        raise UsageError("--N and --lambda-sq are required")
    return KernelParams(args.N, args.lambda_sq)


def _meta(params: KernelParams, p: Polynomial) -> dict:
    return {"N": params.N, "lambda_sq": str(params.lambda_sq), "M": infer_M(p)}


# ---------------------------------------------------------------------------
# subcommands


def cmd_bound(args) -> dict:
    p = _load_poly(args)
    if p.is_zero():
        return {
            "check": "bound",
            "trivial": True,
            "message": "p = 0 is a sum of squares (the empty sum); no perturbation is needed",
            "n_expl": 0,
        }
    report = n_expl(p, args.epsilon, args.t, args.M).to_dict()
    report["check"] = "bound"
    report["trivial"] = False
    return report


def cmd_perturb(args) -> dict:
    p = _load_poly(args)
    N = args.N
    if N is None:
        if p.is_zero():
            N = 0
        else:
            N = n_expl(p, args.epsilon, args.t).n_expl
    if N > 10_000:
        raise UsageError(f"N = {N} is too large to expand; pass a smaller --N")
    pert = build_perturbation(p.nvars, N, args.t, args.epsilon)
    out = p.to_float() + pert.to_float() if pert.domain == "float" else p + pert
    result = _poly_out(out, args)
    result["meta"] = {"N": N, "epsilon": str(args.epsilon), "t": str(args.t)}
    return result


def cmd_apply_kernel(args) -> dict:
    p = _load_poly(args)
    params = _params(args)
    image = apply_operator(params, p)
    return {
        "total": _poly_out(image.total, args),
        "low_part": _poly_out(image.low_part, args),
        "tail": _poly_out(image.tail, args),
        "meta": _meta(params, p),
    }


def cmd_tail(args) -> dict:
    p = _load_poly(args)
    params = _params(args)
    result = _poly_out(tail_polynomial(params, p), args)
    result["meta"] = _meta(params, p)
    return result


def cmd_decompose(args) -> dict:
    p = _load_poly(args)
    params = _params(args)
    dec = decompose(params, p, args.M)
    return {
        "identity": _poly_out(dec.identity_poly, args),
        "correction": _poly_out(dec.correction, args),
        "tail": _poly_out(dec.tail, args),
        "total": _poly_out(dec.total, args),
        "exact_identity": dec.holds,
        "meta": {**_meta(params, p), "M": dec.M},
    }


def cmd_certify(args) -> dict:
    p = _load_poly(args)
    params = _params(args)
    cert = certify_operator_image(params, p, order=args.order, force=args.force, tol=args.coef_tol)
    out = cert.to_dict()
    gram = gram_from_certificate(cert)
    out["gram_psd"] = psd_check(gram.gram, args.psd_tol)
    return out


def cmd_verify_certificate(args) -> dict:
    cert = Certificate.from_json(_read(args.input))
    report = verify_certificate(cert, "extended" if args.precision == "extended" else "float")
    gram = gram_from_certificate(cert)
    report["gram_psd"] = psd_check(gram.gram, args.psd_tol)
    report["ok"] = bool(report["ok"] and report["gram_psd"])
    return {"check": "verify_certificate", "residual_norm": cert.residual_norm, **report}


def _sample_stats(poly: Polynomial, args) -> dict:
    values = sample_values(poly, sample_points(poly.nvars, args.samples, args.seed), args.threads)
    return {
        "min": float(values.min()),
        "violations": int((values < -args.tol).sum()),
    }


def cmd_check_estimates(args) -> dict:
    p = _load_poly(args)
    if p.is_zero():
        raise UsageError("estimates are undefined for the zero polynomial")
    M = args.M or max(1, infer_M(p))
    d = p.nvars
    norm = coefficient_norm(p)
    mu = compute_mu(M, d)
    lam2 = args.lambda_sq if args.lambda_sq is not None else lambda_star(mu, norm, M, d)
    threshold = second_estimate_threshold(lam2, args.t, norm, d)
    N = args.N
    if N is None:
        N, _ = synthesis_N(p, args.t, 1, M)
    first = first_estimate_pair(p, lam2, args.t, M)
    report = {
        "check": "estimates",
        "params": {"M": M, "d": d, "t": str(args.t), "lambda_sq": str(lam2), "N": N},
        "seed": args.seed,
        "first": {
            "admissible": first.context["admissible"],
            "rhs_range": first.context["rhs_range"],
            "gap": _sample_stats(first.gap, args),
        },
        "second": {
            "threshold_upper": float(threshold),
            "condition": bool(N >= threshold),
        },
        "notes": [NECESSARY_ONLY],
    }
    if lam2 < 1 and N <= DESK_SCALE_N:
        second = second_estimate_pair(p, KernelParams(N, lam2), args.t)
        report["second"]["rhs_range"] = second.context["rhs_range"]
        report["second"]["gap"] = _sample_stats(second.gap, args)
    else:
        report["notes"].append(f"second-estimate sampling skipped: N = {N} exceeds desk scale {DESK_SCALE_N}")
    return report


def cmd_synthesis(args) -> dict:
    p = _load_poly(args)
    if p.is_zero():
        return {"check": "synthesis", "trivial": True, "message": "p = 0 is a sum of squares (the empty sum)"}
    pre = sample_nonneg(p, args.samples, args.seed, tol=args.tol, threads=args.threads)
    if pre["violations"]:
        raise HypothesisViolation(f"p is negative at {pre['argmin']} (value {pre['min_value']})")
    if args.N is None or args.lambda_sq is None:
        N, lam2 = synthesis_N(p.scale(1 / args.epsilon), args.t)
        if args.N is None and N > DESK_SCALE_N:
            raise UsageError(f"the recipe asks for N = {N}, beyond desk scale; pass --N and --lambda-sq")
        params = KernelParams(args.N if args.N is not None else N, args.lambda_sq if args.lambda_sq is not None else lam2)
    else:
        params = _params(args)
    residual = synthesis_residual(
        p, params, args.t, args.epsilon, args.N_pert, args.samples, args.seed, args.tol, args.threads
    )
    image = apply_operator(params, p).total.to_float()
    image_check = sample_nonneg(image, args.samples, args.seed, tol=args.tol, threads=args.threads)
    return {
        "check": "synthesis",
        "trivial": False,
        "params": residual["params"],
        "seed": args.seed,
        "min_value": residual["min_value"],
        "argmin": residual["argmin"],
        "violations": residual["violations"],
        "slack_stats": residual["slack_stats"],
        "admissibility": residual["admissibility"],
        "input_sample": {k: pre[k] for k in ("min_value", "argmin", "violations")},
        "image_sample": {k: image_check[k] for k in ("min_value", "argmin", "violations")},
        "notes": residual["notes"],
    }


COMMANDS = {
    "bound": cmd_bound,
    "perturb": cmd_perturb,
    "apply-kernel": cmd_apply_kernel,
    "tail": cmd_tail,
    "decompose": cmd_decompose,
    "certify": cmd_certify,
    "verify-certificate": cmd_verify_certificate,
    "check-estimates": cmd_check_estimates,
    "synthesis": cmd_synthesis,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mehler-sos", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", "-i", required=True, help="JSON file, or - for stdin")
    common.add_argument("--output", "-o", help="write JSON here instead of stdout")
    common.add_argument("--precision", choices=["exact", "float", "extended"], default="exact")
    common.add_argument("--threads", type=int, default=None, help="worker cap (also MEHLER_SOS_THREADS)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=10_000)
    common.add_argument("--tol", type=float, default=1e-9, help="sampled nonnegativity tolerance")
    common.add_argument("--coef-tol", type=float, default=1e-8, help="relative coefficient residual tolerance")
    common.add_argument("--psd-tol", type=float, default=1e-9)
    common.add_argument("--epsilon", type=_rational, default=Fraction(1))
    common.add_argument("--t", type=_rational, default=Fraction(0))
    common.add_argument("--N", type=int, default=None)
    common.add_argument("--M", type=int, default=None)
    common.add_argument("--lambda-sq", dest="lambda_sq", type=_rational, default=None)
    common.add_argument("--N-pert", dest="N_pert", type=int, default=None)
    common.add_argument("--order", type=int, default=None, help="quadrature points per axis")
    common.add_argument("--force", action="store_true", help="clamp negative samples (unsound)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _emit(obj: dict, path: str | None) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fail(code: int, exc: BaseException) -> int:
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}) + "\n")
    return code


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.threads is not None:
            if args.threads < 1:
                raise UsageError("--threads must be positive")
            os.environ["MEHLER_SOS_THREADS"] = str(args.threads)
        if args.epsilon <= 0:
            raise UsageError("--epsilon must be positive")
        result = COMMANDS[args.command](args)
        _emit(result, args.output)
        return EXIT_OK
    except HypothesisViolation as exc:
        return _fail(EXIT_HYPOTHESIS, exc)
    except PrecisionError as exc:
        return _fail(EXIT_PRECISION, exc)
    except (UsageError, PolynomialError, ValueError, TypeError, OSError, KeyError, ArithmeticError) as exc:
        return _fail(EXIT_ERROR, exc)


if __name__ == "__main__":
    sys.exit(main())
