"""Numerical checks: Gram systems, PSD tests and seeded nonnegativity sampling.

Sampling uses NumPy's PCG64 generator. The seed feeds a SeedSequence that is
spawned into one child stream per fixed-size chunk of samples, so results do
not depend on the number of worker threads.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bounds import build_perturbation, first_estimate_pair, second_estimate_pair
from .certify import Certificate, gram_to_polynomial, square_basis
from .kernels import evaluate_sparse
from .mehler import KernelParams, apply_operator, infer_M
from .polycore import Polynomial

__all__ = [
    "GramSystem",
    "gram_from_squares",
    "gram_from_certificate",
    "psd_check",
    "sample_points",
    "sample_values",
    "sample_nonneg",
    "synthesis_residual",
    "default_threads",
    "CHUNK",
    "NECESSARY_ONLY",
]

CHUNK = 4096
NECESSARY_ONLY = "sampling is a necessary condition for nonnegativity, not a proof"


def default_threads() -> int:
    env = os.environ.get("MEHLER_SOS_THREADS")
    if env:
        return max(1, int(env))
    return 1


@dataclass(frozen=True)
class GramSystem:
    basis: list[tuple[int, ...]]
    gram: np.ndarray
    target: Polynomial


def gram_from_squares(squares, d: int | None = None) -> GramSystem:
    """Gram matrix sum_i w_i v_i v_i^T from (weight, polynomial) pairs."""
    squares = list(squares)
    if d is None:
        d = squares[0][1].nvars if squares else 1
    if any(w < 0 for w, _ in squares):
        raise ValueError("weights must be nonnegative")
    deg = max((q.degree for _, q in squares), default=0)
    basis = square_basis(d, max(deg, 0))
    pos = {b: k for k, b in enumerate(basis)}
    gram = np.zeros((len(basis), len(basis)))
    for w, q in squares:
        v = np.zeros(len(basis))
        for alpha, c in q.terms.items():
            v[pos[alpha]] = float(c)
        gram += float(w) * np.outer(v, v)
    target = gram_to_polynomial(gram, basis) if squares else Polynomial(d)
    return GramSystem(basis, gram, target)


def gram_from_certificate(cert: Certificate) -> GramSystem:
    pairs = [(t.weight, s) for t in cert.terms for s in t.squares]
    return gram_from_squares(pairs, cert.target.nvars)


def psd_check(m, tol: float = 1e-12) -> bool:
    """Cholesky of m + tol*I; True when it succeeds."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    if m.size == 0:
        return True
    if np.max(np.abs(m - m.T)) > tol * max(1.0, np.max(np.abs(m))):
        raise ValueError("matrix is not symmetric within tolerance")
    try:
        np.linalg.cholesky((m + m.T) / 2 + tol * np.eye(m.shape[0]))
    except np.linalg.LinAlgError:
        return False
    return True


# ---------------------------------------------------------------------------
# sampling


def _parse_sampler(sampler) -> tuple[str, float]:
    if sampler in (None, "gaussian"):
        return "gaussian", 0.0
    if isinstance(sampler, tuple) and sampler[0] == "box":
        return "box", float(sampler[1])
    if isinstance(sampler, str) and sampler.startswith("box"):
        _, _, radius = sampler.partition(":")
        return "box", float(radius or 1.0)
    raise ValueError(f"unknown sampler {sampler!r}")


def sample_points(d: int, n: int, seed: int, sampler="gaussian") -> np.ndarray:
    kind, radius = _parse_sampler(sampler)
    children = np.random.SeedSequence(seed).spawn(-(-n // CHUNK))
    blocks = []
    for k, child in enumerate(children):
        rng = np.random.Generator(np.random.PCG64(child))
        size = min(CHUNK, n - k * CHUNK)
        if kind == "gaussian":
            blocks.append(rng.standard_normal((size, d)))
        else:
            blocks.append(rng.uniform(-radius, radius, (size, d)))
    return np.concatenate(blocks) if blocks else np.zeros((0, d))


def sample_values(p: Polynomial, points: np.ndarray, threads: int | None = None) -> np.ndarray:
    """p at each row of ``points``; chunks are evaluated in parallel and reassembled in order."""
    exps, coefs = p.arrays()
    threads = threads or default_threads()
    chunks = [points[i : i + CHUNK] for i in range(0, len(points), CHUNK)]
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda c: evaluate_sparse(exps, coefs, c), chunks))
    else:
        parts = [evaluate_sparse(exps, coefs, c) for c in chunks]
    return np.concatenate(parts) if parts else np.zeros(0)


def sample_nonneg(
    p: Polynomial, n: int = 10_000, seed: int = 0, sampler="gaussian", tol: float = 1e-9, threads: int | None = None
) -> dict:
    """Minimum of p over seeded samples and the count of values below -tol."""
    if n < 1:
        raise ValueError("n must be at least 1")
    points = sample_points(p.nvars, n, seed, sampler)
    values = sample_values(p, points, threads)
    k = int(np.argmin(values))
    kind, radius = _parse_sampler(sampler)
    return {
        "check": "sample_nonneg",
        "seed": seed,
        "n": n,
        "sampler": kind if kind == "gaussian" else f"box:{radius!r}",
        "min_value": float(values[k]),
        "argmin": [float(x) for x in points[k]],
        "violations": int(np.count_nonzero(values < -tol)),
        "tol": tol,
        "note": NECESSARY_ONLY,
    }


def _stats(values: np.ndarray) -> dict:
    return {"min": float(np.min(values)), "mean": float(np.mean(values)), "max": float(np.max(values))}


def synthesis_residual(
    p: Polynomial,
    params: KernelParams,
    t=0,
    epsilon=1,
    N_pert: int | None = None,
    n: int = 10_000,
    seed: int = 0,
    tol: float = 1e-9,
    threads: int | None = None,
) -> dict:
    """Sample R = p + eps sum_{n <= N_pert} (x.x)^n/(n!)^t - I(p) and both estimate gaps."""
    t, epsilon = Fraction(t), Fraction(epsilon)
    d = p.nvars
    floor_pert = 2 * params.N + (d + 1) // 2
    N_pert = floor_pert if N_pert is None else N_pert
    notes = [NECESSARY_ONLY]
    if N_pert < floor_pert:
        msg = f"N_pert = {N_pert} is below 2N + ceil(d/2) = {floor_pert}"
        warnings.warn(msg)
        notes.append(msg)
    if epsilon == 0:
        notes.append("epsilon = 0: no perturbation, no claim")
    image = apply_operator(params, p).total
    perturbation = build_perturbation(d, N_pert, t, epsilon) if epsilon else Polynomial(d)
    residual = p.to_float() + perturbation.to_float() - image.to_float()
    points = sample_points(d, n, seed)
    values = sample_values(residual, points, threads)
    k = int(np.argmin(values))
    M = max(1, infer_M(p))
    # both estimates are stated for p/eps
    q = p.scale(1 / epsilon) if epsilon else p
    first = first_estimate_pair(q, params.lambda_sq, t, M)
    second = second_estimate_pair(q, params, t)
    slack = {
        "first": _stats(sample_values(first.gap, points, threads)),
        "second": _stats(sample_values(second.gap, points, threads)),
    }
    return {
        "check": "synthesis_residual",
        "params": {
            "N": params.N,
            "lambda_sq": str(params.lambda_sq),
            "t": str(t),
            "epsilon": str(epsilon),
            "N_pert": N_pert,
            "M": M,
        },
        "seed": seed,
        "n": n,
        "min_value": float(values[k]),
        "argmin": [float(x) for x in points[k]],
        "violations": int(np.count_nonzero(values < -tol)),
        "tol": tol,
        "admissibility": {
            "first": bool(first.context["admissible"]),
            "second": bool(second.context["condition"]),
            "N_ge_M": params.N >= M,
        },
        "slack_stats": slack,
        "notes": notes,
    }
