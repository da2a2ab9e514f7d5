"""NumPy implementations of the float kernels (fallback for the compiled module)."""

from __future__ import annotations

import numpy as np

_CHUNK = 2048


def evaluate_sparse(exps: np.ndarray, coefs: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Values of sum_k coefs[k] * prod_j points[:, j]**exps[k, j] at every row of ``points``."""
    exps = np.ascontiguousarray(exps, dtype=np.int64)
    coefs = np.ascontiguousarray(coefs, dtype=np.float64)
    points = np.ascontiguousarray(points, dtype=np.float64)
    n = points.shape[0]
    out = np.empty(n, dtype=np.float64)
    if exps.shape[0] == 0:
        out.fill(0.0)
        return out
    for start in range(0, n, _CHUNK):
        block = points[start : start + _CHUNK]
        mono = np.prod(block[:, None, :] ** exps[None, :, :], axis=2)
        out[start : start + _CHUNK] = mono @ coefs
    return out


def gram_contract(gram: np.ndarray, index: np.ndarray, n_out: int) -> np.ndarray:
    """out[index[a, b]] += gram[a, b], summed in row-major order."""
    gram = np.ascontiguousarray(gram, dtype=np.float64)
    index = np.ascontiguousarray(index, dtype=np.int64)
    return np.bincount(index.ravel(), weights=gram.ravel(), minlength=n_out)
