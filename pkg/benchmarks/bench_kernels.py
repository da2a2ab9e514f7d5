"""Time the compiled and pure-Python float kernels on the same inputs.

Run with ``python3 benchmarks/bench_kernels.py``.
"""

import argparse
import timeit

import numpy as np

from mehler_sos import _pykernels
from mehler_sos.polycore import Polynomial

try:
    from mehler_sos import _ckernels
except ImportError:
    _ckernels = None


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench_evaluate():
    rng = np.random.default_rng(0)
    motzkin = Polynomial(2, {(4, 2): 1, (2, 4): 1, (2, 2): -3, (0, 0): 1})
    image_like = Polynomial(3, {tuple(rng.integers(0, 9, 3)): float(rng.standard_normal()) for _ in range(120)})
    rows = []
    for label, p, n in [("motzkin, 4096 pts", motzkin, 4096), ("120 terms d=3, 50000 pts", image_like, 50_000)]:
        exps, coefs = p.to_float().arrays()
        pts = rng.standard_normal((n, p.nvars))
        rows.append((f"evaluate_sparse {label}", lambda m, e=exps, c=coefs, x=pts: m.evaluate_sparse(e, c, x)))
    return rows


def bench_gram():
    # 300 is the square basis size for degree 12 in d = 3 (a certificate at N = 3, deg p = 6)
    rng = np.random.default_rng(1)
    a = rng.standard_normal((300, 300))
    gram = a @ a.T
    index = rng.integers(0, 1000, gram.shape).astype(np.int64)
    return [("gram_contract 300x300", lambda m: m.gram_contract(gram, index, 1000))]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=7)
    args = parser.parse_args()
    if _ckernels is None:
        print("compiled kernels are not built; only the Python timings are shown")
    print(f"{'kernel':45s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s}")
    for name, call in bench_evaluate() + bench_gram():
        py = _best(lambda: call(_pykernels), args.repeat) * 1e3
        if _ckernels is None:
            print(f"{name:45s} {py:12.3f} {'-':>12s} {'-':>8s}")
            continue
        c = _best(lambda: call(_ckernels), args.repeat) * 1e3
        print(f"{name:45s} {py:12.3f} {c:12.3f} {py / c:8.2f}x")


if __name__ == "__main__":
    main()
