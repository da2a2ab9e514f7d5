"""Float kernel dispatch: the compiled extension when available, NumPy otherwise.

Set ``MEHLER_SOS_PURE=1`` to force the NumPy implementation.
"""

from __future__ import annotations

import os

if os.environ.get("MEHLER_SOS_PURE") == "1":
    from ._pykernels import evaluate_sparse, gram_contract

    BACKEND = "python"
else:
    try:
        from ._ckernels import evaluate_sparse, gram_contract

        BACKEND = "cython"
    except ImportError:
        from ._pykernels import evaluate_sparse, gram_contract

        BACKEND = "python"

__all__ = ["BACKEND", "evaluate_sparse", "gram_contract"]
