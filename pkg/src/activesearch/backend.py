"""Kernel backend selection.

The numba backend is the default. Set ACTIVESEARCH_DISABLE_NUMBA=1 before
import to force the pure-numpy path (also used automatically when numba is
not importable). benchmarks/bench_backends.py times the two side by side.
"""

import os

_flag = os.environ.get("ACTIVESEARCH_DISABLE_NUMBA", "").strip().lower()

if _flag in {"1", "true", "yes"}:
    from . import _kernels_numpy as _impl

    BACKEND = "numpy"
else:
    try:
        from . import _kernels_numba as _impl

        BACKEND = "numba"
    except ImportError:  # pragma: no cover - depends on environment
        from . import _kernels_numpy as _impl

        BACKEND = "numpy"

csr_matvec = _impl.csr_matvec
csr_rows_matvec = _impl.csr_rows_matvec
csr_rmatvec = _impl.csr_rmatvec
csr_dense_matmat = _impl.csr_dense_matmat
csr_scatter_rows = _impl.csr_scatter_rows
