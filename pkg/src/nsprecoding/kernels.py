"""Backend selection for the hot kernels.

The compiled Cython extension is used when it imports; otherwise the numpy
fallback is. Setting ``NSPRECODING_KERNELS=python`` forces the fallback.
``BACKEND`` names the active one.

The two matrix-product kernels always run on numpy: batched BLAS matmul
beats the compiled loops there (see ``benchmarks/bench_kernels.py``).
"""
import os

import numpy as np

from . import _pykernels

_forced = os.environ.get("NSPRECODING_KERNELS", "").strip().lower()

_compiled = None
if _forced != "python":
    try:
        from . import _ckernels as _compiled
    except ImportError:  # extension not built
        if _forced == "cython":
            raise
        _compiled = None

_impl = _compiled if _compiled is not None else _pykernels
BACKEND = "cython" if _compiled is not None else "python"

PIVOT_TOL = _pykernels.PIVOT_TOL


def available_backends():
    out = {"python": _pykernels}
    if _compiled is not None:
        out["cython"] = _compiled
    return out


def _stack(a):
    return np.ascontiguousarray(a, dtype=np.complex128)


def offdiag_energy(G):
    return _impl.offdiag_energy(_stack(G))


def tridiag_inverse(D):
    return _impl.tridiag_inverse(_stack(D))


def first_order_matrix(G, Dinv):
    return _pykernels.first_order_matrix(_stack(G), _stack(Dinv))


def precoder_stats(G, P):
    return _pykernels.precoder_stats(_stack(G), _stack(P))
