"""Backend selection for the chain-ring Smith kernel.

The compiled extension is used when it imported and the modulus fits in
63 bits; otherwise the pure-Python twin runs.  ``HN_KERNEL=python`` forces
the fallback.
"""

import os

import numpy as np

from . import _pykernel

try:
    from . import _ckernel
except ImportError:  # extension not built
    _ckernel = None

__all__ = ["BACKEND", "smith_image", "set_backend"]

_LIMIT = 1 << 62

BACKEND = "compiled" if _ckernel is not None else "python"
if os.environ.get("HN_KERNEL", "").lower() == "python":
    BACKEND = "python"


def set_backend(name):
    """Switch between ``"compiled"`` and ``"python"``; returns the old name."""
    global BACKEND
    if name not in ("compiled", "python"):
        raise ValueError(f"unknown kernel backend {name!r}")
    if name == "compiled" and _ckernel is None:
        raise RuntimeError("compiled kernel is not available in this build")
    old, BACKEND = BACKEND, name
    return old


def smith_image(A, V, shifts, p, k, N):
    """Sorted nonzero Smith valuations (in units of 1/k) of
    ``diag(pi^shifts) * A * V^T`` over ``O / p^N``.

    ``A`` holds reduced elements (lists of ``k`` ints mod ``p^N``), ``V``
    integer rows (reduced here).
    """
    q = p ** N
    Vr = [[c % q for c in row] for row in V]
    if BACKEND == "compiled" and q < _LIMIT:
        r = len(A)
        n = len(A[0]) if r else (len(V[0]) if V else 0)
        a = np.zeros((r, n, k), dtype=np.int64)
        for i, row in enumerate(A):
            for j, e in enumerate(row):
                a[i, j, :] = e
        v = np.array(Vr, dtype=np.int64).reshape(len(Vr), n)
        s = np.array(shifts, dtype=np.int64).reshape(r)
        return _ckernel.smith_image(a, v, s, p, k, N)
    return _pykernel.smith_image(A, Vr, shifts, p, k, N)
