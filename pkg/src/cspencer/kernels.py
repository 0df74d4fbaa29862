"""Kernel backend selection.

The compiled extension is used when it imports; ``CSPENCER_PURE_PYTHON=1``
forces the numpy fallback.  ``BACKEND`` names the active implementation.
"""
import itertools
import os
from functools import lru_cache

import numpy as np

from . import _pykernels
from ._pykernels import MODE_MAX_MIN, MODE_SQMIN_MAX, MODE_SUM_MAX  # noqa: F401

_impl = _pykernels
BACKEND = "python"
if not os.environ.get("CSPENCER_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels

# cap on the number of forms mixed in one simplex-vertex bound
MAX_ACTIVE = 4


def backend(name=None):
    """Kernel module by name (``"python"``/``"cython"``), default the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown backend {name!r}")


@lru_cache(maxsize=None)
def candidate_table(m, d):
    """Vertex candidates for the simplex-weighted cell bounds.

    Each row pairs a subset ``T`` of the ``q`` most active forms with a set
    ``K`` of ``|T| - 1`` coordinates whose first-order terms the weights
    cancel.  Returned as boolean masks ``(C, q)`` and ``(C, d)``.
    """
    q = min(m, d + 1, MAX_ACTIVE)
    rows_T, rows_K = [], []
    for t in range(1, q + 1):
        for T in itertools.combinations(range(q), t):
            for K in itertools.combinations(range(d), t - 1):
                mt = np.zeros(q, dtype=np.uint8)
                mt[list(T)] = 1
                mk = np.zeros(d, dtype=np.uint8)
                mk[list(K)] = 1
                rows_T.append(mt)
                rows_K.append(mk)
    cT = np.array(rows_T, dtype=np.uint8).reshape(-1, q)
    cK = np.array(rows_K, dtype=np.uint8).reshape(-1, d)
    cT.setflags(write=False)
    cK.setflags(write=False)
    return cT, cK


def cell_bounds(coef, kinds, centers, halfw, mode, impl=None):
    coef = np.asarray(coef, dtype=complex)
    kinds = np.asarray(kinds, dtype=np.int64)
    cT, cK = candidate_table(coef.shape[0], kinds.size)
    return (impl or _impl).cell_bounds(coef, kinds, centers, halfw, mode, cT, cK)


def trig_sweep(bs, rs, gammas, eps, impl=None):
    return (impl or _impl).trig_sweep(bs, rs, gammas, eps)


def inf1_estimate_batch(mats, grid=32, iters=40, starts=1, impl=None):
    return (impl or _impl).inf1_estimate_batch(np.asarray(mats, dtype=complex), int(grid), int(iters), int(starts))
