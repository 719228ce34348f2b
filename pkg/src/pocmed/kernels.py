"""Kernel dispatch.

The compiled module is used when it imports and the data fits in 64-bit
words; otherwise the pure-Python version runs. Setting ``POCMED_PURE_PYTHON=1``
forces the fallback.
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_py as py

try:
    if os.environ.get("POCMED_PURE_PYTHON"):
        raise ImportError("pure Python requested")
    from . import _ckernels as _c
except ImportError:
    _c = None

BACKEND = "cython" if _c is not None else "python"


def _use_c(width: int) -> bool:
    return _c is not None and width <= 64


def ultrafilters(n_pairs: int, conflict: list[int]) -> list[int]:
    if _use_c(2 * n_pairs + 2):
        return _c.ultrafilters(n_pairs, conflict)
    return py.ultrafilters(n_pairs, conflict)


def median_closure(gens: list[int], width: int, limit: int):
    if _use_c(width):
        return _c.median_closure(list(gens), limit)
    return py.median_closure(list(gens), limit)


def check_median_table(t: np.ndarray) -> list[tuple[str, tuple[int, ...]]]:
    if _c is not None:
        return _c.check_median_table(np.asarray(t, dtype=np.int32))
    return py.check_median_table(np.asarray(t, dtype=np.int32))


def triple_medians(dist: np.ndarray):
    dist = np.asarray(dist, dtype=np.int32)
    if _use_c(dist.shape[0]):
        return _c.triple_medians(dist)
    return py.triple_medians(dist)
