"""Numba/numpy backend selection.

Hot kernels in :mod:`gern._kernels` are written as plain Python functions over
numpy arrays and compiled with ``numba.njit`` by default.  Setting the
environment variable ``GERN_NUMBA=0`` (before import) selects the pure-Python
fallback path instead; results are bit-identical, only slower.  The active
choice is reported in ``BACKEND``.
"""

import functools
import os

import numpy as np

_flag = os.environ.get("GERN_NUMBA", "1").strip().lower()
_want_numba = _flag not in ("0", "false", "off", "no")

if _want_numba:
    try:
        import numba

        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a declared dependency
        numba = None
        BACKEND = "numpy"
else:
    numba = None
    BACKEND = "numpy"


def maybe_njit(**options):
    """Return ``numba.njit(**options)`` or a fallback wrapper.

    The fallback runs the original function under ``np.errstate(over="ignore")``
    so that the kernels' wrapping uint64 arithmetic stays silent, and exposes it
    as ``.py_func`` to mirror a numba dispatcher.
    """

    def decorate(func):
        if BACKEND == "numba":
            return numba.njit(**options)(func)

        @functools.wraps(func)
        def wrapper(*args):
            with np.errstate(over="ignore"):
                return func(*args)

        wrapper.py_func = func
        return wrapper

    return decorate
