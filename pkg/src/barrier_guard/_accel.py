"""Numba acceleration shim.

The hot kernels in :mod:`barrier_guard.kernels` are compiled with numba
when available. Set ``BARRIER_GUARD_NUMBA=0`` to force the pure-numpy
fallback path (useful for debugging and for the numba-vs-numpy benchmark).
"""

import os


def numba_requested() -> bool:
    flag = os.environ.get("BARRIER_GUARD_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "off", "no")


try:
    from numba import njit as _njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a hard dep, but stay usable
    NUMBA_AVAILABLE = False

    def _njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


USING_NUMBA = NUMBA_AVAILABLE and numba_requested()


def maybe_njit(func):
    """Compile ``func`` with numba unless the fallback path is selected."""
    if USING_NUMBA:
        return _njit(cache=True)(func)
    return func
