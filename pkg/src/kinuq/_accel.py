"""Numba detection and the switch between jitted and pure-numpy kernels.

Set KINUQ_NO_NUMBA=1 to force the numpy fallback path. The flag is read
once at import time; `kinuq.benchmark` imports both implementations
directly to compare them.
"""

import os

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and os.environ.get("KINUQ_NO_NUMBA", "0") != "1"


def njit(*args, **kwargs):
    """numba.njit with caching when acceleration is on, no-op otherwise."""
    if HAS_NUMBA:
        kwargs.setdefault("cache", True)
        return numba.njit(*args, **kwargs)
    if args and callable(args[0]):
        return args[0]

    def wrap(func):
        return func

    return wrap
