"""Backend selection for the hot kernels.

By default the kernels in :mod:`relaypair.kernels` are compiled with numba's
``@njit``.  Setting the environment variable ``RELAYPAIR_DISABLE_NUMBA=1``
before import selects the uncompiled pure-numpy path instead (same code,
no JIT), which is handy for debugging and for the backend benchmark.
"""

import os

DISABLE_ENV = "RELAYPAIR_DISABLE_NUMBA"


def _nop_njit(*args, **kwargs):
    def wrap(func):
        return func

    if args and callable(args[0]) and not kwargs:
        return args[0]
    return wrap


if os.environ.get(DISABLE_ENV, "").strip() not in ("", "0"):
    NUMBA_ENABLED = False
    njit = _nop_njit
else:
    try:
        from numba import njit  # noqa: F401

        NUMBA_ENABLED = True
    except ImportError:
        NUMBA_ENABLED = False
        njit = _nop_njit
