"""Optional numba acceleration.

Set ``CONSTELLATION_ACCESS_DISABLE_NUMBA=1`` to force the pure-numpy kernels
even when numba is installed. When numba is unavailable, ``njit`` is a no-op
decorator so the loop kernels still import (and run, slowly) as plain Python.
"""
import os

_DISABLE_FLAG = "CONSTELLATION_ACCESS_DISABLE_NUMBA"

try:
    import numba as _numba
except ImportError:  # pragma: no cover - exercised only without numba
    _numba = None

NUMBA_INSTALLED = _numba is not None
NUMBA_ENABLED = NUMBA_INSTALLED and os.environ.get(_DISABLE_FLAG, "").strip().lower() not in (
    "1",
    "true",
    "yes",
    "on",
)


if NUMBA_INSTALLED:
    njit = _numba.njit
else:  # pragma: no cover

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrapper(f):
            return f

        return wrapper
