"""Numba toggle for the hot kernels.

Set QHYDRO_DISABLE_JIT=1 (or NUMBA_DISABLE_JIT=1) to run the pure-numpy /
interpreted fallback paths.  The flag is read once at import time.
"""

import os

_FALSEY = ("", "0", "false", "no")


def _env_flag(name):
    return os.environ.get(name, "").strip().lower() not in _FALSEY


JIT_REQUESTED = not (_env_flag("QHYDRO_DISABLE_JIT") or _env_flag("NUMBA_DISABLE_JIT"))

if JIT_REQUESTED:
    try:
        from numba import njit

        JIT_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        JIT_ENABLED = False
else:
    JIT_ENABLED = False

if not JIT_ENABLED:

    def njit(func=None, **kwargs):
        if func is not None:
            return func

        def wrapper(f):
            return f

        return wrapper
