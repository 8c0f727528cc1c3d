"""Kernel backend selection.

``BIASDISEN_BACKEND=numpy`` forces the vectorised numpy kernels; anything else
(default ``numba``) uses the jit-compiled loops when numba is importable.
"""

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None

ENV_FLAG = "BIASDISEN_BACKEND"

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and os.environ.get(ENV_FLAG, "numba").strip().lower() != "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` when numba is installed, identity otherwise."""
    if not HAVE_NUMBA:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda fn: fn
    return numba.njit(*args, **kwargs)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
