"""Backend selection for the bitmask kernels.

Set ``DISTPREF_NO_NUMBA=1`` to force the pure-numpy kernels even when numba
is importable. The flag is read once, at import time.
"""
import os

_FLAG = os.environ.get("DISTPREF_NO_NUMBA", "").strip().lower()
DISABLED_BY_ENV = _FLAG not in ("", "0", "false", "no")

try:
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not DISABLED_BY_ENV


def njit(f):
    """Compile ``f`` with numba when available, else return it unchanged.

    The numba variants are always defined (so tests can compare both
    backends); whether they are *dispatched to* is decided by ``USE_NUMBA``.
    """
    if HAVE_NUMBA:
        return _njit(cache=True, nogil=True)(f)
    return f


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
