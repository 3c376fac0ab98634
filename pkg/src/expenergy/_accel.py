"""Optional numba acceleration.

Set ``EXPENERGY_DISABLE_NUMBA=1`` to run every kernel through its pure-numpy
fallback. The flag is read once at import time.
"""
import os

_DISABLED = os.environ.get("EXPENERGY_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    if _DISABLED:
        raise ImportError("numba disabled by EXPENERGY_DISABLE_NUMBA")
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:
    _njit = None
    HAVE_NUMBA = False


def njit(func):
    """Compile ``func`` with numba when available, else return it unchanged."""
    if HAVE_NUMBA:
        return _njit(cache=True, nogil=True)(func)
    return func


def backend_name():
    return "numba" if HAVE_NUMBA else "numpy"


def thread_count():
    """Worker count from ``EXPENERGY_THREADS`` (default 1)."""
    raw = os.environ.get("EXPENERGY_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)
