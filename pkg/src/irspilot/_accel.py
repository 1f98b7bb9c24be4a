"""Optional numba acceleration.

Kernels are written once as plain loops and wrapped with :func:`njit`. When
numba is missing, or ``IRSPILOT_NUMBA=0`` is set before import, ``njit``
returns the function unchanged and callers pick the vectorized numpy path.
"""

import os

_FLAG = os.environ.get("IRSPILOT_NUMBA", "1").strip().lower()

try:
    import numba as _numba
except ImportError:  # pragma: no cover - exercised only without numba
    _numba = None

USE_NUMBA = _numba is not None and _FLAG not in ("0", "false", "no", "off")


def njit(func):
    """``numba.njit(cache=True)`` when enabled, identity otherwise."""
    if not USE_NUMBA:
        return func
    return _numba.njit(cache=True)(func)
