"""Optional numba acceleration layer.

Hot kernels (Kalman recursion, GARCH variance recursions) are written as
plain-loop functions and passed through :func:`maybe_jit`. When numba is
installed and ``TSECON_NO_NUMBA`` is unset, they are compiled in nopython
mode; otherwise the original Python function runs unchanged. Both paths
execute the identical source, so results agree to the last bit.
"""

from __future__ import annotations

import os

DISABLED = os.environ.get("TSECON_NO_NUMBA", "") not in ("", "0")

try:
    if DISABLED:
        raise ImportError("numba disabled via TSECON_NO_NUMBA")
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    numba = None
    HAS_NUMBA = False


def maybe_jit(func):
    """Compile ``func`` with numba when available, else return it as-is."""
    if HAS_NUMBA:
        return numba.jit(nopython=True, cache=True)(func)
    return func


def active_backend() -> str:
    return "numba" if HAS_NUMBA else "numpy"
