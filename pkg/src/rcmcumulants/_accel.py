"""Backend selection for the hot kernels.

The numba path is used when numba imports and ``RCM_BACKEND`` is not set to
``numpy``.  Setting ``RCM_BACKEND=numpy`` forces the vectorised pure-numpy
fallbacks, which produce bit-identical integer results.
"""
from __future__ import annotations

import os

BACKEND_ENV = "RCM_BACKEND"

try:
    import numba
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None
    HAVE_NUMBA = False


def njit(*args, **kw):
    """``numba.njit(cache=True)`` or a passthrough when numba is missing."""
    if HAVE_NUMBA:
        kw.setdefault("cache", True)
        return _njit(*args, **kw)
    if len(args) == 1 and callable(args[0]) and not kw:
        return args[0]
    return lambda f: f


def backend(override: str | None = None) -> str:
    """Return ``"numba"`` or ``"numpy"`` for the current call."""
    choice = (override or os.environ.get(BACKEND_ENV, "numba")).strip().lower()
    if choice not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {choice!r}; expected 'numba' or 'numpy'")
    if choice == "numba" and not HAVE_NUMBA:
        return "numpy"
    return choice
