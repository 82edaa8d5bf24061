"""Numba/numpy backend selection for the hot numeric kernels.

The compute-heavy inner loops (GCN forward/backward, subgraph-isomorphism
backtracking) are written once in njit-compatible style and compiled with
numba when available. Setting ``EDGECERT_BACKEND=numpy`` forces the plain
interpreted path; ``EDGECERT_BACKEND=numba`` fails loudly if numba is
missing. Both paths compute the same quantities; float results may differ
in the last bits because summation order differs after compilation.
"""

from __future__ import annotations

import os

_ENV_VAR = "EDGECERT_BACKEND"

try:
    from numba import njit as _njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only without numba
    _njit = None
    NUMBA_AVAILABLE = False


def _resolve_backend() -> str:
    choice = os.environ.get(_ENV_VAR, "").strip().lower()
    if choice == "numpy":
        return "numpy"
    if choice == "numba":
        if not NUMBA_AVAILABLE:
            raise RuntimeError(
                f"{_ENV_VAR}=numba requested but numba is not importable"
            )
        return "numba"
    if choice not in ("", "auto"):
        raise RuntimeError(f"unknown {_ENV_VAR}={choice!r} (use numba or numpy)")
    return "numba" if NUMBA_AVAILABLE else "numpy"


BACKEND = _resolve_backend()


def maybe_njit(func):
    """Compile ``func`` with numba on the numba backend, else return it as is."""
    if BACKEND == "numba":
        return _njit(cache=True)(func)
    return func
