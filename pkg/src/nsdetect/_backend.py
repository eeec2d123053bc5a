"""Kernel backend selection.

Hot loops (random-forest split search and tree traversal) exist twice: a
numba @njit implementation and a vectorized pure-numpy fallback. Both
produce identical trees; they differ only in speed. The active backend is
chosen once from the NSDETECT_BACKEND environment variable ("numba" or
"numpy") and can be switched at runtime with set_backend(), e.g. by the
backend benchmark.
"""

from __future__ import annotations

import contextlib
import os

_VALID = ("numba", "numpy")


def _numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def _initial_backend() -> str:
    requested = os.environ.get("NSDETECT_BACKEND", "").strip().lower()
    if requested:
        if requested not in _VALID:
            raise ValueError(
                f"NSDETECT_BACKEND must be one of {_VALID}, got {requested!r}"
            )
        if requested == "numba" and not _numba_available():
            raise ImportError(
                "NSDETECT_BACKEND=numba but numba is not installed"
            )
        return requested
    return "numba" if _numba_available() else "numpy"


_active = _initial_backend()


def get_backend() -> str:
    """Name of the active kernel backend, "numba" or "numpy"."""
    return _active


def set_backend(name: str) -> None:
    """Switch the kernel backend at runtime."""
    global _active
    if name not in _VALID:
        raise ValueError(f"backend must be one of {_VALID}, got {name!r}")
    if name == "numba" and not _numba_available():
        raise ImportError("numba backend requested but numba is not installed")
    _active = name


@contextlib.contextmanager
def use_backend(name: str):
    """Temporarily switch backends (used by tests and the benchmark)."""
    previous = get_backend()
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)
