"""Hot-loop kernel selection.

Two interchangeable backends produce bit-identical results:

* ``numba``: ``@njit`` kernels (default when numba imports).
* ``numpy``: vectorized numpy where the algorithm allows it, plain Python
  loops where it is inherently sequential (tANS, lookback search).

Set ``LATENTPACK_BACKEND=numpy`` (or ``NUMBA_DISABLE_JIT=1``) before import to
force the fallback; :func:`use_backend` switches at runtime.
"""
from __future__ import annotations

import contextlib
import os

from . import _np

BACKENDS = ("numba", "numpy")

_active = None


def _load(name):
    if name == "numba":
        from . import _nb

        return _nb
    if name == "numpy":
        return _np
    raise ValueError(f"unknown backend {name!r}; choose from {BACKENDS}")


def _default_name():
    requested = os.environ.get("LATENTPACK_BACKEND", "").strip().lower()
    if requested:
        return requested
    if os.environ.get("NUMBA_DISABLE_JIT", "0") not in ("", "0"):
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        return "numpy"
    return "numba"


def kernels():
    global _active
    if _active is None:
        _active = _load(_default_name())
    return _active


def backend_name() -> str:
    return kernels().NAME


def set_backend(name: str) -> None:
    global _active
    _active = _load(name)


@contextlib.contextmanager
def use_backend(name: str):
    global _active
    previous = _active
    set_backend(name)
    try:
        yield
    finally:
        _active = previous
