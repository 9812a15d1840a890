"""Numba dispatch.

Set ``IDNC_CDE_DISABLE_NUMBA=1`` to force the pure-numpy kernels (useful for
debugging and for checking that both paths agree).
"""
import os
import warnings


def _flag(name):
    return os.environ.get(name, "").strip().lower() in ("1", "true", "yes", "on")


def _nop_njit(*args, **kwargs):
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def decorator(func):
        return func

    return decorator


try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False
    njit = _nop_njit
    warnings.warn("numba not importable, falling back to numpy kernels")

USE_NUMBA = HAVE_NUMBA and not _flag("IDNC_CDE_DISABLE_NUMBA")
