"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
fallback.  Setting ``FINSLERKIT_PURE=1`` forces the fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
if os.environ.get("FINSLERKIT_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py
else:
    _impl = _kernels_py

mul = _impl.mul
compose = _impl.compose

__all__ = ["BACKEND", "mul", "compose"]
