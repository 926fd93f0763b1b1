"""Numerical workbench for Minkowski norms and single-chart Finsler metrics."""
from . import expr, finsler, indicatrix, jets, minkowski, transport
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__", "expr", "finsler", "indicatrix", "jets", "minkowski", "transport"]
