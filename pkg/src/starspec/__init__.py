"""Inverse spectral problems for star graphs with nonlocal integral matching.

The main entry points are :func:`starspec.forward.eigenvalues` for the forward
problem and :class:`starspec.estimators.DensityReconstructor` for recovering
the densities from eigenvalues.
"""

from .asymptotics import HClass, classify_h
from .estimators import DensityReconstructor
from .forward import delta, eigenvalues, lstar_eigenvalues
from .model import CosineSeries, GraphProblem, Spectrum

__all__ = [
    "CosineSeries",
    "DensityReconstructor",
    "GraphProblem",
    "HClass",
    "Spectrum",
    "classify_h",
    "delta",
    "eigenvalues",
    "lstar_eigenvalues",
]
__version__ = "0.1.0"
