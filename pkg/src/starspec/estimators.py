"""scikit-learn style front end for the inverse problem.

``DensityReconstructor`` is fitted on a spectrum and predicts density values
on the edges. Hyper-parameters follow the ``BaseEstimator`` conventions, so
``get_params``/``set_params``/``clone`` work as usual.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .asymptotics import classify_h
from .characterize import assign_numbering
from .errors import ValidationError
from .forward import eigenvalues
from .inverse_easy import reconstruct_method2
from .inverse_riesz import reconstruct_method1
from .model import GraphProblem, Spectrum

METHODS = ("easy", "riesz")


def check_spectrum(X, branches: int) -> Spectrum:
    """Accept a :class:`Spectrum`, an ``(N, branches)`` table or a flat multiset.

    Flat input is numbered against the asymptotic template; tables are taken
    as already numbered.
    """
    if isinstance(X, Spectrum):
        spec = X
    else:
        arr = np.asarray(X)
        if arr.dtype == object or not np.issubdtype(arr.dtype, np.number):
            raise ValidationError("spectrum must be numeric")
        arr = arr.astype(complex)
        if not np.all(np.isfinite(arr)):
            raise ValidationError("spectrum contains non-finite values")
        if arr.ndim == 2:
            spec = Spectrum.from_table(arr, source="user-assigned")
        elif arr.ndim == 1:
            return arr
        else:
            raise ValidationError(f"spectrum must be 1- or 2-dimensional, got {arr.ndim}")
    if spec.branches != branches:
        raise ValidationError(f"spectrum has {spec.branches} branches, expected {branches}")
    return spec


def check_grid(x) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size == 0:
        raise ValidationError("empty evaluation grid")
    if np.any((x < 0) | (x > np.pi)) or not np.all(np.isfinite(x)):
        raise ValidationError("evaluation points must lie in [0, pi]")
    return x


class DensityReconstructor(BaseEstimator):
    """Recover edge densities from eigenvalues.

    Parameters
    ----------
    h : sequence of complex
        Robin coefficients (fixed, known).
    method : {"easy", "riesz"}
        Edge-by-edge biorthogonal reconstruction or the joint moment solve.
    n_shells : int, optional
        Shells used; default all supplied.
    k_out : int
        Cosine modes of the output for ``method="easy"``.
    k_dict : int
        Cosine modes of the unknowns for ``method="riesz"``.
    n_direct, n_tail : int, optional
        Product truncation for ``method="easy"``.
    """

    def __init__(self, h=(0.0, 1.0), method="easy", n_shells=None, k_out=64, k_dict=32,
                 n_direct=None, n_tail=None):
        self.h = h
        self.method = method
        self.n_shells = n_shells
        self.k_out = k_out
        self.k_dict = k_dict
        self.n_direct = n_direct
        self.n_tail = n_tail

    def fit(self, X, y=None):
        if self.method not in METHODS:
            raise ValidationError(f"method must be one of {METHODS}, got {self.method!r}")
        hconf = classify_h(self.h)
        spec = check_spectrum(X, hconf.forward_template().branches)
        if not isinstance(spec, Spectrum):
            spec = assign_numbering(spec, hconf.forward_template())
        if self.n_shells is not None:
            if self.n_shells > spec.n_shells:
                raise ValidationError(f"n_shells={self.n_shells} exceeds the {spec.n_shells} supplied")
            spec = spec.truncated(self.n_shells)
        if self.method == "easy":
            series, report = reconstruct_method2(spec, hconf, spec.n_shells, self.k_out,
                                                 n_direct=self.n_direct, n_tail=self.n_tail)
        else:
            series, report = reconstruct_method1(spec, hconf, spec.n_shells, self.k_dict)
        self.hconf_ = hconf
        self.densities_ = series
        self.report_ = report
        self.spectrum_ = spec
        return self

    def predict(self, X):
        """Density values at points ``X`` in ``[0, pi]``; shape ``(len(X), m)``."""
        check_is_fitted(self, "densities_")
        x = check_grid(X)
        return np.stack([q(x) for q in self.densities_], axis=1)

    def problem(self) -> GraphProblem:
        check_is_fitted(self, "densities_")
        return GraphProblem(self.hconf_, tuple(self.densities_))

    def score(self, X, y=None):
        """Negative largest relative drift between ``X`` and the spectrum of the
        reconstructed problem (0 is perfect)."""
        check_is_fitted(self, "densities_")
        spec = check_spectrum(X, self.hconf_.forward_template().branches)
        if not isinstance(spec, Spectrum):
            spec = assign_numbering(spec, self.hconf_.forward_template())
        again = eigenvalues(self.problem(), spec.n_shells)
        drift = np.abs(again.table() - spec.table()) / (1 + np.abs(spec.table()))
        return -float(np.max(drift))
