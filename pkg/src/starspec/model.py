"""Problem and spectrum containers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernel
from .asymptotics import HConfiguration, classify_h
from .errors import ValidationError

CLUSTER_RTOL = 1e-7


@dataclass(frozen=True)
class CosineSeries:
    """Finite expansion ``sum_l c_l cos(l x)`` on ``[0, pi]``."""

    coef: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coef, dtype=complex))
        if c.ndim != 1 or c.size == 0:
            raise ValidationError("cosine coefficients must be a non-empty vector")
        if not np.all(np.isfinite(c)):
            raise ValidationError("cosine coefficients must be finite")
        object.__setattr__(self, "coef", c)

    @classmethod
    def zeros(cls, K: int = 0) -> "CosineSeries":
        return cls(np.zeros(K + 1, dtype=complex))

    @property
    def K(self) -> int:
        return self.coef.size - 1

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        l = np.arange(self.coef.size)
        return np.cos(np.multiply.outer(x, l)) @ self.coef

    def padded(self, K: int) -> np.ndarray:
        out = np.zeros(max(K, self.K) + 1, dtype=complex)
        out[: self.coef.size] = self.coef
        return out

    def __add__(self, other: "CosineSeries") -> "CosineSeries":
        K = max(self.K, other.K)
        return CosineSeries(self.padded(K) + other.padded(K))

    def __sub__(self, other: "CosineSeries") -> "CosineSeries":
        K = max(self.K, other.K)
        return CosineSeries(self.padded(K) - other.padded(K))

    def __neg__(self) -> "CosineSeries":
        return CosineSeries(-self.coef)

    def conj(self) -> "CosineSeries":
        return CosineSeries(np.conj(self.coef))

    def norm(self) -> float:
        """L2(0, pi) norm."""
        w = np.full(self.coef.size, np.pi / 2)
        w[0] = np.pi
        return float(np.sqrt(np.sum(w * np.abs(self.coef) ** 2)))

    def moments(self, lam, h):
        """``int_0^pi p(x) phi(x, lam, h) dx`` for array ``lam``."""
        lam = np.asarray(lam, dtype=complex)
        l = np.arange(self.coef.size)
        M = kernel.cos_moment(l, lam[..., None], h)
        return M @ self.coef

    @classmethod
    def from_samples(cls, values, K: int) -> tuple["CosineSeries", float]:
        """Project samples on a uniform grid of ``[0, pi]`` (endpoints included)
        onto ``cos(l x)``, ``l <= K``; returns the series and the relative
        residual on the grid."""
        values = np.asarray(values, dtype=complex)
        n = values.size
        if n < 2:
            raise ValidationError("need at least two grid samples")
        x = np.linspace(0.0, np.pi, n)
        A = np.cos(np.outer(x, np.arange(K + 1)))
        coef, *_ = np.linalg.lstsq(A, values, rcond=None)
        resid = np.linalg.norm(A @ coef - values) / max(np.linalg.norm(values), 1e-300)
        return cls(coef), float(resid)


def relative_l2(a: CosineSeries, b: CosineSeries) -> float:
    """``||a - b|| / ||b||`` (absolute when ``b`` vanishes)."""
    d = (a - b).norm()
    nb = b.norm()
    return d / nb if nb > 0 else d


@dataclass(frozen=True)
class GraphProblem:
    hconf: HConfiguration
    p: tuple

    def __post_init__(self):
        if len(self.p) != self.hconf.m:
            raise ValidationError(f"expected {self.hconf.m} densities, got {len(self.p)}")

    @classmethod
    def create(cls, h, p=None) -> "GraphProblem":
        hconf = classify_h(h)
        if p is None:
            p = [CosineSeries.zeros() for _ in range(hconf.m)]
        p = tuple(q if isinstance(q, CosineSeries) else CosineSeries(q) for q in p)
        return cls(hconf, p)

    @property
    def m(self) -> int:
        return self.hconf.m

    @property
    def h(self) -> np.ndarray:
        return self.hconf.h_array

    @property
    def K(self) -> int:
        return max(q.K for q in self.p)

    def coef_matrix(self) -> np.ndarray:
        K = self.K
        return np.stack([q.padded(K) for q in self.p])


@dataclass
class Spectrum:
    """Eigenvalues numbered as ``table[n, k-1] = lam_nk``.

    ``multiplicity`` is derived: entries whose values agree within
    ``CLUSTER_RTOL * (1 + |lam|)`` count as copies of one eigenvalue.
    """

    values: np.ndarray
    source: str = "computed"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != 2:
            raise ValidationError("spectrum table must be two-dimensional (shells x branches)")
        self.values = v

    @classmethod
    def from_table(cls, table, source="computed", meta=None) -> "Spectrum":
        return cls(np.asarray(table, dtype=complex), source, dict(meta or {}))

    @property
    def n_shells(self) -> int:
        return self.values.shape[0]

    @property
    def branches(self) -> int:
        return self.values.shape[1]

    def table(self) -> np.ndarray:
        return self.values

    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def truncated(self, N: int) -> "Spectrum":
        return Spectrum(self.values[:N].copy(), self.source, dict(self.meta))

    def conj(self) -> "Spectrum":
        return Spectrum(np.conj(self.values), self.source, dict(self.meta))

    def multiplicity(self) -> np.ndarray:
        flat = self.flat()
        tol = CLUSTER_RTOL * (1 + np.abs(flat))
        close = np.abs(flat[:, None] - flat[None, :]) <= np.maximum(tol[:, None], tol[None, :])
        return close.sum(axis=1).reshape(self.values.shape)

    def entries(self):
        """Iterate ``(n, k, lam, multiplicity)`` with 1-based ``k``."""
        mult = self.multiplicity()
        for n in range(self.n_shells):
            for k in range(self.branches):
                yield n, k + 1, complex(self.values[n, k]), int(mult[n, k])

    def n_simple(self) -> int:
        """Smallest shell index above which every entry is simple."""
        mult = self.multiplicity()
        multiple = np.nonzero(np.any(mult > 1, axis=1))[0]
        return int(multiple[-1] + 1) if multiple.size else 0

    def distinct(self):
        """Distinct eigenvalues as ``[(lam, [(n, k), ...]), ...]`` in lexicographic
        order of the first index pair."""
        seen: list[tuple[complex, list]] = []
        for n in range(self.n_shells):
            for k in range(self.branches):
                lam = self.values[n, k]
                tol = CLUSTER_RTOL * (1 + abs(lam))
                for item in seen:
                    if abs(item[0] - lam) <= tol:
                        item[1].append((n, k + 1))
                        break
                else:
                    seen.append((complex(lam), [(n, k + 1)]))
        return seen
