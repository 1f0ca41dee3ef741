"""Stationary roots of the Robin coefficients and eigenvalue asymptotics.

For coefficients ``h`` the large eigenvalues sit near the template

    sqrt(lam_n1) = n + z1 / (pi n)
    sqrt(lam_nk) = n + 1/2 + z_k / (pi (n + 1/2)),   k >= 2,

where ``z1`` is the (multiplicity-weighted) mean of ``h`` and ``z_k`` are the
roots of ``P(z) = d/dz prod (z - h_j)`` (deflated by repeated factors when
``h`` has repeats).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import AdmissibilityError, NewtonDivergence, RootFindingFailure, ValidationError

DISTINCT_TOL = 1e-10
# a double root of a polynomial is only resolved to about sqrt(machine epsilon),
# so comparisons involving the stationary roots use a looser tolerance
ROOT_TOL = 1e-7
ZH_TOL = 1e-8
ZH_DEPTH = 20


class HClass(enum.Enum):
    STAR = "star"
    BULLET = "bullet"
    INADMISSIBLE = "inadmissible"


def _group_equal(h: np.ndarray, tol: float) -> list[list[int]]:
    groups: list[list[int]] = []
    for j, hj in enumerate(h):
        for g in groups:
            if abs(h[g[0]] - hj) <= tol * (1 + abs(hj)):
                g.append(j)
                break
        else:
            groups.append([j])
    return groups


def _poly_roots(coeffs: np.ndarray) -> np.ndarray:
    """Companion-matrix roots plus one Newton polish (coefficients highest first)."""
    coeffs = np.asarray(coeffs, dtype=complex)
    if len(coeffs) <= 1:
        return np.zeros(0, dtype=complex)
    roots = np.roots(coeffs).astype(complex)
    d = np.polyder(coeffs)
    for _ in range(2):
        dv = np.polyval(d, roots)
        ok = dv != 0
        roots[ok] = roots[ok] - np.polyval(coeffs, roots[ok]) / dv[ok]
    return roots


def deflated_polynomial(values: np.ndarray, mult: np.ndarray) -> np.ndarray:
    """``(prod (z-h)^(m-1))^-1 d/dz prod (z-h)^m`` as coefficients, highest first.

    Equals ``sum_s m_s prod_{k != s} (z - h_k)`` over the distinct values.
    """
    out = np.zeros(len(values), dtype=complex)
    for s in range(len(values)):
        others = np.delete(values, s)
        term = np.poly(others) if len(others) else np.array([1.0 + 0j])
        out[-len(term):] += mult[s] * term
    return out


@dataclass(frozen=True)
class AsymptoticTemplate:
    """Leading-order eigenvalue template: ``z1`` and the stationary roots."""

    z1: complex
    zk: tuple = ()

    @property
    def branches(self) -> int:
        return 1 + len(self.zk)

    def sqrt_value(self, n, k: int):
        """Template ``sqrt(lam0_nk)`` for branch ``k`` (1-based); ``n >= 1`` for k = 1."""
        n = np.asarray(n, dtype=float)
        if k == 1:
            with np.errstate(divide="ignore", invalid="ignore"):
                val = n + self.z1 / (np.pi * n)
            # n = 0 has no asymptotic meaning; use the small-rho zero of
            # -rho sin(pi rho) + z1 cos(pi rho) as a placeholder
            return np.where(n == 0, np.sqrt(complex(self.z1) / np.pi), val)
        nh = n + 0.5
        return nh + self.zk[k - 2] / (np.pi * nh)

    def value(self, n, k: int):
        return self.sqrt_value(n, k) ** 2

    def table(self, n_shells: int) -> np.ndarray:
        """Array ``(n_shells, branches)`` of template eigenvalues."""
        n = np.arange(n_shells)
        return np.stack([self.value(n, k) for k in range(1, self.branches + 1)], axis=1)


@dataclass(frozen=True)
class HConfiguration:
    """Robin coefficients with their admissibility class.

    ``groups`` lists the indices of equal coefficients (in order of first
    appearance); ``S`` are the representatives and ``mult`` the group sizes.
    """

    h: tuple
    hclass: HClass
    groups: tuple
    z1: complex
    zk: tuple
    reason: str = ""
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def m(self) -> int:
        return len(self.h)

    @property
    def S(self) -> tuple:
        return tuple(g[0] for g in self.groups)

    @property
    def mult(self) -> tuple:
        return tuple(len(g) for g in self.groups)

    @property
    def h_array(self) -> np.ndarray:
        return np.asarray(self.h, dtype=complex)

    def template(self) -> AsymptoticTemplate:
        """Template of the reduced (deflated) characteristic function."""
        return AsymptoticTemplate(self.z1, tuple(self.zk))

    def forward_template(self) -> AsymptoticTemplate:
        """Template for the full spectrum, including the Dirichlet-zero copies
        forced by repeated coefficients."""
        copies = []
        for g in self.groups:
            copies.extend(self.h[g[0]] for _ in g[1:])
        return AsymptoticTemplate(self.z1, tuple(self.zk) + tuple(copies))

    def require(self, *classes: HClass) -> None:
        if self.hclass not in classes:
            names = ", ".join(c.value for c in classes)
            detail = f" ({self.reason})" if self.reason else ""
            raise AdmissibilityError(f"coefficients of class {self.hclass.value}{detail}; need {names}")


def _pairwise_distinct(values, tol) -> bool:
    values = list(values)
    for a in range(len(values)):
        for b in range(a + 1, len(values)):
            if abs(values[a] - values[b]) <= tol * (1 + abs(values[a])):
                return False
    return True


def stationary_roots(h) -> np.ndarray:
    """Roots of the (deflated) derivative polynomial of ``prod (z - h_j)``."""
    h = np.asarray(h, dtype=complex)
    groups = _group_equal(h, DISTINCT_TOL)
    values = np.array([h[g[0]] for g in groups])
    mult = np.array([len(g) for g in groups])
    coeffs = deflated_polynomial(values, mult)
    roots = _poly_roots(coeffs)
    scale = np.max(np.abs(coeffs))
    resid = np.abs(np.polyval(coeffs, roots))
    bound = 1e-12 * scale * np.maximum(1.0, np.abs(roots)) ** (len(coeffs) - 1)
    if np.any(resid > bound):
        raise RootFindingFailure(f"stationary roots residual {resid.max():.2e} too large")
    return roots


def classify_h(h) -> HConfiguration:
    h = tuple(complex(v) for v in h)
    if len(h) < 2:
        raise ValidationError("a star graph needs at least two edges")
    if not all(np.isfinite(v) for v in h):
        raise ValidationError("Robin coefficients must be finite")
    arr = np.asarray(h, dtype=complex)
    groups = _group_equal(arr, DISTINCT_TOL)
    mult = np.array([len(g) for g in groups])
    values = np.array([arr[g[0]] for g in groups])
    z1 = complex(np.sum(mult * values) / np.sum(mult))
    zk = tuple(complex(z) for z in stationary_roots(arr))
    # deterministic branch order: by real part, then imaginary part
    zk = tuple(sorted(zk, key=lambda z: (round(z.real, 12), round(z.imag, 12))))
    distinct = _pairwise_distinct(list(values) + list(zk), ROOT_TOL)
    groups_t = tuple(tuple(g) for g in groups)
    if len(groups) == len(h):
        hclass = HClass.STAR if distinct else HClass.INADMISSIBLE
        reason = "" if distinct else "coefficients collide with stationary roots"
    elif not distinct:
        hclass, reason = HClass.INADMISSIBLE, "representatives collide with stationary roots"
    elif not _pairwise_distinct([z1] + list(values) + list(zk), ROOT_TOL):
        hclass, reason = HClass.INADMISSIBLE, "mean z1 collides with a coefficient or stationary root"
    else:
        hclass, reason = HClass.BULLET, ""
    return HConfiguration(h=h, hclass=hclass, groups=groups_t, z1=z1, zk=zk, reason=reason)


def asymptotic_spectrum(template: AsymptoticTemplate, N: int):
    """Template eigenvalues for shells ``0..N-1`` as a :class:`~starspec.model.Spectrum`.

    The ``n = 0`` entry of branch 1 is a placeholder (flagged in the metadata).
    """
    from .model import Spectrum

    if N < 1:
        raise ValidationError("need at least one shell")
    table = template.table(N)
    return Spectrum.from_table(table, source="template", meta={"placeholder": [(0, 1)]})


# --------------------------------------------------------------------------
# the exceptional set for simple Dirichlet zeros


def _sin_eq_roots(K: int) -> np.ndarray:
    """First ``K`` roots of ``sin(r) = r`` in the first quadrant."""
    out = []
    for k in range(1, K + 1):
        xi = (2 * k + 0.5) * np.pi
        r = xi + 1j * np.log(2 * xi)
        for _ in range(50):
            f = np.sin(r) - r
            step = f / (np.cos(r) - 1)
            r = r - step
            if abs(step) < 1e-15 * abs(r):
                break
        else:
            raise NewtonDivergence(f"sin(r) = r root {k} did not converge")
        out.append(r)
    return np.array(out)


def zh_elements(K: int = ZH_DEPTH) -> np.ndarray:
    """Elements ``-r cot(r/2) / (2 pi)`` of the exceptional set for the first
    ``K`` roots ``r`` and their conjugates."""
    if K < 1:
        raise ValidationError("depth must be positive")
    r = _sin_eq_roots(K)
    vals = -r / np.tan(r / 2) / (2 * np.pi)
    return np.concatenate([vals, np.conj(vals)])


def zh_member(hj: complex, K: int = ZH_DEPTH, tol: float = ZH_TOL) -> tuple[bool, float]:
    """Whether ``hj`` lies (numerically) in the exceptional set; returns ``(member, margin)``."""
    margin = float(np.min(np.abs(zh_elements(K) - complex(hj))))
    return margin < tol, margin


# --------------------------------------------------------------------------
# remainders


# relative accuracy assumed for sqrt(lam) when separating remainders from round-off
ROUNDOFF = 1e-13


@dataclass
class Remainders:
    """Remainder sequences ``kappa[n, k]`` (rows n = 1..N-1) and their l2 profiles.

    ``floor`` is the size of ``kappa`` explained by round-off alone; the
    plateau test only counts the part of ``|kappa|`` above it.
    """

    kappa: np.ndarray
    profile: np.ndarray
    floor: np.ndarray

    def plateau_ratio(self) -> np.ndarray:
        """Per branch: last-decile growth of the partial sums of squares over the total."""
        excess = np.maximum(np.abs(self.kappa) - self.floor, 0.0)
        prof = np.cumsum(excess**2, axis=0)
        total = prof[-1]
        n = prof.shape[0]
        start = max(0, int(np.floor(0.9 * n)) - 1)
        growth = total - prof[start]
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(total > 0, growth / total, 0.0)


def fit_remainders(spectrum, template: AsymptoticTemplate) -> Remainders:
    lam = spectrum.table()
    N, mbr = lam.shape
    n = np.arange(1, N, dtype=float)
    root = np.sqrt(lam[1:].astype(complex))
    # choose the root nearest the positive template
    root = np.where(root.real < 0, -root, root)
    kappa = np.empty((N - 1, mbr), dtype=complex)
    kappa[:, 0] = n * (root[:, 0] - n) - template.z1 / np.pi
    nh = n + 0.5
    for k in range(1, mbr):
        kappa[:, k] = n**2 * (root[:, k] - nh - template.zk[k - 1] / (np.pi * nh))
    profile = np.cumsum(np.abs(kappa) ** 2, axis=0)
    scale = ROUNDOFF * (n + 1)
    floor = np.empty_like(profile)
    floor[:, 0] = n * scale
    floor[:, 1:] = (n**2 * scale)[:, None]
    return Remainders(kappa=kappa, profile=profile, floor=floor)
