"""Reconstruction of all densities at once from root-function chains.

Every eigenvalue ``lam`` with multiplicity ``q`` carries a chain of vector
functions ``y<0>, ..., y<q-1>`` satisfying the Robin and continuity
conditions, with

    -y<0>'' = lam y<0>,   -y<nu>'' = lam y<nu> + y<nu-1>.

Each chain member obeys the integral matching condition, which reads
``sum_j int p_j y<nu>_j = -sum_j y<nu>_j'(pi)``. Scaling the members to a
Riesz basis ``v_nk`` gives the moment equations ``(p, v_nk) = eta_nk``. These
are solved here by least squares over a cosine dictionary.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import kernel
from .asymptotics import HClass, HConfiguration
from .errors import CaseDetectionAmbiguous, IllConditioned, OrderTooHigh, ValidationError
from .inverse_easy import ReconstructionReport
from .model import CosineSeries, Spectrum

CASE_TOL = 1e-8
AMBIGUITY_TOL = 1e-6
COND_LIMIT = 1e10


def _reciprocal_series(b: np.ndarray, order: int) -> np.ndarray:
    """Taylor coefficients of ``1/b`` given those of ``b`` (``b[0] != 0``)."""
    e = np.zeros(order + 1, dtype=complex)
    e[0] = 1 / b[0]
    for k in range(1, order + 1):
        e[k] = -sum(b[i] * e[k - i] for i in range(1, k + 1)) / b[0]
    return e


@dataclass
class RootChain:
    """Chain attached to one distinct eigenvalue.

    ``coef[j, k]`` are the weights in
    ``y<nu>_j = sum_{i <= nu} coef[j, nu - i] * phi_j^(i)(x, lam) / i!``,
    i.e. the Taylor coefficients of the scalar factor multiplying ``phi_j``.
    ``case`` is ``"i"`` or ``"ii"``; in the latter ``edge`` is the edge whose
    Robin-Dirichlet function vanishes at ``lam``.
    """

    lam: complex
    multiplicity: int
    case: str
    edge: int | None
    h: np.ndarray
    coef: np.ndarray
    indices: tuple = ()

    @property
    def m(self) -> int:
        return self.h.size

    def values(self, nu: int, x) -> np.ndarray:
        """``y<nu>(x)`` as an array ``(m, len(x))``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros((self.m, x.size), dtype=complex)
        for j in range(self.m):
            T = kernel.phi_taylor(x, self.lam, self.h[j], nu)
            for i in range(nu + 1):
                out[j] += self.coef[j, nu - i] * T[i]
        return out

    def dvalues(self, nu: int, x: float) -> np.ndarray:
        """``y<nu>_j'(x)`` for every edge at a single point ``x``."""
        out = np.zeros(self.m, dtype=complex)
        for j in range(self.m):
            T = kernel.phi_x_taylor(x, self.lam, self.h[j], nu)
            out[j] = sum(self.coef[j, nu - i] * T[i] for i in range(nu + 1))
        return out

    def derivative_at_pi(self, nu: int) -> np.ndarray:
        """``y<nu>_j'(pi)`` for every edge."""
        return self.dvalues(nu, np.pi)

    def value_at_pi(self, nu: int) -> np.ndarray:
        out = np.zeros(self.m, dtype=complex)
        for j in range(self.m):
            T = kernel.phi_taylor(np.pi, self.lam, self.h[j], nu)
            out[j] = sum(self.coef[j, nu - i] * T[i] for i in range(nu + 1))
        return out

    def moments(self, nu: int, K: int) -> np.ndarray:
        """``int cos(l x) y<nu>_j(x) dx`` as an array ``(m, K + 1)``."""
        l = np.arange(K + 1)
        if nu == 0:
            return np.stack([self.coef[j, 0] * kernel.cos_moment(l, self.lam, self.h[j]) for j in range(self.m)])
        x, w = kernel.gauss_legendre(kernel.quadrature_size(abs(np.sqrt(complex(self.lam))), K) + 20)
        Y = self.values(nu, x)
        return (Y * w) @ np.cos(np.outer(x, l))


def _amplitude(lam: complex, h: complex) -> tuple[complex, float]:
    val = complex(kernel.phi(np.pi, lam, h))
    dval = complex(kernel.phi_x(np.pi, lam, h))
    return val, abs(val) + abs(dval) / max(1.0, abs(np.sqrt(complex(lam))))


def build_chain(lam: complex, multiplicity: int, h, indices=()) -> RootChain:
    """Chain for eigenvalue ``lam`` of the given multiplicity."""
    h = np.asarray(h, dtype=complex)
    m = h.size
    q = multiplicity
    if q < 1:
        raise ValidationError("multiplicity must be positive")
    if q - 1 > kernel.NU_MAX:
        raise OrderTooHigh(f"multiplicity {q} exceeds the supported maximum {kernel.NU_MAX + 1}")
    vanishing, ambiguous = [], []
    for j in range(m):
        val, amp = _amplitude(lam, h[j])
        if abs(val) < CASE_TOL * amp:
            vanishing.append(j)
        elif abs(val) < AMBIGUITY_TOL * amp:
            ambiguous.append(j)
    if ambiguous:
        raise CaseDetectionAmbiguous(f"phi_j(pi) is small but not negligible at lam={lam:.6g} on edges {ambiguous}")
    if len(vanishing) > 1:
        raise CaseDetectionAmbiguous(f"phi_j(pi) vanishes on several edges {vanishing} at lam={lam:.6g}")

    coef = np.zeros((m, q), dtype=complex)
    if not vanishing:
        for j in range(m):
            b = kernel.phi_taylor(np.pi, lam, h[j], q - 1)
            coef[j] = _reciprocal_series(b, q - 1)
        return RootChain(complex(lam), q, "i", None, h, coef, tuple(indices))

    s = vanishing[0]
    if q > kernel.NU_MAX:
        raise OrderTooHigh(f"multiplicity {q} with a vanishing edge needs derivatives beyond order {kernel.NU_MAX}")
    bs = kernel.phi_taylor(np.pi, lam, h[s], q)
    # phi_s(pi, .) / (. - lam) has Taylor coefficients bs[1:], bs[0] being ~0
    coef[s] = _reciprocal_series(bs[1:], q - 1)
    for j in range(m):
        if j == s:
            continue
        b = kernel.phi_taylor(np.pi, lam, h[j], q - 1)
        e = _reciprocal_series(b, q - 1)
        coef[j, 1:] = e[: q - 1]
    return RootChain(complex(lam), q, "ii", s, h, coef, tuple(indices))


def root_chains(spectrum: Spectrum, hconf: HConfiguration, N: int | None = None) -> list[RootChain]:
    """Chains for the distinct eigenvalues among the first ``N`` shells.

    Chain member ``nu`` is attached to the ``nu``-th index pair of its
    eigenvalue in lexicographic ``(n, k)`` order.
    """
    hconf.require(HClass.STAR)
    spec = spectrum.truncated(N) if N else spectrum
    table = spec.table()
    chains = []
    for lam, idx in spec.distinct():
        centre = complex(np.mean([table[n, k - 1] for n, k in idx]))
        chains.append(build_chain(centre, len(idx), hconf.h_array, idx))
    return chains


def scale_factor(n: int, k: int) -> float:
    """``(-1)^n`` for the first branch, ``(-1)^n / (n + 1/2)`` otherwise."""
    sign = -1.0 if n % 2 else 1.0
    return sign if k == 1 else sign / (n + 0.5)


@dataclass
class ScaledMember:
    n: int
    k: int
    sigma: float
    chain: RootChain
    nu: int

    def values(self, x):
        return self.sigma * self.chain.values(self.nu, x)

    def derivative_at_pi(self):
        return self.sigma * self.chain.derivative_at_pi(self.nu)


def v_scaled(chains: list[RootChain]) -> list[ScaledMember]:
    out = []
    for ch in chains:
        for nu, (n, k) in enumerate(ch.indices):
            out.append(ScaledMember(n, k, scale_factor(n, k), ch, nu))
    out.sort(key=lambda v: (v.n, v.k))
    return out


def eta(members: list[ScaledMember]) -> np.ndarray:
    """``eta_nk = -sum_j v_nk,j'(pi)`` in member order."""
    return np.array([-np.sum(v.derivative_at_pi()) for v in members])


def reconstruct_method1(spectrum: Spectrum, hconf: HConfiguration, N_eq: int | None = None,
                        K_dict: int = 32, *, strict: bool = False):
    """Least-squares solution of ``(p, v_nk) = eta_nk`` over ``cos(l x)``, ``l <= K_dict``.

    Returns ``(series, report)``. With ``strict`` an ill-conditioned system
    raises :class:`IllConditioned`; otherwise it is flagged in the report.
    """
    hconf.require(HClass.STAR)
    N_eq = N_eq or spectrum.n_shells
    if N_eq > spectrum.n_shells:
        raise ValidationError(f"need {N_eq} shells, spectrum has {spectrum.n_shells}")
    if N_eq < 2 * (K_dict + 1):
        raise ValidationError(f"N_eq={N_eq} is too small for a dictionary of size {K_dict + 1}")
    m = hconf.m
    members = v_scaled(root_chains(spectrum, hconf, N_eq))
    rows = np.empty((len(members), m * (K_dict + 1)), dtype=complex)
    for r, v in enumerate(members):
        rows[r] = (v.sigma * v.chain.moments(v.nu, K_dict)).reshape(-1)
    rhs = eta(members)
    colscale = np.linalg.norm(rows, axis=0)
    colscale[colscale == 0] = 1.0
    A = rows / colscale
    sol, _, rank, sv = np.linalg.lstsq(A, rhs, rcond=None)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
    sol = sol / colscale
    coef = sol.reshape(m, K_dict + 1)
    resid = np.abs(rows @ sol - rhs)
    diag = {
        "condition": cond,
        "rank": int(rank),
        "ill_conditioned": bool(cond > COND_LIMIT),
        "chains": len(members),
        "multiple": [(c.lam, c.multiplicity) for c in {id(v.chain): v.chain for v in members}.values()
                     if c.multiplicity > 1],
        "eta_plateau": _plateau(rhs),
    }
    if cond > COND_LIMIT:
        msg = f"moment system condition number {cond:.2e} exceeds {COND_LIMIT:.0e}"
        if strict:
            raise IllConditioned(msg)
        warnings.warn(msg, RuntimeWarning)
    report = ReconstructionReport("riesz", N_eq, K_dict, [float(resid.max())] * m, diag)
    return [CosineSeries(c) for c in coef], report


def _plateau(values: np.ndarray) -> float:
    prof = np.cumsum(np.abs(values) ** 2)
    if prof[-1] == 0:
        return 0.0
    start = max(0, int(math.floor(0.9 * prof.size)) - 1)
    return float((prof[-1] - prof[start]) / prof[-1])
