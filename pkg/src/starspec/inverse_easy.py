"""Edge-by-edge reconstruction of the densities from the spectrum.

At the Robin-Dirichlet zeros ``mu_n`` of edge ``j`` all terms of the
characteristic function but one vanish, so

    chi_n = (Delta - Delta_0)(mu_n) / prod_{s != j} phi_s(pi, mu_n)
          = int_0^pi p_j(x) phi_j(x, mu_n) dx .

The functions ``phi_j(., mu_n)`` are orthogonal in the bilinear sense, which
gives a biorthonormal family in closed form; ``p_j`` is its expansion with
coefficients ``chi_n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernel
from .asymptotics import HClass, HConfiguration, zh_member
from .errors import SmallDenominator, SplitFailure, ValidationError
from .forward import delta0, mu
from .model import CosineSeries, Spectrum
from .products import ProductCharFn, product_charfn

DEFAULT_K_OUT = 64
GUARD = 1e-6


@dataclass
class ChiSequence:
    j: int
    nodes: np.ndarray
    values: np.ndarray

    @property
    def profile(self) -> np.ndarray:
        return np.cumsum(np.abs(self.values) ** 2)

    def plateau_ratio(self) -> float:
        prof = self.profile
        total = prof[-1]
        if total == 0:
            return 0.0
        start = max(0, int(np.floor(0.9 * prof.size)) - 1)
        return float((total - prof[start]) / total)


@dataclass
class BiorthoSystem:
    """Nodes ``mu_n`` of one edge with normalisers ``alpha_n = int phi(., mu_n)^2``."""

    j: int
    h: complex
    nodes: np.ndarray
    alpha: np.ndarray

    def w(self, n: int, x):
        """``w_n(x) = conj(phi(x, mu_n)) / conj(alpha_n)``."""
        return np.conj(kernel.phi(x, self.nodes[n], self.h)) / np.conj(self.alpha[n])

    def delta_matrix(self, quad_nodes: int | None = None) -> np.ndarray:
        """``D[n, l] = int conj(w_n) phi(., mu_l)`` by Gauss-Legendre quadrature."""
        rho_max = float(np.max(np.abs(np.sqrt(self.nodes))))
        x, wq = kernel.gauss_legendre(quad_nodes or kernel.quadrature_size(2 * rho_max) + 40)
        Phi = kernel.phi(x[None, :], self.nodes[:, None], self.h)
        return (Phi / self.alpha[:, None]) @ (Phi * wq).T

    def moments(self, K: int) -> np.ndarray:
        """``M[n, l] = int cos(l x) phi(x, mu_n) dx``."""
        return kernel.cos_moment(np.arange(K + 1)[None, :], self.nodes[:, None], self.h)


@dataclass
class ReconstructionReport:
    method: str
    shells: int
    dictionary_size: int
    residuals: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "method": self.method,
            "shells": self.shells,
            "dictionary_size": self.dictionary_size,
            "residuals": [float(r) for r in self.residuals],
            "diagnostics": self.diagnostics,
        }


def biortho(hconf: HConfiguration, j: int, N: int, nodes=None) -> BiorthoSystem:
    hj = complex(hconf.h_array[j])
    member, margin = zh_member(hj)
    if member:
        raise ValidationError(f"h[{j}] lies in the exceptional set (margin {margin:.1e})")
    if nodes is None:
        nodes = mu(hconf, j, N)
    nodes = np.asarray(nodes, dtype=complex)[:N]
    alpha = kernel.phi_self_inner(nodes, hj)
    if np.any(alpha == 0):
        raise SmallDenominator("vanishing normaliser")
    return BiorthoSystem(j=j, h=hj, nodes=nodes, alpha=alpha)


def _others_product(h: np.ndarray, j: int, others, lam: np.ndarray):
    """``prod_{s in others} phi_s(pi, lam)`` and a size scale for the guard."""
    prod = np.ones(lam.shape, dtype=complex)
    scale = np.ones(lam.shape)
    rho = np.sqrt(lam)
    size = np.abs(np.cos(np.pi * rho)) + np.abs(np.sin(np.pi * rho))
    for s in others:
        prod = prod * kernel.phi(np.pi, lam, h[s])
        scale = scale * size * (1 + abs(h[s]))
    if np.any(np.abs(prod) < GUARD * scale):
        bad = int(np.argmin(np.abs(prod) / scale))
        raise SmallDenominator(f"phi_s(pi, mu_{bad}) nearly vanishes for edge {j}")
    return prod


def chi(spectrum: Spectrum, hconf: HConfiguration, j: int, N: int, *, pcf: ProductCharFn | None = None,
        nodes=None) -> ChiSequence:
    """Samples ``chi_n`` of edge ``j`` (0-based) from a numbered spectrum."""
    hconf.require(HClass.STAR)
    pcf = pcf or product_charfn(spectrum, hconf)
    nodes = mu(hconf, j, N) if nodes is None else np.asarray(nodes, dtype=complex)[:N]
    hat = pcf(nodes) - delta0(hconf, nodes)
    others = [s for s in range(hconf.m) if s != j]
    return ChiSequence(j=j, nodes=nodes, values=hat / _others_product(hconf.h_array, j, others, nodes))


def _solve_edge(system: BiorthoSystem, values: np.ndarray, K_out: int):
    """Tail-corrected biorthogonal expansion projected on ``cos(l x)``, ``l <= K_out``.

    The plain partial sum ``sum_n chi_n w_n`` projects to ``B chi`` with
    ``B[l, n] = M[n, l] / (alpha_n ||cos l||^2)``. Truncating it drops the
    whole tail; solving ``(B M) c = B chi`` instead restores the exact answer
    whenever ``p`` lies in the dictionary.
    """
    M = system.moments(K_out)
    norms = np.full(K_out + 1, np.pi / 2)
    norms[0] = np.pi
    Bmat = (M / system.alpha[:, None]).T / norms[:, None]
    plain = Bmat @ values
    G = Bmat @ M
    coef = np.linalg.solve(G, plain)
    resid = float(np.max(np.abs(M @ coef - values)))
    return coef, plain, resid, float(np.linalg.cond(G))


def reconstruct_method2(spectrum: Spectrum, hconf: HConfiguration, N: int | None = None,
                        K_out: int = DEFAULT_K_OUT, *, n_direct=None, n_tail=None):
    """Recover all densities edge by edge; returns ``(series, report)``."""
    hconf.require(HClass.STAR)
    N = N or spectrum.n_shells
    pcf = product_charfn(spectrum, hconf, n_direct, n_tail)
    series, resids = [], []
    diag = {"plain_sum_shift": [], "chi_plateau": [], "condition": []}
    for j in range(hconf.m):
        system = biortho(hconf, j, N)
        seq = chi(spectrum, hconf, j, N, pcf=pcf, nodes=system.nodes)
        coef, plain, resid, cond = _solve_edge(system, seq.values, K_out)
        series.append(CosineSeries(coef))
        resids.append(resid)
        diag["plain_sum_shift"].append((CosineSeries(plain) - CosineSeries(coef)).norm())
        diag["chi_plateau"].append(seq.plateau_ratio())
        diag["condition"].append(cond)
    report = ReconstructionReport("easy", N, K_out, resids, diag)
    report.diagnostics.update(n_direct=pcf.n_direct, n_tail=pcf.n_tail)
    return series, report


def reconstruct_sums_degenerate(lambda_part: Spectrum, hconf: HConfiguration, N: int | None = None,
                                K_out: int = DEFAULT_K_OUT, *, n_direct=None, n_tail=None):
    """Recover the group sums of densities for repeated coefficients.

    ``lambda_part`` is the spectrum of the reduced characteristic function,
    i.e. the raw spectrum with the forced Robin-Dirichlet copies removed (see
    :func:`starspec.characterize.degenerate_split`). Returns one series per
    group of equal coefficients, in group order.
    """
    hconf.require(HClass.BULLET)
    tmpl = hconf.template()
    if lambda_part.branches != tmpl.branches:
        raise SplitFailure(
            f"reduced spectrum has {lambda_part.branches} branches, expected {tmpl.branches}"
        )
    N = N or lambda_part.n_shells
    pcf = ProductCharFn(lambda_part, tmpl, float(hconf.m), n_direct, n_tail)
    reps = np.array([hconf.h_array[s] for s in hconf.S])
    mult = np.array(hconf.mult, dtype=float)

    def reduced0(lam):
        B = np.stack([kernel.phi(np.pi, lam, h) for h in reps])
        D = np.stack([m * kernel.phi_x(np.pi, lam, h) for m, h in zip(mult, reps)])
        out = np.zeros(lam.shape, dtype=complex)
        for s in range(len(reps)):
            term = D[s]
            for t in range(len(reps)):
                if t != s:
                    term = term * B[t]
            out = out + term
        return out

    series, resids = [], []
    for idx, s in enumerate(hconf.S):
        system = biortho(hconf, s, N)
        hat = pcf(system.nodes) - reduced0(system.nodes)
        others = [t for t in range(len(reps)) if t != idx]
        values = hat / _others_product(reps, idx, others, system.nodes)
        coef, _, resid, _ = _solve_edge(system, values, K_out)
        series.append(CosineSeries(coef))
        resids.append(resid)
    report = ReconstructionReport("easy-sums", N, K_out, resids, {"groups": [list(g) for g in hconf.groups]})
    return series, report
