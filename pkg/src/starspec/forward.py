"""Characteristic functions and spectra of the star-graph problem and its adjoint.

For edge solutions ``phi_j`` the characteristic function is

    Delta(lam) = sum_j (phi_j'(pi) + int p_j phi_j) prod_{s != j} phi_j(pi)

and its zeros, counted with multiplicity, are the eigenvalues. The adjoint
problem (with the argument frozen at the vertex) has its own characteristic
function, evaluated independently here so that the conjugacy of the two
spectra is a genuine check.
"""

from __future__ import annotations

import warnings

import numpy as np

from . import kernel
from .asymptotics import HConfiguration, zh_member
from .errors import ValidationError
from .model import GraphProblem, Spectrum
from .roots import EvenFunction, ShellConfig, shell_spectrum


def _excluded_products(B: np.ndarray) -> np.ndarray:
    """``out[j] = prod_{s != j} B[s]`` without division."""
    m = B.shape[0]
    out = np.ones_like(B)
    for j in range(m):
        for s in range(m):
            if s != j:
                out[j] = out[j] * B[s]
    return out


def _sum_prod(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return np.sum(A * _excluded_products(B), axis=0)


def _sum_prod_derivative(A, dA, B, dB) -> np.ndarray:
    """lam-derivative of ``sum_j A_j prod_{s != j} B_s``."""
    m = B.shape[0]
    out = np.sum(dA * _excluded_products(B), axis=0)
    for j in range(m):
        for s in range(m):
            if s == j:
                continue
            term = A[j] * dB[s]
            for t in range(m):
                if t != j and t != s:
                    term = term * B[t]
            out = out + term
    return out


def _edge_values(h: np.ndarray, lam: np.ndarray):
    """``phi_j(pi)`` and ``phi_j'(pi)`` stacked over edges."""
    B = np.stack([kernel.phi(np.pi, lam, hj) for hj in h])
    D = np.stack([kernel.phi_x(np.pi, lam, hj) for hj in h])
    return B, D


def _edge_derivatives(h: np.ndarray, lam: np.ndarray):
    dB = np.stack([kernel.phi_dlambda(np.pi, lam, hj, 1) for hj in h])
    dD = np.stack([kernel.phi_x_dlambda(np.pi, lam, hj, 1) for hj in h])
    return dB, dD


def _moments(problem: GraphProblem, lam: np.ndarray) -> np.ndarray:
    return np.stack([q.moments(lam, hj) for q, hj in zip(problem.p, problem.h)])


def _quadrature(lam: np.ndarray, K: int):
    rho_max = float(np.max(np.abs(np.sqrt(lam)))) if lam.size else 0.0
    return kernel.gauss_legendre(kernel.quadrature_size(rho_max, K))


def _moment_derivatives(problem: GraphProblem, lam: np.ndarray) -> np.ndarray:
    """``int p_j d/dlam phi_j`` by Gauss-Legendre quadrature."""
    x, w = _quadrature(lam, problem.K)
    C, S = kernel.cs_derivatives(x, lam[..., None], 1)
    out = []
    for q, hj in zip(problem.p, problem.h):
        pw = q(x) * w
        out.append((C[1] + hj * S[1]) @ pw)
    return np.stack(out)


def delta(problem: GraphProblem, lam):
    """Characteristic function of the problem at ``lam`` (broadcasts)."""
    lam = np.asarray(lam, dtype=complex)
    B, D = _edge_values(problem.h, lam)
    return _sum_prod(D + _moments(problem, lam), B)


def delta0(hconf: HConfiguration, lam):
    """Characteristic function with all densities set to zero."""
    lam = np.asarray(lam, dtype=complex)
    B, D = _edge_values(hconf.h_array, lam)
    return _sum_prod(D, B)


def delta_dlambda(problem: GraphProblem, lam):
    """Analytic lam-derivative of :func:`delta`."""
    lam = np.asarray(lam, dtype=complex)
    B, D = _edge_values(problem.h, lam)
    dB, dD = _edge_derivatives(problem.h, lam)
    A = D + _moments(problem, lam)
    dA = dD + _moment_derivatives(problem, lam)
    return _sum_prod_derivative(A, dA, B, dB)


def delta0_dlambda(hconf: HConfiguration, lam):
    lam = np.asarray(lam, dtype=complex)
    h = hconf.h_array
    B, D = _edge_values(h, lam)
    dB, dD = _edge_derivatives(h, lam)
    return _sum_prod_derivative(D, dD, B, dB)


# --------------------------------------------------------------------------
# spectra


def _shell_config(n_low: int | None, box_height: float | None, verify_total: bool) -> ShellConfig:
    cfg = ShellConfig(verify_total=verify_total)
    if n_low is not None:
        cfg.n_low = n_low
    if box_height is not None:
        cfg.box_height = box_height
    return cfg


def _polish_double(table: np.ndarray, dfun) -> int:
    """Refine double eigenvalues in place as simple zeros of the derivative.

    A double zero of ``f`` is only located to about ``sqrt(eps)`` from ``f``
    itself, but it is a simple zero of ``f'``, which a secant iteration
    resolves to full precision. Returns the number of refined eigenvalues.
    """
    spec = Spectrum.from_table(table)
    refined = 0
    for lam, idx in spec.distinct():
        if len(idx) != 2:
            continue
        c = complex(np.mean([table[n, k - 1] for n, k in idx]))
        step = 1e-7 * (1 + abs(c))
        z0, z1 = c, c + step
        g0, g1 = complex(dfun(z0)), complex(dfun(z1))
        for _ in range(30):
            if g1 == g0:
                break
            z0, z1 = z1, z1 - g1 * (z1 - z0) / (g1 - g0)
            g0, g1 = g1, complex(dfun(z1))
            if abs(z1 - z0) <= 1e-15 * (1 + abs(z1)):
                break
        if abs(z1 - c) < 1e-6 * (1 + abs(c)) and abs(g1) <= abs(complex(dfun(c))):
            for n, k in idx:
                table[n, k - 1] = z1
            refined += 1
    return refined


def eigenvalues(problem: GraphProblem, N: int, *, n_low=None, box_height=None, verify_total=True) -> Spectrum:
    """First ``N`` shells of eigenvalues, numbered against the asymptotic template."""
    if N < 1:
        raise ValidationError("need at least one shell")
    fn = EvenFunction(lambda lam: delta(problem, lam), lambda lam: delta_dlambda(problem, lam))
    tmpl = problem.hconf.forward_template()
    seeds = np.stack([tmpl.sqrt_value(np.arange(N), k) for k in range(1, tmpl.branches + 1)], axis=1)
    table, meta = shell_spectrum(fn, seeds, _shell_config(n_low, box_height, verify_total))
    meta.update(generator="eigenvalues", shells=N,
                refined_doubles=_polish_double(table, lambda z: delta_dlambda(problem, z)))
    return Spectrum.from_table(table, source="computed", meta=meta)


def mu(hconf: HConfiguration, j: int, N: int, *, verify_total=True) -> np.ndarray:
    """First ``N`` zeros of ``phi_j(pi, .)`` (edge index ``j`` is 0-based)."""
    hj = hconf.h_array[j]
    member, margin = zh_member(hj)
    if member:
        warnings.warn(f"h[{j}] = {hj} lies in the exceptional set; zeros may be multiple (margin {margin:.1e})")
    fn = EvenFunction(
        lambda lam: kernel.phi(np.pi, lam, hj),
        lambda lam: kernel.phi_dlambda(np.pi, lam, hj, 1),
    )
    nh = np.arange(N) + 0.5
    seeds = (nh + hj / (np.pi * nh))[:, None]
    table, _ = shell_spectrum(fn, seeds, ShellConfig(verify_total=verify_total))
    return table[:, 0]


# --------------------------------------------------------------------------
# adjoint problem


def _lstar_parts(problem: GraphProblem, lam: np.ndarray):
    """``g_j(pi)`` and ``g_j'(pi)`` for the adjoint, where
    ``g_j(x) = int_0^x sin(rho (x - t))/rho conj(p_j(t)) dt``."""
    l = np.arange(problem.K + 1)
    sign = (-1.0) ** l
    rho = np.sqrt(lam)[..., None]
    cpart, spart = kernel._moment_parts_rho(l, rho)
    g, dg = [], []
    for q in problem.p:
        c = np.conj(q.padded(problem.K)) * sign
        g.append(spart @ c)
        dg.append(cpart @ c)
    return np.stack(g), np.stack(dg)


def lstar_delta(problem: GraphProblem, lam):
    """Characteristic function of the adjoint problem."""
    lam = np.asarray(lam, dtype=complex)
    hbar = np.conj(problem.h)
    B, D = _edge_values(hbar, lam)
    g, dg = _lstar_parts(problem, lam)
    return _sum_prod((1 - g) * D + dg * B, B)


def _lstar_part_derivatives(problem: GraphProblem, lam: np.ndarray):
    # g(pi) = int S(pi - t) conj p(t) dt ; g'(pi) = int C(pi - t) conj p(t) dt
    x, w = _quadrature(lam, problem.K)
    C, S = kernel.cs_derivatives(np.pi - x, lam[..., None], 1)
    dg, ddg = [], []
    for q in problem.p:
        pw = np.conj(q(x)) * w
        dg.append(S[1] @ pw)
        ddg.append(C[1] @ pw)
    return np.stack(dg), np.stack(ddg)


def lstar_delta_dlambda(problem: GraphProblem, lam):
    lam = np.asarray(lam, dtype=complex)
    hbar = np.conj(problem.h)
    B, D = _edge_values(hbar, lam)
    dB, dD = _edge_derivatives(hbar, lam)
    g, dg = _lstar_parts(problem, lam)
    g1, dg1 = _lstar_part_derivatives(problem, lam)
    A = (1 - g) * D + dg * B
    dA = -g1 * D + (1 - g) * dD + dg1 * B + dg * dB
    return _sum_prod_derivative(A, dA, B, dB)


def lstar_eigenvalues(problem: GraphProblem, N: int, *, n_low=None, box_height=None, verify_total=True) -> Spectrum:
    """Spectrum of the adjoint problem, numbered like :func:`eigenvalues` of the
    conjugate template."""
    fn = EvenFunction(lambda lam: lstar_delta(problem, lam), lambda lam: lstar_delta_dlambda(problem, lam))
    tmpl = problem.hconf.forward_template()
    seeds = np.stack([tmpl.sqrt_value(np.arange(N), k) for k in range(1, tmpl.branches + 1)], axis=1)
    seeds = np.conj(seeds)
    if N < 1:
        raise ValidationError("need at least one shell")
    table, meta = shell_spectrum(fn, seeds, _shell_config(n_low, box_height, verify_total))
    meta.update(generator="lstar_eigenvalues", shells=N,
                refined_doubles=_polish_double(table, lambda z: lstar_delta_dlambda(problem, z)))
    return Spectrum.from_table(table, source="computed", meta=meta)
