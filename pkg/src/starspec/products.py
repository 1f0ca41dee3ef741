"""Characteristic function rebuilt from a spectrum as an infinite product.

Each branch is written as a ratio against a classical product with known
zeros,

    D_1(lam) = -rho sin(pi rho) prod_n (lam_n1 - lam) / (n^2 - lam)
    D_k(lam) =  cos(pi rho)     prod_n (lam_nk - lam) / ((n + 1/2)^2 - lam)

so every factor tends to one. The factor at the reference zero nearest to
``lam`` is merged with the prefactor, which keeps the evaluation finite (and
continuous) across reference zeros. Factors between the spectrum's last shell
and ``n_tail`` use the asymptotic template; the rest of the product is summed
analytically from the template through Hurwitz zeta values.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.special import zeta

from .asymptotics import AsymptoticTemplate
from .kernel import _sinc
from .errors import InsufficientShells, ValidationError
from .model import Spectrum

_CHUNK = 128
_TAIL_TERMS = 40


def _reference(kind: str, n: np.ndarray) -> np.ndarray:
    return n.astype(float) ** 2 if kind == "sine" else (n + 0.5) ** 2


def _deflated_prefactor(kind: str, rho: np.ndarray, n0: np.ndarray) -> np.ndarray:
    """Classical prefactor divided by ``(r_{n0} - lam)``, in a cancellation-free form."""
    sign = np.where(n0 % 2 == 0, 1.0, -1.0)
    if kind == "sine":
        d = rho - n0
        safe = np.where(n0 == 0, 1.0, 2 * n0 + d)
        general = rho * sign * np.pi * _sinc(d) / safe
        return np.where(n0 == 0, np.pi * _sinc(rho), general)
    d = rho - n0 - 0.5
    return sign * np.pi * _sinc(d) / (2 * n0 + 1 + d)


def _tail_log(kind: str, lam: np.ndarray, z: complex, M: int, d: complex = 0.0) -> np.ndarray:
    """``sum_{n > M} log((lam0_n - lam)/(r_n - lam))`` for the template zeros
    ``lam0_n = r_n + c_n`` with ``c_n = a + b / r_n``, ``a = 2z/pi`` and
    ``b = z^2/pi^2 + d``.

    With ``x_n = c_n / (r_n - lam)``, ``log(1 + x_n)`` is expanded to third
    order and every power of ``1 / r_n`` is summed by a Hurwitz zeta value.
    """
    if z == 0 and d == 0:
        return np.zeros_like(lam)
    q0 = M + 1 if kind == "sine" else M + 1.5
    a = 2 * z / np.pi
    b = (z / np.pi) ** 2 + d
    out = np.zeros_like(lam)
    for k in (1, 2, 3):
        sign = (-1) ** (k + 1) / k
        for i in range(k + 1):
            coeff = sign * comb(k, i) * a ** (k - i) * b**i
            if coeff == 0:
                continue
            power = np.ones_like(lam)
            for q in range(_TAIL_TERMS):
                term = coeff * comb(q + k - 1, k - 1) * power * zeta(2 * (q + k + i), q0)
                out = out + term
                if np.all(np.abs(term) <= 1e-17 * (1 + np.abs(out))):
                    break
                power = power * lam
    return out


def template_values(kind: str, n: np.ndarray, z: complex, d: complex = 0.0) -> np.ndarray:
    """Template zeros ``(n + z/(pi n))^2`` or ``(n + 1/2 + z/(pi (n + 1/2)))^2``
    plus the second-order offset ``d / r_n``."""
    nt = np.asarray(n, dtype=float)
    shift = 0.0 if kind == "sine" else 0.5
    base = nt + shift
    return (base + z / (np.pi * base)) ** 2 + d / base**2


def second_order_offset(values, kind: str, z: complex, fraction: float = 0.1) -> complex:
    """Estimate ``d`` in ``lam_n = lam0_n + d / r_n + ...`` from the last shells."""
    values = np.asarray(values, dtype=complex)
    N = values.size
    width = max(5, int(fraction * N))
    if N - width < 10:
        return 0.0
    n = np.arange(N - width, N)
    base = n + (0.0 if kind == "sine" else 0.5)
    return complex(np.mean((values[n] - template_values(kind, n, z)) * base**2))


def branch_factor(lam, values, kind: str, z: complex, n_tail: int, d: complex = 0.0) -> np.ndarray:
    """One branch of the product.

    Parameters
    ----------
    lam : array_like
        Evaluation points.
    values : array_like
        Branch zeros ``lam_n`` for ``n = 0..N-1`` (used exactly).
    kind : {"sine", "cosine"}
        Reference product: zeros at ``n**2`` or at ``(n + 1/2)**2``.
    z : complex
        Template constant for shells ``N..n_tail`` and the analytic tail.
    n_tail : int
        Last shell taken from the template; extended automatically when
        ``lam`` lies beyond it.
    d : complex
        Second-order template offset (see :func:`second_order_offset`).
    """
    if kind not in ("sine", "cosine"):
        raise ValidationError(f"unknown branch kind {kind!r}")
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    values = np.asarray(values, dtype=complex)
    N = values.size
    out = np.empty(lam.shape, dtype=complex)
    flat_lam = lam.reshape(-1)
    flat_out = out.reshape(-1)
    for start in range(0, flat_lam.size, _CHUNK):
        L = flat_lam[start : start + _CHUNK]
        rho = np.sqrt(L)
        shift = 0.0 if kind == "sine" else 0.5
        n0 = np.maximum(np.rint(rho.real - shift), 0).astype(int)
        M = max(n_tail, N - 1, int(n0.max()) + 8)
        n = np.arange(M + 1)
        r = _reference(kind, n)
        tmpl = np.empty(M + 1, dtype=complex)
        tmpl[:N] = values[: M + 1]
        if M + 1 > N:
            tmpl[N:] = template_values(kind, n[N:], z, d)
        num = tmpl[None, :] - L[:, None]
        den = r[None, :] - L[:, None]
        rows = np.arange(L.size)
        den[rows, n0] = 1.0
        prod = np.prod(num / den, axis=1)
        flat_out[start : start + _CHUNK] = (
            _deflated_prefactor(kind, rho, n0) * prod * np.exp(_tail_log(kind, L, z, M, d))
        )
    return out


@dataclass
class ProductCharFn:
    """Characteristic function rebuilt from ``spectrum``.

    ``lead`` is the constant in front of the product of branches; it equals
    the number of edges for the characteristic function of the graph. With
    ``fit_tail`` the second-order template offset of each branch is estimated
    from the last retained shells.
    """

    spectrum: Spectrum
    template: AsymptoticTemplate
    lead: float = 1.0
    n_direct: int | None = None
    n_tail: int | None = None
    fit_tail: bool = True

    def __post_init__(self):
        if self.template.branches != self.spectrum.branches:
            raise ValidationError(
                f"template has {self.template.branches} branches, spectrum {self.spectrum.branches}"
            )
        if self.n_direct is None:
            self.n_direct = self.spectrum.n_shells
        if self.n_direct > self.spectrum.n_shells:
            raise InsufficientShells(f"need {self.n_direct} shells, spectrum has {self.spectrum.n_shells}")
        if self.n_direct < 1:
            raise ValidationError("need at least one direct shell")
        if self.n_tail is None:
            self.n_tail = 10 * self.n_direct
        if self.n_tail < self.n_direct:
            raise ValidationError("n_tail must not be smaller than n_direct")
        self.offsets = []
        for k in range(1, self.template.branches + 1):
            kind, z = self._kind(k)
            vals = self.spectrum.table()[: self.n_direct, k - 1]
            self.offsets.append(second_order_offset(vals, kind, z) if self.fit_tail else 0.0)

    def _kind(self, k: int):
        if k == 1:
            return "sine", self.template.z1
        return "cosine", self.template.zk[k - 2]

    def branch(self, k: int, lam) -> np.ndarray:
        """Branch ``k`` (1-based) of the product."""
        vals = self.spectrum.table()[: self.n_direct, k - 1]
        kind, z = self._kind(k)
        return branch_factor(lam, vals, kind, z, self.n_tail, self.offsets[k - 1])

    def __call__(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=complex)
        out = self.lead * np.ones(lam.shape, dtype=complex)
        for k in range(1, self.template.branches + 1):
            out = out * self.branch(k, lam).reshape(lam.shape)
        return out


def product_charfn(spectrum: Spectrum, hconf, n_direct=None, n_tail=None, fit_tail=True) -> ProductCharFn:
    """Product form of the full characteristic function of a numbered spectrum."""
    return ProductCharFn(spectrum, hconf.forward_template(), float(hconf.m), n_direct, n_tail, fit_tail)


def delta_from_spectrum(pcf: ProductCharFn, lam):
    return pcf(lam)


def leading_form_check(pcf: ProductCharFn, rho_probes) -> dict:
    """Residuals of the leading-order forms of each branch at real ``rho``.

    ``D_1 + rho sin(pi rho) - z1 cos(pi rho)`` and
    ``rho^2 (D_k - cos(pi rho)) - z_k rho sin(pi rho)`` should stay bounded
    (and are zero for an exact template spectrum when ``z = 0``).
    """
    rho = np.asarray(rho_probes, dtype=float)
    lam = rho.astype(complex) ** 2
    s, c = np.sin(np.pi * rho), np.cos(np.pi * rho)
    out = {}
    d1 = pcf.branch(1, lam)
    out[1] = float(np.max(np.abs(d1 + rho * s - pcf.template.z1 * c)))
    for k in range(2, pcf.template.branches + 1):
        dk = pcf.branch(k, lam)
        out[k] = float(np.max(np.abs(rho**2 * (dk - c) - pcf.template.zk[k - 2] * rho * s)))
    return {"residuals": out, "max": max(out.values()), "probes": rho.tolist()}
