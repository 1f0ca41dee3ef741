"""Edge solutions of ``-y'' = lam * y`` with Robin data at the outer vertex.

Every function here works with ``phi(x, lam, h) = cos(rho x) + h sin(rho x)/rho``
where ``rho**2 == lam``. The exposed values are entire in ``lam``; internally
they are written through ``sinc`` so that no branch of the square root and no
removable singularity needs special casing. All functions broadcast over
numpy arrays.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import OrderTooHigh

NU_MAX = 4
# |lam| x**2 below this uses the power series for lam-derivatives;
# the closed-form recurrence loses digits to cancellation for small |lam| x**2.
SERIES_THRESHOLD = 25.0
_SERIES_TERMS = 48


def _sqrt(lam):
    return np.sqrt(np.asarray(lam, dtype=complex))


def _sinc(z):
    """``sin(pi z) / (pi z)`` for complex input.

    ``np.sinc`` divides by ``pi z`` directly, which overflows for subnormal
    complex arguments; tiny arguments use the two-term Taylor form instead.
    """
    z = np.asarray(z, dtype=complex)
    tiny = np.abs(z) < 1e-8
    safe = np.where(tiny, 1.0, z)
    return np.where(tiny, 1 - (np.pi * z) ** 2 / 6, np.sinc(safe))


# --------------------------------------------------------------------------
# rho-level forms (used directly by the evenness tests)


def phi_rho(x, rho, h):
    rho = np.asarray(rho, dtype=complex)
    x = np.asarray(x, dtype=float)
    return np.cos(rho * x) + h * x * _sinc(rho * x / np.pi)


def phi_x_rho(x, rho, h):
    rho = np.asarray(rho, dtype=complex)
    x = np.asarray(x, dtype=float)
    return -(rho * rho) * x * _sinc(rho * x / np.pi) + h * np.cos(rho * x)


def _moment_parts_rho(l, rho):
    """Return ``(int cos(lx) cos(rho x), int cos(lx) sin(rho x)/rho)`` on [0, pi]."""
    l = np.asarray(l)
    rho = np.asarray(rho, dtype=complex)
    l, rho = np.broadcast_arrays(l, rho)
    zero = l == 0
    den = np.where(zero, 1.0, rho + l)
    ratio = np.where(zero, 1.0, rho / den)
    # (rho - l) / (rho + l), equal to 1 when l == 0
    dratio = np.where(zero, 1.0, (rho - l) / den)
    d = rho - l
    cos_part = np.pi * ratio * _sinc(d)
    sin_part = 0.5 * np.pi**2 * np.where(zero, 1.0, dratio) * _sinc(d / 2) ** 2
    # for l == 0 the sin part is (pi^2/2) sinc(rho/2)^2 with no extra factor
    sin_part = np.where(zero, 0.5 * np.pi**2 * _sinc(rho / 2) ** 2, sin_part)
    return cos_part, sin_part


def cos_moment_rho(l, rho, h):
    c, s = _moment_parts_rho(l, rho)
    return c + h * s


def _self_inner_rho(rho, h):
    rho = np.asarray(rho, dtype=complex)
    lam = rho * rho
    cc = 0.5 * np.pi * (1.0 + _sinc(2 * rho))
    cs = np.pi**2 * _sinc(rho) ** 2
    small = np.abs(lam) < 0.025
    safe = np.where(small, 1.0, lam)
    ss = 0.5 * np.pi * (1.0 - _sinc(2 * rho)) / safe
    if np.any(small):
        # (1 - sinc(2 rho)) / lam as a power series; 14 terms is ample for |4 pi^2 lam| < 1
        series = np.zeros_like(lam)
        for k in range(1, 15):
            series = series + (-1) ** (k + 1) * (4 * np.pi**2) ** k * lam ** (k - 1) / math.factorial(2 * k + 1)
        ss = np.where(small, 0.5 * np.pi * series, ss)
    return cc + h * cs + h * h * ss


# --------------------------------------------------------------------------
# lam-level public surface


def phi(x, lam, h):
    """``phi(x, lam, h) = cos(sqrt(lam) x) + h sin(sqrt(lam) x) / sqrt(lam)``."""
    return phi_rho(x, _sqrt(lam), h)


def phi_x(x, lam, h):
    """x-derivative of :func:`phi`."""
    return phi_x_rho(x, _sqrt(lam), h)


def cos_moment(l, lam, h):
    """``int_0^pi cos(l x) phi(x, lam, h) dx`` in closed form.

    Written as ``pi rho sinc(rho - l)/(rho + l) + ...`` so the confluent case
    ``lam -> l**2`` needs no separate branch.
    """
    return cos_moment_rho(l, _sqrt(lam), h)


def phi_self_inner(lam, h):
    """``int_0^pi phi(x, lam, h)**2 dx`` (bilinear, no conjugation)."""
    return _self_inner_rho(_sqrt(lam), h)


@lru_cache(maxsize=None)
def _series_coefficients(nu: int, odd: bool) -> np.ndarray:
    # coefficient of (-lam x^2)^j in (-1)^nu x^-(2nu[+1]) d^nu/dlam^nu of cos / sin-over-rho
    shift = 1 if odd else 0
    return np.array(
        [
            math.factorial(j + nu) / (math.factorial(j) * math.factorial(2 * j + 2 * nu + shift))
            for j in range(_SERIES_TERMS)
        ]
    )


def cs_derivatives(x, lam, order: int):
    """lam-derivatives of ``C = cos(rho x)`` and ``S = sin(rho x)/rho``.

    Returns two arrays of shape ``(order + 1,) + broadcast_shape`` holding
    ``d^k C / dlam^k`` and ``d^k S / dlam^k`` for ``k = 0..order``.
    """
    x = np.asarray(x, dtype=float)
    lam = np.asarray(lam, dtype=complex)
    x, lam = np.broadcast_arrays(x, lam)
    shape = x.shape
    x = x.reshape(-1)
    lam = lam.reshape(-1)
    C = np.empty((order + 1, x.size), dtype=complex)
    S = np.empty((order + 1, x.size), dtype=complex)
    t = np.abs(lam) * x * x
    series = t < SERIES_THRESHOLD

    rho = np.sqrt(lam)
    C[0] = np.cos(rho * x)
    S[0] = x * _sinc(rho * x / np.pi)

    rec = ~series
    if order and np.any(rec):
        lam_r = lam[rec]
        x_r = x[rec]
        c_prev = C[0][rec]
        s_prev = S[0][rec]
        for k in range(order):
            c_next = -0.5 * x_r * s_prev
            s_next = (x_r * c_prev - (2 * k + 1) * s_prev) / (2 * lam_r)
            C[k + 1][rec] = c_next
            S[k + 1][rec] = s_next
            c_prev, s_prev = c_next, s_next

    if order and np.any(series):
        lam_s = lam[series]
        x_s = x[series]
        u = -lam_s * x_s * x_s
        for k in range(1, order + 1):
            for odd, target in ((False, C), (True, S)):
                coef = _series_coefficients(k, odd)
                acc = np.zeros_like(u)
                for a in coef[::-1]:
                    acc = acc * u + a
                power = 2 * k + (1 if odd else 0)
                target[k][series] = (-1) ** k * x_s**power * acc
    return C.reshape((order + 1,) + shape), S.reshape((order + 1,) + shape)


def _check_order(order):
    if order < 0:
        raise OrderTooHigh(f"derivative order must be non-negative, got {order}")
    if order > NU_MAX:
        raise OrderTooHigh(f"derivative order {order} exceeds the supported maximum {NU_MAX}")


def phi_dlambda(x, lam, h, order: int):
    """``order``-th lam-derivative of :func:`phi`."""
    _check_order(order)
    C, S = cs_derivatives(x, lam, order)
    return C[order] + h * S[order]


def phi_x_dlambda(x, lam, h, order: int):
    """``order``-th lam-derivative of :func:`phi_x`.

    Uses ``phi_x = -lam S + h C`` and the Leibniz rule.
    """
    _check_order(order)
    C, S = cs_derivatives(x, lam, order)
    lam = np.asarray(lam, dtype=complex)
    out = -lam * S[order] + h * C[order]
    if order >= 1:
        out = out - order * S[order - 1]
    return out


def phi_taylor(x, lam, h, order: int):
    """Taylor coefficients ``phi^(k)/k!`` for ``k = 0..order`` (stacked on axis 0)."""
    _check_order(order)
    C, S = cs_derivatives(x, lam, order)
    fact = np.array([math.factorial(k) for k in range(order + 1)], dtype=float)
    fact = fact.reshape((-1,) + (1,) * (C.ndim - 1))
    return (C + h * S) / fact


def phi_x_taylor(x, lam, h, order: int):
    """Taylor coefficients of :func:`phi_x` in lam."""
    _check_order(order)
    C, S = cs_derivatives(x, lam, order)
    lam = np.asarray(lam, dtype=complex)
    out = np.empty_like(C)
    for k in range(order + 1):
        val = -lam * S[k] + h * C[k]
        if k >= 1:
            val = val - k * S[k - 1]
        out[k] = val / math.factorial(k)
    return out


@lru_cache(maxsize=64)
def gauss_legendre(n: int):
    """Gauss-Legendre nodes and weights mapped to [0, pi]."""
    t, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * np.pi * (t + 1.0), 0.5 * np.pi * w


def quadrature_size(rho_abs: float, l_max: int = 0) -> int:
    """Node count that resolves ``cos(l x)`` times an edge solution at ``|rho|``."""
    return int(min(4000, 1.2 * (rho_abs + l_max) + 60))
