"""Zeros of even entire functions ``F(rho) = f(rho**2)``.

The spectral problems in this package all reduce to locating the zeros of an
entire function ``f(lam)``. Working in the ``rho = sqrt(lam)`` plane keeps the
zeros roughly unit-spaced, so low zeros are found by argument-principle
subdivision of a symmetric box and the rest by Newton from asymptotic seeds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ContourError, NewtonDivergence, RootCountMismatch, RootFindingFailure

# fractions used to split cells; deliberately off-centre so that split lines
# avoid the real axis and rho = 0, where zeros of real problems accumulate
SPLIT_FRACTIONS = (0.5371, 0.4613, 0.5893, 0.4127)
MAX_PHASE_STEP = np.pi / 5


@dataclass
class EvenFunction:
    """``f(lam)`` and ``f'(lam)`` seen through ``rho``.

    Both callables must accept complex arrays and broadcast elementwise.
    """

    f: Callable
    df: Callable

    def F(self, rho):
        rho = np.asarray(rho, dtype=complex)
        return self.f(rho * rho)

    def dF(self, rho):
        rho = np.asarray(rho, dtype=complex)
        return 2 * rho * self.df(rho * rho)


# --------------------------------------------------------------------------
# argument principle


def _edge_phase(F, a: complex, b: complex, max_rounds: int = 40) -> float:
    length = abs(b - a)
    t = np.linspace(0.0, 1.0, int(24 + 12 * length) + 1)
    vals = F(a + (b - a) * t)
    for _ in range(max_rounds):
        if np.any(vals == 0) or not np.all(np.isfinite(vals)):
            raise ContourError("function vanishes or overflows on the contour")
        ratio = vals[1:] / vals[:-1]
        dtheta = np.angle(ratio)
        bad = (np.abs(dtheta) > MAX_PHASE_STEP) | (np.abs(np.log(np.abs(ratio))) > 0.7)
        if not np.any(bad):
            return float(np.sum(dtheta))
        idx = np.nonzero(bad)[0]
        if np.min(t[idx + 1] - t[idx]) * length < 1e-12 * (1 + max(abs(a), abs(b))):
            raise ContourError("contour passes too close to a zero")
        tm = 0.5 * (t[idx] + t[idx + 1])
        vm = F(a + (b - a) * tm)
        t = np.insert(t, idx + 1, tm)
        vals = np.insert(vals, idx + 1, vm)
    raise ContourError("phase tracking did not resolve the contour")


def winding_number(F, box) -> int:
    """Number of zeros (with multiplicity) of ``F`` inside ``box = (x0, x1, y0, y1)``."""
    x0, x1, y0, y1 = box
    corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
    total = sum(_edge_phase(F, corners[i], corners[(i + 1) % 4]) for i in range(4))
    w = total / (2 * np.pi)
    n = int(round(w))
    if abs(w - n) > 0.1:
        raise ContourError(f"non-integer winding number {w:.3f}")
    return n


# --------------------------------------------------------------------------
# Newton


def newton(F, dF, z0, mult=1, tol: float = 1e-14, maxiter: int = 60):
    """Vectorised (modified) Newton iteration; returns ``(z, converged)``."""
    z = np.array(z0, dtype=complex, ndmin=1)
    mult = np.broadcast_to(np.asarray(mult, dtype=float), z.shape)
    active = np.ones(z.shape, dtype=bool)
    converged = np.zeros(z.shape, dtype=bool)
    small = np.zeros(z.shape, dtype=int)
    for _ in range(maxiter):
        if not np.any(active):
            break
        za = z[active]
        fv = F(za)
        dv = dF(za)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = mult[active] * fv / dv
        zero_f = fv == 0
        step = np.where(zero_f, 0.0, step)
        bad = ~np.isfinite(step)
        step = np.where(bad, 0.0, step)
        z[active] = za - step
        done = np.abs(step) <= tol * (1 + np.abs(za))
        near = np.abs(step) <= 1e-9 * (1 + np.abs(za))
        idx = np.nonzero(active)[0]
        small[idx] = np.where(near, small[idx] + 1, 0)
        # accept once the step is at rounding level, or has stagnated near it
        finished = done | zero_f | (small[idx] >= 3)
        converged[idx[finished]] = True
        failed = bad & ~zero_f
        active[idx[finished | failed]] = False
    return z, converged


# --------------------------------------------------------------------------
# subdivision


@dataclass
class BoxSearch:
    """Recursive argument-principle search for all zeros inside a box."""

    F: Callable
    dF: Callable
    min_size: float = 1e-9
    cluster_radius: float = 1e-6
    max_depth: int = 80
    stats: dict = field(default_factory=lambda: {"cells": 0})

    def count(self, box) -> int:
        self.stats["cells"] += 1
        return winding_number(self.F, box)

    def _newton_in(self, box, count):
        x0, x1, y0, y1 = box
        c = complex(0.5 * (x0 + x1), 0.5 * (y0 + y1))
        z, ok = newton(self.F, self.dF, [c], mult=count)
        if not ok[0]:
            return None
        r = z[0]
        pad = 1e-9 * max(x1 - x0, y1 - y0)
        if x0 - pad <= r.real <= x1 + pad and y0 - pad <= r.imag <= y1 + pad:
            return r
        return None

    def _children(self, box, frac):
        x0, x1, y0, y1 = box
        xm = x0 + frac * (x1 - x0)
        ym = y0 + (1 - frac) * (y1 - y0)
        return [(x0, xm, y0, ym), (xm, x1, y0, ym), (x0, xm, ym, y1), (xm, x1, ym, y1)]

    def _cluster_in(self, box, count):
        """Modified Newton towards a cluster of ``count`` zeros; confirmed by
        the argument principle on a small box around the limit."""
        x0, x1, y0, y1 = box
        z = complex(0.5 * (x0 + x1), 0.5 * (y0 + y1))
        best, best_val = z, abs(self.F(np.array([z]))[0])
        for _ in range(60):
            fv = self.F(np.array([z]))[0]
            dv = self.dF(np.array([z]))[0]
            if fv == 0 or dv == 0 or not np.isfinite(fv / dv):
                break
            z = z - count * fv / dv
            val = abs(self.F(np.array([z]))[0])
            if val < best_val:
                best, best_val = z, val
        if not (x0 <= best.real <= x1 and y0 <= best.imag <= y1):
            return None
        w = self.cluster_radius * (1 + abs(best))
        try:
            c = self.count((best.real - w, best.real + w, best.imag - w, best.imag + w))
        except ContourError:
            return None
        return best if c == count else None

    def solve(self, box, count=None, depth=0):
        """Return ``[(rho, multiplicity), ...]`` for the zeros inside ``box``."""
        if count is None:
            count = self.count(box)
        if count == 0:
            return []
        if count < 0:
            raise RootFindingFailure("negative zero count")
        x0, x1, y0, y1 = box
        size = max(x1 - x0, y1 - y0)
        if count == 1:
            r = self._newton_in(box, count)
            if r is not None:
                return [(r, count)]
        elif size < 1e-2:
            r = self._cluster_in(box, count)
            if r is not None:
                return [(r, count)]
        if size < self.min_size:
            if count > 1:
                return [(complex(0.5 * (x0 + x1), 0.5 * (y0 + y1)), count)]
            raise RootFindingFailure(f"Newton failed in a cell of size {size:.1e}")
        if depth >= self.max_depth:
            raise RootFindingFailure("subdivision depth exhausted")
        last_error = None
        for frac in SPLIT_FRACTIONS:
            kids = self._children(box, frac)
            try:
                counts = [self.count(k) for k in kids]
            except ContourError as exc:
                last_error = exc
                continue
            if sum(counts) != count:
                last_error = RootCountMismatch(f"children count {sum(counts)} != {count}")
                continue
            out = []
            for k, c in zip(kids, counts):
                out.extend(self.solve(k, c, depth + 1))
            return out
        raise RootFindingFailure(f"could not subdivide cell {box}: {last_error}")


def lam_from_rho_roots(rho_roots) -> list[tuple[complex, int]]:
    """Fold ``(rho, mult)`` zeros of an even function into ``(lam, mult)``.

    Each nonzero ``lam`` appears as ``+rho`` and ``-rho``; a zero of order ``q``
    at ``lam = 0`` is a zero of order ``2q`` at ``rho = 0``. Either way the
    lam-multiplicity is half of the total rho-multiplicity.
    """
    items: list[list] = []
    for rho, mult in rho_roots:
        lam = rho * rho
        tol = 1e-7 * (1 + abs(lam))
        for it in items:
            if abs(it[0] - lam) <= tol:
                it[1] += mult
                break
        else:
            items.append([lam, mult])
    out = []
    for lam, mult in items:
        if mult % 2:
            raise RootCountMismatch(f"unpaired zero near lam={lam:.6g}")
        out.append((complex(lam), mult // 2))
    return out


# --------------------------------------------------------------------------
# shell-structured spectra


@dataclass
class ShellConfig:
    n_low: int = 3
    n_low_max: int = 8
    box_height: float = 5.0
    verify_total: bool = True
    window: tuple = (-0.25, 0.75)


def ordered_assignment(points, targets) -> tuple[np.ndarray, np.ndarray]:
    """Minimal-distance matching of ``points`` to ``targets`` with deterministic ties.

    Distances are compared on a 1e-9 grid; among equal-cost matchings the one
    sending points of lower (real, imaginary) order to lower target slots wins.
    Returns ``(point_index, target_index)`` pairs as two arrays.
    """
    points = np.asarray(points, dtype=complex)
    targets = np.asarray(targets, dtype=complex).reshape(-1)
    order = np.lexsort((np.round(points.imag, 9), np.round(points.real, 9)))
    p = points[order]
    quantum = 1e-9 * (1 + np.max(np.abs(targets)))
    cost = np.round(np.abs(p[:, None] - targets[None, :]) / quantum)
    i = np.arange(p.size)[:, None]
    j = np.arange(targets.size)[None, :]
    cost = cost - (i * j) / (4.0 * (p.size * targets.size) ** 2 + 1)
    rows, cols = linear_sum_assignment(cost)
    return order[rows], cols


def _assign(rho_list: np.ndarray, template: np.ndarray) -> np.ndarray:
    """Roots placed in template-slot order."""
    rows, cols = ordered_assignment(rho_list, template)
    out = np.empty(template.size, dtype=complex)
    out[cols] = np.asarray(rho_list)[rows]
    return out.reshape(template.shape)


def _principal(rho):
    rho = np.asarray(rho, dtype=complex)
    return np.where((rho.real < 0) | ((rho.real == 0) & (rho.imag < 0)), -rho, rho)


def shell_spectrum(fn: EvenFunction, template_sqrt: np.ndarray, cfg: ShellConfig | None = None):
    """Zeros of ``fn`` numbered by shells.

    ``template_sqrt[n, k]`` is the asymptotic seed for ``sqrt(lam_nk)``; the
    number of columns is the expected number of zeros per shell. Returns
    ``(lam_table, meta)``.
    """
    cfg = cfg or ShellConfig()
    template_sqrt = np.asarray(template_sqrt, dtype=complex)
    N, b = template_sqrt.shape
    B = cfg.box_height

    # low region: exhaustive subdivision of a symmetric box
    n_low = cfg.n_low
    low_lams = None
    last = None
    while n_low <= cfg.n_low_max:
        R = n_low + cfg.window[0]
        search = BoxSearch(fn.F, fn.dF)
        try:
            count = search.count((-R, R, -B, B))
        except ContourError as exc:
            last = exc
            n_low += 1
            continue
        if count != 2 * b * n_low:
            last = RootCountMismatch(f"low box holds {count} zeros, expected {2 * b * n_low}")
            n_low += 1
            continue
        rho_roots = search.solve((-R, R, -B, B), count)
        low_lams = lam_from_rho_roots(rho_roots)
        break
    if low_lams is None:
        raise RootCountMismatch(f"low-shell sweep failed: {last}")

    expanded = np.array([lam for lam, mult in low_lams for _ in range(mult)], dtype=complex)
    if expanded.size != b * n_low:
        raise RootCountMismatch(f"low region gave {expanded.size} zeros, expected {b * n_low}")

    # template rows beyond N are needed when the low region outgrows N
    if n_low > N:
        extra = template_sqrt[-1:] + np.arange(1, n_low - N + 1)[:, None]
        tmpl = np.vstack([template_sqrt, extra])
    else:
        tmpl = template_sqrt
    rho_table = np.empty((max(N, n_low), b), dtype=complex)
    rho_table[:n_low] = _assign(_principal(np.sqrt(expanded)), tmpl[:n_low])

    fallback_shells = []
    if N > n_low:
        seeds = tmpl[n_low:N].reshape(-1)
        z, ok = newton(fn.F, fn.dF, seeds)
        if not np.all(ok):
            bad = ~ok
            z2, ok2 = newton(fn.F, fn.dF, seeds[bad] * (1 + 1e-3) + 1e-3j)
            z[bad] = z2
            ok[bad] = ok2
        z = _principal(z).reshape(N - n_low, b)
        ok = ok.reshape(N - n_low, b)
        for i, n in enumerate(range(n_low, N)):
            row = z[i]
            lo, hi = n + cfg.window[0], n + cfg.window[1]
            good = bool(np.all(ok[i])) and np.all((row.real >= lo) & (row.real < hi))
            if good and b > 1:
                d = np.abs(row[:, None] - row[None, :]) + np.eye(b)
                good = bool(np.min(d) > 1e-8 * (1 + n))
            if not good:
                fallback_shells.append(n)
                search = BoxSearch(fn.F, fn.dF)
                box = (lo, hi, -B, B)
                count = search.count(box)
                if count != b:
                    raise RootCountMismatch(f"shell {n} holds {count} zeros, expected {b}")
                found = search.solve(box, count)
                row = np.array([r for r, mlt in found for _ in range(mlt)], dtype=complex)
                z[i] = _assign(row, tmpl[n : n + 1])[0]
        rho_table[n_low:N] = z

    rho_table = rho_table[:N]
    lam_table = rho_table * rho_table

    meta = {"n_low": n_low, "fallback_shells": fallback_shells}
    if cfg.verify_total:
        R = N + cfg.window[0]
        total = winding_number(fn.F, (-R, R, -B, B))
        meta["total_count"] = total
        if total != 2 * b * N:
            raise RootCountMismatch(f"total zero count {total} != {2 * b * N}")
    meta["residual"] = _residuals(fn, rho_table, cfg)
    return lam_table, meta


def _residuals(fn: EvenFunction, rho_table: np.ndarray, cfg: ShellConfig) -> float:
    """Largest ``|F(root)|`` relative to ``F``'s size on the root's shell."""
    N = rho_table.shape[0]
    n = np.arange(N, dtype=float)
    probes = np.stack([n + 0.25, n + 0.25 + 0.5j, n + 0.6 - 0.4j], axis=1)
    scale = np.max(np.abs(fn.F(probes)), axis=1)
    res = np.abs(fn.F(rho_table))
    return float(np.max(res / scale[:, None]))
