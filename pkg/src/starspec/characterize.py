"""Numbering of raw eigenvalue multisets and admissibility checks.

A finite multiset cannot prove square-summability of the remainders, so the
verdict uses a plateau heuristic: the last tenth of the shells may add at most
5% to the partial sum of squared remainders. Fewer than 50 shells give an
indeterminate verdict.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .asymptotics import AsymptoticTemplate, HClass, HConfiguration, fit_remainders
from .errors import ShellOverflow, SplitFailure, ValidationError
from .forward import mu
from .model import Spectrum
from .roots import ordered_assignment

LOW_SHELLS = 3
MIN_SHELLS = 50
PLATEAU_LIMIT = 0.05
SPLIT_TOL = 1e-6


def _principal_sqrt(lam):
    r = np.sqrt(np.asarray(lam, dtype=complex))
    return np.where(r.real < 0, -r, r)


def _template_sqrt(template: AsymptoticTemplate, n: np.ndarray) -> np.ndarray:
    return np.stack([template.sqrt_value(n, k) for k in range(1, template.branches + 1)], axis=-1)


def assign_numbering(raw, template: AsymptoticTemplate, source: str = "computed") -> Spectrum:
    """Number a raw multiset into shells ``0..N-1`` of ``template.branches`` entries.

    Shells ``n >= 3`` take the entries with ``Re sqrt(lam)`` in
    ``[n - 1/4, n + 3/4)``, matched to branches by minimal total distance to
    the template; the lowest shells are matched jointly.
    """
    raw = np.asarray(raw, dtype=complex).reshape(-1)
    b = template.branches
    if raw.size == 0 or raw.size % b:
        raise ShellOverflow(f"{raw.size} entries do not fill shells of {b}")
    N = raw.size // b
    # lexicographic pre-sort makes the result independent of input order
    raw = raw[np.lexsort((raw.imag, raw.real))]
    rho = _principal_sqrt(raw)
    shell = np.floor(rho.real + 0.25).astype(int)
    n_low = min(LOW_SHELLS, N)
    shell = np.where(shell < n_low, 0, shell)
    table = np.empty((N, b), dtype=complex)
    tmpl = _template_sqrt(template, np.arange(N))

    groups = {n: np.nonzero(shell == n)[0] for n in np.unique(shell)}
    low = groups.pop(0, np.array([], dtype=int))
    if low.size != n_low * b:
        raise ShellOverflow(f"lowest {n_low} shells received {low.size} entries, expected {n_low * b}")
    rows, cols = ordered_assignment(rho[low], tmpl[:n_low])
    flat = np.empty(n_low * b, dtype=complex)
    flat[cols] = raw[low][rows]
    table[:n_low] = flat.reshape(n_low, b)

    for n, idx in sorted(groups.items()):
        if n >= N or idx.size != b:
            raise ShellOverflow(f"shell {n} received {idx.size} entries, expected {b}")
        rows, cols = ordered_assignment(rho[idx], tmpl[n])
        table[n, cols] = raw[idx][rows]
    missing = [n for n in range(n_low, N) if n not in groups]
    if missing:
        raise ShellOverflow(f"shell {missing[0]} received no entries")
    return Spectrum.from_table(table, source=source, meta={"numbering": "template"})


@dataclass
class AdmissibilityReport:
    verdict: str
    reason: str = ""
    numbering: Spectrum | None = None
    plateau: list = field(default_factory=list)
    multiplicities: dict = field(default_factory=dict)

    @property
    def admissible(self) -> bool:
        return self.verdict == "admissible"

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "reason": self.reason,
            "plateau": [float(p) for p in self.plateau],
            "multiplicities": self.multiplicities,
            "shells": None if self.numbering is None else self.numbering.n_shells,
        }


def check_admissible(raw, hconf: HConfiguration) -> AdmissibilityReport:
    """Verdict on whether ``raw`` can be the spectrum for coefficients ``hconf``."""
    if hconf.hclass is HClass.INADMISSIBLE:
        return AdmissibilityReport("inadmissible", f"coefficients: {hconf.reason}")
    template = hconf.forward_template()
    raw = np.asarray(raw, dtype=complex).reshape(-1)
    if raw.size % template.branches:
        return AdmissibilityReport("indeterminate", f"{raw.size} entries do not fill whole shells")
    try:
        spec = assign_numbering(raw, template)
    except ShellOverflow as exc:
        return AdmissibilityReport("inadmissible", f"numbering failed: {exc}")
    mult = spec.multiplicity()
    census = {int(k): int(v) for k, v in zip(*np.unique(mult, return_counts=True))}
    if spec.n_shells < 2:
        return AdmissibilityReport("indeterminate", "tail too short", spec, [], census)
    ratios = fit_remainders(spec, template).plateau_ratio()
    plateau = [float(r) for r in np.real(ratios)]
    if spec.n_shells < MIN_SHELLS:
        return AdmissibilityReport("indeterminate", f"tail too short ({spec.n_shells} < {MIN_SHELLS} shells)",
                                   spec, plateau, census)
    bad = [k + 1 for k, r in enumerate(plateau) if r >= PLATEAU_LIMIT]
    if bad:
        return AdmissibilityReport("inadmissible", f"remainders of branches {bad} do not settle",
                                   spec, plateau, census)
    if spec.n_simple() > spec.n_shells // 2:
        return AdmissibilityReport("inadmissible", "multiple eigenvalues persist into the tail",
                                   spec, plateau, census)
    return AdmissibilityReport("admissible", "", spec, plateau, census)


def degenerate_split(raw, hconf: HConfiguration):
    """Separate the forced Robin-Dirichlet copies from a raw spectrum.

    For repeated coefficients every zero of ``phi_s(pi, .)`` of a repeated
    value appears ``mult - 1`` times in the spectrum regardless of the
    densities. Returns ``(mu_part, lambda_part)``: an array ``(N, copies)`` of
    the removed entries and the remainder numbered against the reduced
    template.
    """
    if hconf.hclass is not HClass.BULLET:
        raise ValidationError("splitting needs repeated coefficients of the admissible kind")
    raw = np.asarray(raw, dtype=complex).reshape(-1)
    m = hconf.m
    if raw.size % m:
        raise SplitFailure(f"{raw.size} entries do not fill shells of {m}")
    N = raw.size // m
    remaining = list(raw)
    removed_cols = []
    for g in hconf.groups:
        if len(g) < 2:
            continue
        nodes = mu(hconf, g[0], N)
        for _ in range(len(g) - 1):
            col = np.empty(N, dtype=complex)
            arr = np.array(remaining)
            keep = np.ones(arr.size, dtype=bool)
            for n, target in enumerate(nodes):
                d = np.abs(arr - target)
                d[~keep] = np.inf
                i = int(np.argmin(d))
                if d[i] > SPLIT_TOL * (1 + abs(target)):
                    raise SplitFailure(f"no spectrum entry matches mu_{n} = {target:.8g} of edge {g[0]}")
                col[n] = arr[i]
                keep[i] = False
            remaining = list(arr[keep])
            removed_cols.append(col)
    mu_part = np.stack(removed_cols, axis=1)
    lambda_part = assign_numbering(np.array(remaining), hconf.template())
    return mu_part, lambda_part
