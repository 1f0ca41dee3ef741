"""Reference computations that share no code with the package.

Everything here is deliberately slow and simple: adaptive quadrature,
numerical ODE integration, bracketing root finders and finite differences.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.integrate import IntegrationWarning, quad, solve_ivp
from scipy.optimize import brentq


def cquad(f, a, b, **kw):
    """Adaptive quadrature of a complex integrand."""
    kw.setdefault("limit", 400)
    kw.setdefault("epsabs", 1e-13)
    kw.setdefault("epsrel", 1e-12)
    with warnings.catch_warnings():
        # near-cancelling integrands trigger quad's round-off notice; the
        # returned values are still far inside the tolerances used here
        warnings.simplefilter("ignore", IntegrationWarning)
        re = quad(lambda t: np.real(f(t)), a, b, **kw)[0]
        im = quad(lambda t: np.imag(f(t)), a, b, **kw)[0]
    return re + 1j * im


def phi_ref(x, lam, h):
    """Closed form evaluated through ``rho = sqrt(lam)`` with ``rho != 0``."""
    rho = np.sqrt(complex(lam))
    if rho == 0:
        return 1 + h * x
    return np.cos(rho * x) + h * np.sin(rho * x) / rho


def cos_moment_quad(l, lam, h):
    return cquad(lambda t: np.cos(l * t) * phi_ref(t, lam, h), 0.0, np.pi)


def self_inner_quad(lam, h):
    return cquad(lambda t: phi_ref(t, lam, h) ** 2, 0.0, np.pi)


def richardson_derivative(f, z, order, step=1e-2, levels=4):
    """``order``-th derivative of an analytic ``f`` at ``z`` by central
    differences on a shrinking step, extrapolated with Richardson's scheme."""
    from math import comb

    def central(s):
        k = np.arange(order + 1)
        weights = np.array([(-1) ** int(i) * comb(order, int(i)) for i in k], dtype=float)
        pts = z + (order / 2 - k) * s
        return sum(w * f(p) for w, p in zip(weights, pts)) / s**order

    table = [[central(step / 2**i)] for i in range(levels)]
    for j in range(1, levels):
        for i in range(j, levels):
            prev, cur = table[i - 1][j - 1], table[i][j - 1]
            table[i].append(cur + (cur - prev) / (4**j - 1))
    return table[-1][-1]


def edge_solution(lam, h, p_coef=(), x_end=np.pi):
    """Integrate ``y'' = -lam y`` with ``y(0)=1, y'(0)=h`` alongside
    ``I' = p(x) y`` and return ``(y(pi), y'(pi), I(pi))``."""
    p_coef = np.asarray(p_coef, dtype=complex)

    def p(x):
        return sum(c * np.cos(l * x) for l, c in enumerate(p_coef)) if p_coef.size else 0.0

    def rhs(x, u):
        return [u[1], -lam * u[0], p(x) * u[0]]

    sol = solve_ivp(rhs, (0.0, x_end), [1 + 0j, complex(h), 0j], method="DOP853", rtol=1e-12, atol=1e-13)
    return sol.y[0, -1], sol.y[1, -1], sol.y[2, -1]


def delta_ode(lam, h, p=None):
    """Determinant of the central-vertex conditions for solutions ``c_j y_j``.

    Rows: ``y_1(pi) - y_j(pi) = 0`` for ``j >= 2`` and
    ``sum_j y_j'(pi) + sum_j int p_j y_j = 0``. Up to a sign fixed by ``m``
    this is the characteristic function.
    """
    m = len(h)
    p = p or [()] * m
    vals = [edge_solution(lam, hj, pj) for hj, pj in zip(h, p)]
    M = np.zeros((m, m), dtype=complex)
    for r in range(1, m):
        M[r - 1, 0] = vals[0][0]
        M[r - 1, r] = -vals[r][0]
    for j in range(m):
        M[m - 1, j] = vals[j][1] + vals[j][2]
    return np.linalg.det(M) * (-1) ** (m - 1)


def real_roots(f, a, b, samples=4000):
    """All sign changes of a real function on ``[a, b]`` refined by Brent's method."""
    grid = np.linspace(a, b, samples)
    vals = np.array([f(t) for t in grid])
    roots = []
    for i in range(samples - 1):
        if vals[i] == 0:
            roots.append(grid[i])
        elif vals[i] * vals[i + 1] < 0:
            roots.append(brentq(f, grid[i], grid[i + 1], xtol=1e-14, rtol=1e-15))
    return np.array(roots)


def stationary_points(h):
    """Roots of ``d/dz prod (z - h_j)`` via the companion matrix."""
    poly = np.poly(np.asarray(h, dtype=complex))
    return np.roots(np.polyder(poly))


def chain_residuals(chain, problem):
    """Largest defect of a root-function chain.

    Checks, for every member ``nu``: the differential identity
    ``-y'' = lam y + y<nu-1>`` in the integrated form
    ``y'(x) - y'(0) + int_0^x (lam y + y<nu-1>) = 0`` (adaptive quadrature),
    the Robin condition at ``x = 0``, continuity at the centre and the
    integral matching condition. ``chain`` only needs ``values``,
    ``value_at_pi``, ``derivative_at_pi`` and the first ``x``-derivative
    through ``dvalues``.
    """
    out = []
    for nu in range(chain.multiplicity):
        for x in (0.7, 2.1, np.pi):
            for j in range(chain.m):
                def rhs(t, j=j, nu=nu):
                    prev = chain.values(nu - 1, t)[j, 0] if nu else 0.0
                    return chain.lam * chain.values(nu, t)[j, 0] + prev

                out.append(abs(chain.dvalues(nu, x)[j] - chain.dvalues(nu, 0.0)[j] + cquad(rhs, 0.0, x)))
        y0 = chain.values(nu, 0.0)[:, 0]
        out.extend(np.abs(chain.dvalues(nu, 0.0) - chain.h * y0))
        vpi = chain.value_at_pi(nu)
        out.extend(np.abs(vpi - vpi[0]))
        mc = np.sum(chain.derivative_at_pi(nu))
        for j in range(chain.m):
            mc += cquad(lambda t, j=j: problem.p[j](t) * chain.values(nu, t)[j, 0], 0, np.pi)
        out.append(abs(mc))
    return max(out)
