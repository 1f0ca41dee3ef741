import mpmath as mp
import numpy as np
import pytest

from oracles import cos_moment_quad, phi_ref, richardson_derivative, self_inner_quad
from starspec import kernel
from starspec.errors import OrderTooHigh


@pytest.mark.parametrize("h", [0.0, 1.5, 2 - 1j])
def test_phi_closed_values(h):
    assert kernel.phi(np.pi, 0, h) == pytest.approx(1 + h * np.pi)
    assert kernel.phi(np.pi, 0.25, h) == pytest.approx(2 * h, abs=1e-15)
    assert kernel.phi_x(np.pi, 0, h) == pytest.approx(h)


def test_phi_known_points():
    assert kernel.phi(np.pi, 1, 0) == pytest.approx(-1)
    assert kernel.phi_x(np.pi, 1, 0) == pytest.approx(0, abs=1e-15)
    assert kernel.phi_x(np.pi, 0.25, 1) == pytest.approx(-0.5)


def test_phi_matches_reference_off_origin():
    rng = np.random.default_rng(1)
    for _ in range(50):
        lam = complex(rng.uniform(-30, 400), rng.uniform(-20, 20))
        h = complex(*rng.normal(size=2))
        x = rng.uniform(0, np.pi)
        assert abs(kernel.phi(x, lam, h) - phi_ref(x, lam, h)) <= 1e-12 * (1 + abs(phi_ref(x, lam, h)))


def test_phi_continuous_through_zero():
    tiny = np.array([0, 1e-14, -1e-12 + 1e-13j, 1e-9j])
    vals = kernel.phi(2.0, tiny, 0.7)
    assert np.allclose(vals, 1 + 0.7 * 2.0, atol=1e-8)


def test_cos_moment_closed_values():
    assert kernel.cos_moment(0, 0, 1.0) == pytest.approx(np.pi + np.pi**2 / 2)
    assert kernel.cos_moment(1, 1, 0) == pytest.approx(np.pi / 2)
    assert kernel.cos_moment(3, 9, 0) == pytest.approx(np.pi / 2)


def test_self_inner_closed_values():
    assert kernel.phi_self_inner(0.25, 0) == pytest.approx(np.pi / 2)
    assert kernel.phi_self_inner(0, 0) == pytest.approx(np.pi)


def test_moments_against_quadrature_near_confluence():
    # lam close to l**2 exercises the confluent branch
    for l, lam, h in [(2, 4 + 1e-9, 0.3), (5, 25 - 1e-7j, 1 + 1j), (2, 5.5 - 0.2j, 1 + 1j)]:
        assert abs(kernel.cos_moment(l, lam, h) - cos_moment_quad(l, lam, h)) < 1e-10
    assert abs(kernel.phi_self_inner(3.7, 2 - 1j) - self_inner_quad(3.7, 2 - 1j)) < 1e-10


@pytest.mark.parametrize("order", [1, 2, 3])
@pytest.mark.parametrize("lam", [2.3 + 0.1j, 0.05 - 0.02j, 40 + 3j, -6.0])
def test_dlambda_richardson(order, lam):
    h = 1 - 0.5j
    for fn, dfn in [(kernel.phi, kernel.phi_dlambda), (kernel.phi_x, kernel.phi_x_dlambda)]:
        # larger steps for higher orders keep cancellation error below the target
        ref = richardson_derivative(lambda z: fn(np.pi, z, h), lam, order, step=0.05 * 2 ** (order - 1))
        got = dfn(np.pi, lam, h, order)
        assert abs(got - ref) <= 1e-7 * max(1.0, abs(ref))


def _mp_phi_derivative(x, lam, h, order):
    mp.mp.dps = 40
    hh = mp.mpc(h)

    def f(z):
        r = mp.sqrt(z)
        return mp.cos(r * x) + hh * mp.sin(r * x) / r

    return complex(mp.diff(f, mp.mpc(lam), order))


@pytest.mark.parametrize("side", [1 - 1e-6, 1 + 1e-6])
def test_dlambda_both_paths_near_switch(side):
    # |lam| x**2 = 25 separates the power series from the recurrence
    lam = 25 / np.pi**2 * side
    for order in range(1, kernel.NU_MAX + 1):
        ref = _mp_phi_derivative(np.pi, lam, 0.4, order)
        assert abs(kernel.phi_dlambda(np.pi, lam, 0.4, order) - ref) < 1e-11 * max(1, abs(ref))


def test_dlambda_high_precision_oracle():
    for lam, h in [(40 + 3j, 1 - 0.5j), (-12.5, 0.3), (1e-4 + 1e-4j, 2 - 1j), (250 - 10j, 1j)]:
        for order in range(kernel.NU_MAX + 1):
            ref = _mp_phi_derivative(np.pi, lam, h, order) if order else complex(phi_ref(np.pi, lam, h))
            assert abs(kernel.phi_dlambda(np.pi, lam, h, order) - ref) < 1e-10 * max(1, abs(ref))


def test_order_zero_is_phi():
    assert kernel.phi_dlambda(1.3, 2 + 1j, 0.5, 0) == pytest.approx(kernel.phi(1.3, 2 + 1j, 0.5))


def test_order_limit():
    with pytest.raises(OrderTooHigh):
        kernel.phi_dlambda(1.0, 1.0, 0.0, kernel.NU_MAX + 1)
    with pytest.raises(OrderTooHigh):
        kernel.phi_taylor(1.0, 1.0, 0.0, -1)


def test_taylor_scaling():
    T = kernel.phi_taylor(np.pi, 3 + 1j, 0.2, 3)
    for nu in range(4):
        from math import factorial

        assert T[nu] == pytest.approx(kernel.phi_dlambda(np.pi, 3 + 1j, 0.2, nu) / factorial(nu))


def test_gauss_legendre_integrates_polynomials():
    x, w = kernel.gauss_legendre(10)
    assert np.sum(w * x**5) == pytest.approx(np.pi**6 / 6)
