import numpy as np
import pytest

from starspec import forward, products
from starspec.asymptotics import AsymptoticTemplate
from starspec.errors import InsufficientShells, ValidationError
from starspec.model import Spectrum

PROBES = np.array([0.3 + 0.1j, 2.0, 4.0, 7.7 - 2j, 30 + 5j, -12.0, 0.0, 100.25])


def test_euler_sine_and_cosine():
    n = np.arange(400)
    rho = np.sqrt(PROBES.astype(complex))
    s = products.branch_factor(PROBES, n**2.0, "sine", 0.0, 4000)
    c = products.branch_factor(PROBES, (n + 0.5) ** 2, "cosine", 0.0, 4000)
    assert np.allclose(s, -rho * np.sin(np.pi * rho), rtol=1e-10, atol=1e-12)
    assert np.allclose(c, np.cos(np.pi * rho), rtol=1e-10, atol=1e-12)


def test_value_at_reference_zero_is_finite():
    # lam = 4 is a zero of the reference sine product; a shifted spectrum must not vanish there
    n = np.arange(200)
    vals = (n + 0.1 / (np.pi * np.maximum(n, 1))) ** 2
    out = products.branch_factor(np.array([4.0, 4.0 + 1e-10]), vals, "sine", 0.1, 2000)
    assert np.all(np.isfinite(out))
    assert abs(out[0] - out[1]) < 1e-8 * abs(out[0])


def test_analytic_tail_equals_long_direct_product():
    z = 0.4 - 0.2j
    n_long = np.arange(20000)
    long_vals = products.template_values("cosine", n_long, z)
    short = products.branch_factor(PROBES, long_vals[:50], "cosine", z, 50)
    longer = products.branch_factor(PROBES, long_vals, "cosine", z, 20000)
    assert np.allclose(short, longer, rtol=1e-10)


def test_second_order_offset_recovered():
    n = np.arange(300)
    vals = products.template_values("sine", np.maximum(n, 1), 0.7, 0.013 - 0.002j)
    # lam_n ~ n**2 carries round-off eps * n**2, magnified by n**2 in the estimate
    assert products.second_order_offset(vals, "sine", 0.7) == pytest.approx(0.013 - 0.002j, abs=1e-6)


def test_product_matches_forward(star3):
    problem, spec = star3
    pcf = products.product_charfn(spec, problem.hconf)
    exact = forward.delta(problem, PROBES)
    assert np.max(np.abs(pcf(PROBES) - exact) / np.abs(exact)) < 1e-8
    assert products.delta_from_spectrum(pcf, 2.0) == pytest.approx(pcf(2.0))


def test_leading_forms_vanish_for_exact_template():
    tmpl = AsymptoticTemplate(0.0, (0.0, 0.0))
    n = np.arange(500)
    table = np.stack([n**2.0, (n + 0.5) ** 2, (n + 0.5) ** 2], axis=1)
    pcf = products.ProductCharFn(Spectrum.from_table(table), tmpl, fit_tail=False)
    assert pcf.offsets == [0.0, 0.0, 0.0]
    assert products.leading_form_check(pcf, np.linspace(0.3, 12.3, 25))["max"] < 1e-9


def test_truncation_validation(star3):
    problem, spec = star3
    with pytest.raises(InsufficientShells):
        products.product_charfn(spec, problem.hconf, n_direct=301)
    with pytest.raises(ValidationError):
        products.product_charfn(spec, problem.hconf, n_direct=100, n_tail=50)
