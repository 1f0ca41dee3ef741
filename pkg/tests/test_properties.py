"""Property-based checks of symmetries that hold for every instance."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from starspec import forward, kernel
from starspec.characterize import assign_numbering
from starspec.model import CosineSeries, GraphProblem

finite = dict(allow_nan=False, allow_infinity=False)
small_complex = st.complex_numbers(max_magnitude=3, **finite)
lam_values = st.complex_numbers(max_magnitude=200, **finite)
coefs = st.lists(small_complex, min_size=1, max_size=4)


@given(x=st.floats(0, np.pi), rho=st.complex_numbers(max_magnitude=30, **finite), h=small_complex)
def test_phi_is_even_in_rho(x, rho, h):
    for fn in (kernel.phi_rho, kernel.phi_x_rho):
        a, b = fn(x, rho, h), fn(x, -rho, h)
        assert abs(a - b) <= 1e-12 * (1 + abs(a))


@given(lam=lam_values, h=small_complex, l=st.integers(0, 12))
def test_moments_even_in_rho(lam, h, l):
    rho = np.sqrt(complex(lam))
    a = kernel.cos_moment_rho(l, rho, h)
    b = kernel.cos_moment_rho(l, -rho, h)
    assert abs(a - b) <= 1e-11 * (1 + abs(a))


@settings(deadline=None, max_examples=40)
@given(lam=lam_values, h=st.lists(small_complex, min_size=2, max_size=4), data=st.data())
def test_delta_conjugation_and_permutation(lam, h, data):
    p = [data.draw(coefs) for _ in h]
    problem = GraphProblem.create(h, p)
    value = forward.delta(problem, lam)
    conj = GraphProblem.create(np.conj(h), [np.conj(c) for c in p])
    assert abs(forward.delta(conj, np.conj(lam)) - np.conj(value)) <= 1e-10 * (1 + abs(value))
    perm = data.draw(st.permutations(range(len(h))))
    shuffled = GraphProblem.create([h[i] for i in perm], [p[i] for i in perm])
    assert abs(forward.delta(shuffled, lam) - value) <= 1e-10 * (1 + abs(value))


@settings(deadline=None, max_examples=30)
@given(lam=lam_values, a=coefs, b=coefs, t=st.floats(-2, 2))
def test_delta_is_affine_in_density(lam, a, b, t):
    h = [0.0, 1.0]
    K = max(len(a), len(b)) - 1
    qa, qb = CosineSeries(a).padded(K), CosineSeries(b).padded(K)
    da = forward.delta(GraphProblem.create(h, [qa, [0.0]]), lam)
    db = forward.delta(GraphProblem.create(h, [qb, [0.0]]), lam)
    mixed = forward.delta(GraphProblem.create(h, [(1 - t) * qa + t * qb, [0.0]]), lam)
    expect = (1 - t) * da + t * db
    assert abs(mixed - expect) <= 1e-9 * (1 + abs(da) + abs(db))


@settings(deadline=None, max_examples=8)
@given(h=st.lists(st.floats(-2, 2), min_size=2, max_size=3, unique=True).filter(
    lambda v: min(abs(a - b) for i, a in enumerate(v) for b in v[i + 1:]) > 0.2))
def test_real_kirchhoff_spectrum_is_real_and_order_free(h):
    problem = GraphProblem.create(h)
    spec = forward.eigenvalues(problem, 5)
    assert np.max(np.abs(spec.flat().imag)) < 1e-9
    rng = np.random.default_rng(0)
    renumbered = assign_numbering(rng.permutation(spec.flat()), problem.hconf.forward_template())
    assert np.array_equal(renumbered.table(), spec.table())
