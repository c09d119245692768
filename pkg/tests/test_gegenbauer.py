import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rigidkit.errors import DomainError, SingularEndpointError
from rigidkit.gegenbauer import (
    decay_fit,
    envelope_constant,
    lipschitz_fit,
    multiplicity,
    phi_derivative,
    phi_eval,
    phi_values,
    sphere_constant,
    spherical_table,
)


def harmonic_dimension(n, k):
    # dim of degree-k harmonic polynomials in n variables
    return math.comb(n + k - 1, k) - (math.comb(n + k - 3, k - 2) if k >= 2 else 0)


def legendre(k, x):
    p0, p1 = 1.0, x
    if k == 0:
        return p0
    for j in range(1, k):
        p0, p1 = p1, ((2 * j + 1) * x * p1 - j * p0) / (j + 1)
    return p1


@pytest.mark.parametrize("n", range(3, 9))
def test_multiplicity_matches_harmonic_dimension(n):
    for k in range(30):
        assert multiplicity(n, k) == harmonic_dimension(n, k)


def test_sphere_constant_normalises_the_measure():
    from scipy.integrate import quad

    for n in range(3, 10):
        total = quad(lambda t: math.sin(t) ** (n - 3), 0, math.pi)[0]
        assert sphere_constant(n) * total == pytest.approx(1.0, rel=1e-12)


def test_n3_is_legendre():
    xs = np.linspace(-1, 1, 41)
    vals = phi_values(3, 40, xs)
    for k in range(41):
        assert np.max(np.abs(vals[k] - [legendre(k, x) for x in xs])) < 1e-12


def test_n4_is_normalised_chebyshev_second_kind():
    theta = np.linspace(0.05, math.pi - 0.05, 23)
    vals = phi_values(4, 25, np.cos(theta))
    for k in range(26):
        expect = np.sin((k + 1) * theta) / ((k + 1) * np.sin(theta))
        assert np.max(np.abs(vals[k] - expect)) < 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 9), st.integers(0, 60), st.floats(-0.999, 0.999))
def test_backends_agree(n, k, x):
    a, ea = phi_eval(n, k, x)
    b, eb = phi_eval(n, k, x, backend="quadrature")
    assert abs(a - b) <= ea + eb + 1e-13


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 9), st.integers(0, 200), st.floats(-1, 1))
def test_bounded_by_one(n, k, x):
    v, e = phi_eval(n, k, x)
    assert abs(v) <= 1 + e


def test_value_at_one():
    for n in (3, 5, 8):
        assert np.allclose(phi_values(n, 50, 1.0), 1.0, atol=1e-13)


@pytest.mark.parametrize("backend", ["recurrence", "quadrature"])
def test_derivative_against_central_difference(backend):
    h = 1e-6
    for n, k, x in [(3, 5, 0.3), (5, 12, -0.4), (7, 20, 0.8)]:
        fd = (phi_eval(n, k, x + h)[0] - phi_eval(n, k, x - h)[0]) / (2 * h)
        d, _ = phi_derivative(n, k, x, backend)
        assert d == pytest.approx(fd, rel=1e-6, abs=1e-6)


def test_errors():
    with pytest.raises(SingularEndpointError):
        phi_derivative(3, 4, 1.0)
    with pytest.raises(DomainError):
        phi_eval(3, 2, 1.5)
    with pytest.raises(DomainError):
        phi_eval(2, 2, 0.1)
    with pytest.raises(DomainError):
        phi_eval(3, -1, 0.1)
    with pytest.raises(ValueError):
        decay_fit(3, 10, [])


@pytest.mark.parametrize("n", [3, 4, 6])
def test_explicit_envelope_dominates(n):
    ks = np.arange(1, 3001)
    for x in (0.0, 0.5, -0.9):
        vals = phi_values(n, 3000, x)[1:]
        env = envelope_constant(n, x) * ks ** (-(n - 2) / 2)
        assert np.all(np.abs(vals) <= env)


def test_decay_fit_constants_cover_grid():
    fit = decay_fit(4, 200, np.linspace(-0.9, 0.9, 19))
    vals = phi_values(4, 200, np.array(fit.x_grid))[1:]
    ks = np.arange(1, 201)[:, None]
    w = 1 - np.array(fit.x_grid) ** 2
    assert np.max(np.abs(vals) * (ks * w)) <= fit.C_emp * (1 + 1e-12)
    assert fit.C_emp <= envelope_constant(4, 0.9)


def test_lipschitz_fit_positive():
    assert lipschitz_fit(3, 100, np.linspace(-0.5, 0.5, 11)) > 0


def test_table_shape_and_csv():
    t = spherical_table(3, 10, np.linspace(-1, 1, 5))
    assert len(t.entries) == 55
    lines = t.to_csv().splitlines()
    assert lines[0] == "n,k,x,value,abs_error"
    assert len(lines) == 56
    assert t.c_n == pytest.approx(1 / math.pi)
    for v, e in t.entries.values():
        assert abs(v) <= 1 + e
