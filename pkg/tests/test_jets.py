import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kahler_eta import jets
from kahler_eta.jets import Jet

coord = st.floats(-1.5, 1.5, allow_nan=False)


def fd_grad_hess(f, x, h=1e-4):
    n = len(x)
    g = np.zeros(n)
    H = np.zeros((n, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
        for j in range(n):
            e2 = np.zeros(n)
            e2[j] = h
            H[i, j] = (f(x + e + e2) - f(x + e - e2) - f(x - e + e2) + f(x - e - e2)) / (4 * h * h)
    return g, H


def sample(X):
    x, y, z = X
    return jets.sin(x * y) + jets.exp(z) / (2.0 + x * x) - jets.sqrt(3.0 + y**2) * jets.cos(z) + (x - z) ** 3


def sample_float(v):
    x, y, z = v
    return math.sin(x * y) + math.exp(z) / (2 + x * x) - math.sqrt(3 + y * y) * math.cos(z) + (x - z) ** 3


@settings(max_examples=40, deadline=None)
@given(coord, coord, coord)
def test_jet_matches_finite_differences(x, y, z):
    p = np.array([x, y, z])
    j = sample(Jet.variables(p))
    g, H = fd_grad_hess(sample_float, p)
    assert j.val == pytest.approx(sample_float(p), rel=1e-14, abs=1e-14)
    np.testing.assert_allclose(j.grad, g, atol=1e-6)
    np.testing.assert_allclose(j.hess, H, atol=1e-5)
    np.testing.assert_allclose(j.hess, j.hess.T, atol=1e-14)


def test_polynomial_is_exact():
    x, y = Jet.variables([2.0, -3.0])
    f = x**2 * y + 3 * y
    assert f.val == -21.0
    np.testing.assert_array_equal(f.grad, [-12.0, 7.0])
    np.testing.assert_array_equal(f.hess, [[-6.0, 4.0], [4.0, 0.0]])


def test_division_and_negative_powers():
    (x,) = Jet.variables([2.0])
    f = 1.0 / x
    g = x**-1
    assert f.val == g.val == 0.5
    np.testing.assert_allclose(f.grad, [-0.25])
    np.testing.assert_allclose(f.hess, [[0.25]])
    np.testing.assert_allclose(g.hess, f.hess)


def test_reciprocal_of_zero_raises():
    (x,) = Jet.variables([0.0])
    try:
        x.reciprocal()
    except ZeroDivisionError:
        return
    raise AssertionError("expected ZeroDivisionError")


def test_functions_accept_floats():
    assert jets.sin(0.5) == math.sin(0.5)
    assert jets.value(Jet.constant(3.0, 2)) == 3.0
    assert jets.value(2) == 2.0
