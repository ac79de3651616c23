import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slanthelix import jet as J
from slanthelix.errors import DomainError
from slanthelix.jet import Jet

# 4th-order accurate central stencils: (offsets, weights) for derivative d
STENCILS = {
    1: ([-2, -1, 1, 2], [1 / 12, -2 / 3, 2 / 3, -1 / 12]),
    2: ([-2, -1, 0, 1, 2], [-1 / 12, 4 / 3, -5 / 2, 4 / 3, -1 / 12]),
    3: ([-3, -2, -1, 1, 2, 3], [1 / 8, -1, 13 / 8, -13 / 8, 1, -1 / 8]),
    4: ([-3, -2, -1, 0, 1, 2, 3], [-1 / 6, 2, -13 / 2, 28 / 3, -13 / 2, 2, -1 / 6]),
}
STEPS = {1: 1e-3, 2: 2e-3, 3: 3e-3, 4: 5e-3}


def central_fd(f, t, d):
    offs, w = STENCILS[d]
    h = STEPS[d]
    return sum(wi * f(t + o * h) for o, wi in zip(offs, w)) / h**d


def poly_jet(c, t, m):
    """Derivatives of sum c_i t^i at t, by direct differentiation."""
    out = []
    p = np.polynomial.Polynomial(c)
    for _ in range(m + 1):
        out.append(p(t))
        p = p.deriv()
    return np.array(out)


def test_variable_and_constant():
    x = Jet.variable(3.0, 3)
    assert np.allclose(x.coeffs, [3, 1, 0, 0])
    c = Jet.constant(2.5, 2)
    assert np.allclose(c.coeffs, [2.5, 0, 0])


def test_square_at_three():
    x = Jet.variable(3.0, 3)
    assert np.allclose((x * x).coeffs, [9, 6, 2, 0])
    assert np.allclose((x**2).coeffs, [9, 6, 2, 0])


def test_sin_maclaurin():
    s = J.sin(Jet.variable(0.0, 4))
    assert np.allclose(s.coeffs, [0, 1, 0, -1, 0], atol=1e-15)


def test_exp_two_t():
    e = math.e
    j = J.exp(2 * Jet.variable(0.5, 2))
    assert np.allclose(j.coeffs, [e, 2 * e, 4 * e], rtol=1e-14)
    f = lambda t: math.exp(2 * t)
    for d in (1, 2):
        assert abs(central_fd(f, 0.5, d) - j.coeffs[d]) <= 1e-6 * abs(j.coeffs[d])


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(-2, 2), min_size=1, max_size=6),
    st.lists(st.floats(-2, 2), min_size=1, max_size=6),
    st.floats(-1.5, 1.5),
)
def test_polynomial_arithmetic_exact(a, b, t):
    m = 6
    x = Jet.variable(t, m)
    pa = sum(ci * x**i for i, ci in enumerate(a)) if len(a) > 1 else Jet.constant(a[0], m)
    pb = sum(ci * x**i for i, ci in enumerate(b)) if len(b) > 1 else Jet.constant(b[0], m)
    A, B = poly_jet(a, t, m), poly_jet(b, t, m)
    scale = lambda v: 1e-12 * max(1.0, np.max(np.abs(v)))
    assert np.max(np.abs((pa + pb).coeffs - (A + B))) <= scale(A + B)
    prod = poly_jet(np.polynomial.polynomial.polymul(a, b), t, m)
    assert np.max(np.abs((pa * pb).coeffs - prod)) <= scale(prod) * 10


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(-2, 2), min_size=1, max_size=6),
    st.lists(st.floats(-1, 1), min_size=0, max_size=5),
    st.floats(-1.0, 1.0),
)
def test_quotient_satisfies_product_rule(a, b, t):
    # g = 3 + small polynomial stays away from zero on [-1, 1]
    m = 5
    x = Jet.variable(t, m)
    g = Jet.constant(3.0, m) + sum((0.3 * ci * x ** (i + 1) for i, ci in enumerate(b)), Jet.constant(0.0, m))
    f = sum((ci * x**i for i, ci in enumerate(a)), Jet.constant(0.0, m))
    q = f / g
    back = q * g
    assert np.max(np.abs(back.coeffs - f.coeffs)) <= 1e-12 * max(1.0, np.max(np.abs(f.coeffs)))


FUNCS = {
    "sin": (J.sin, math.sin, (-3, 3)),
    "cos": (J.cos, math.cos, (-3, 3)),
    "tan": (J.tan, math.tan, (-1.2, 1.2)),
    "exp": (J.exp, math.exp, (-2, 2)),
    "log": (J.log, math.log, (0.3, 4)),
    "sqrt": (J.sqrt, math.sqrt, (0.3, 4)),
    "sinh": (J.sinh, math.sinh, (-2, 2)),
    "cosh": (J.cosh, math.cosh, (-2, 2)),
}


@pytest.mark.parametrize("name", sorted(FUNCS))
def test_functions_match_finite_differences(name):
    jf, mf, (lo, hi) = FUNCS[name]
    rng = np.random.default_rng(sorted(FUNCS).index(name))
    ts = rng.uniform(lo, hi, 100)
    j = jf(Jet.variable(ts, 4))
    for d in range(1, 5):
        fd = np.array([central_fd(mf, t, d) for t in ts])
        err = np.abs(fd - j.coeffs[d]) / np.maximum(1.0, np.abs(j.coeffs[d]))
        assert err.max() <= 1e-5, (name, d, err.max())


def test_batched_matches_scalar():
    ts = np.linspace(0.2, 2.0, 7)
    xb = Jet.variable(ts, 5)
    jb = J.log(xb) * J.sin(xb) / (1 + xb * xb)
    for i, t in enumerate(ts):
        x = Jet.variable(t, 5)
        js = J.log(x) * J.sin(x) / (1 + x * x)
        assert np.allclose(jb.coeffs[:, i], js.coeffs, rtol=1e-13, atol=1e-14)


def test_power_fractional_and_integer():
    x = Jet.variable(2.0, 4)
    p = J.power(x, 1.5)
    exact = [2**1.5, 1.5 * 2**0.5, 0.75 * 2**-0.5, -0.375 * 2**-1.5, 0.5625 * 2**-2.5]
    assert np.allclose(p.coeffs, exact, rtol=1e-13)
    assert np.allclose((x**3).coeffs, [8, 12, 12, 6, 0])


def test_derivative_shifts():
    x = Jet.variable(1.0, 3)
    d = J.exp(x).derivative()
    assert d.order == 2
    assert np.allclose(d.coeffs, [math.e] * 3)


def test_mixed_orders_truncate():
    a = Jet.variable(1.0, 5)
    b = Jet.variable(1.0, 2)
    assert (a * b).order == 2


@pytest.mark.parametrize(
    "op",
    [
        lambda: Jet.constant(1.0, 2) / Jet.constant(0.0, 2),
        lambda: J.log(Jet.constant(0.0, 2)),
        lambda: J.log(Jet.constant(-1.0, 2)),
        lambda: J.sqrt(Jet.constant(-1.0, 2)),
        lambda: J.sqrt(Jet.constant(0.0, 2)),
    ],
)
def test_domain_errors(op):
    with pytest.raises(DomainError):
        op()


def test_domain_error_never_nan_in_batch():
    x = Jet.variable(np.array([1.0, -1.0]), 2)
    with pytest.raises(DomainError):
        J.sqrt(x)


def test_dot_and_norm():
    x = Jet.variable(0.7, 3)
    u = [J.cos(x), J.sin(x)]
    n = J.norm(u)
    assert np.allclose(n.coeffs, [1, 0, 0, 0], atol=1e-14)
    assert np.allclose(J.dot(u, u).coeffs, [1, 0, 0, 0], atol=1e-14)
