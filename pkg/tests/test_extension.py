import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from potlab.extension import (boundary_trace, build_psi, extend_half_space, gradient, gradient_magnitude)
from potlab.measure import DiscreteMeasure
from potlab.operators import GridFunction
from potlab.verify import half_bump


@pytest.fixture(scope="module")
def psi():
    return build_psi()


def test_psi_coefficients(psi):
    assert psi.a == pytest.approx(-3.0, rel=1e-12)
    assert psi.b == pytest.approx(8.0, rel=1e-12)
    assert psi.moment(0) == pytest.approx(1.0, abs=1e-14)
    assert psi.moment(1) == pytest.approx(0.0, abs=1e-14)
    assert abs(psi.quad_moment(0) - 1) < 1e-10
    assert abs(psi.quad_moment(1)) < 1e-10


def test_reflection_factor_closed_form(psi):
    # int_1^inf (1 - 2s)(-3 e^{-(s-1)} + 8 e^{-2(s-1)}) ds = (-3)(1 - 4) + 8(1/2 - 3/2) = 1
    assert psi.reflection_factor() == pytest.approx(1.0, abs=1e-13)
    assert psi.gradient_constant(1.5) > 1.0


def test_linear_extends_to_itself(psi):
    nz, L = 590, 5.9
    lin = GridFunction.sample(lambda x: x[:, 1], [-1, 0], [1, L], [4, nz])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        E = extend_half_space(lin, psi)
    lower = E.values[:, :nz][:, ::-1][:, :10]
    z = -(np.arange(10) + 0.5) * (L / nz)
    np.testing.assert_allclose(lower, np.broadcast_to(z, lower.shape), atol=1e-6)


def test_constant_and_zero(psi):
    nz, L = 600, 6.0
    # 1 on [0, 3], ramping to 0 at 5.5 so nothing is cut off
    f = GridFunction.sample(lambda x: np.clip((5.5 - x[:, 1]) / 2.5, 0, 1), [0, 0], [1, L], [2, nz])
    E = extend_half_space(f, psi)
    lower = E.values[:, :nz][:, ::-1][:, :5]
    np.testing.assert_allclose(lower, 1.0, atol=1e-8)
    Z = extend_half_space(f.with_values(np.zeros(f.shape)), psi)
    assert np.all(Z.values == 0)


def test_upper_half_bit_exact_and_errors(psi):
    f = half_bump(2, 16, 0.3)
    E = extend_half_space(f, psi)
    assert E.origin[-1] == -f.upper[-1]
    assert np.array_equal(E.values[:, f.shape[1]:], f.values)
    shifted = GridFunction(f.origin + np.array([0.0, 0.1]), f.spacing, f.values)
    with pytest.raises(ValueError, match="no boundary data"):
        extend_half_space(shifted, psi)
    tall = GridFunction.sample(lambda x: np.ones(len(x)), [0, 0], [1, 1], [4, 8])
    with pytest.warns(UserWarning, match="does not vanish"):
        extend_half_space(tall, psi)


def test_gradient_examples():
    f = GridFunction.sample(lambda x: 3 * x[:, 0] - 2 * x[:, 1] + 1, [0, 0], [1, 1], [10, 12])
    gx, gy = gradient(f)
    np.testing.assert_allclose(gx.values, 3.0, rtol=1e-12)
    np.testing.assert_allclose(gy.values, -2.0, rtol=1e-12)
    np.testing.assert_allclose(gradient_magnitude(f).values, np.sqrt(13.0), rtol=1e-12)
    c = f.with_values(np.full(f.shape, 4.0))
    assert all(np.all(g.values == 0) for g in gradient(c))
    sq = GridFunction.sample(lambda x: x[:, 0] ** 2, [0.0], [1.0], [100])
    (d,) = gradient(sq)
    x = sq.axes()[0]
    np.testing.assert_allclose(d.values[1:-1], 2 * x[1:-1], atol=1e-4)
    with pytest.raises(ValueError, match="axis too short"):
        gradient(GridFunction([0.0, 0.0], [1.0, 1.0], np.zeros((1, 5))))


def test_boundary_trace_examples(psi):
    plane = DiscreteMeasure(np.stack([np.linspace(-0.9, 0.9, 7), np.zeros(7)], axis=1), np.ones(7))
    f = GridFunction.sample(lambda x: x[:, 0] + x[:, 1], [-1, -1], [1, 1], [20, 20])
    np.testing.assert_allclose(boundary_trace(f, plane).values, plane.points[:, 0], atol=1e-12)
    zero = f.with_values(np.zeros(f.shape))
    assert np.all(boundary_trace(zero, plane).values == 0)
    far = DiscreteMeasure(np.array([[0.0, 5.0]]), np.ones(1))
    with pytest.raises(ValueError, match="trace plane outside domain"):
        boundary_trace(f, far)


def test_trace_of_extension_matches_boundary_values(psi):
    # linear in x_n over the reach of the reflection, so Ef(x', -z) = cos(x')(1 + z/3) and
    # interpolating between the cells at -h/2 and h/2 recovers g(x', 0) = cos(x')
    g = GridFunction.sample(lambda x: np.cos(x[:, 0]) * np.clip(1 - x[:, 1] / 3, 0, None), [-1, 0], [1, 4],
                            [16, 400])
    E = extend_half_space(g, psi)
    xs = g.axes()[0]
    plane = DiscreteMeasure(np.stack([xs, np.zeros_like(xs)], axis=1), np.ones(xs.size))
    np.testing.assert_allclose(boundary_trace(E, plane).values, np.cos(xs), atol=1e-6)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_extension_is_linear(seed):
    psi = build_psi()
    rng = np.random.default_rng(seed)
    a = GridFunction([0.0, 0.0], [0.1, 0.1], rng.standard_normal((5, 12)) * np.linspace(1, 0, 12) ** 2)
    b = a.with_values(rng.standard_normal((5, 12)) * np.linspace(1, 0, 12) ** 2)
    c = float(rng.uniform(-3, 3))
    lhs = extend_half_space(a.with_values(a.values + c * b.values), psi).values
    rhs = extend_half_space(a, psi).values + c * extend_half_space(b, psi).values
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)
