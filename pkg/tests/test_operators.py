import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from potlab.czdecomp import dyadic_cube_at, root_cube
from potlab.lorentz import SampledFunction
from potlab.measure import RadiiGrid, lebesgue_on_box, point_mass, unit_ball_volume
from potlab.operators import (GridFunction, fractional_maximal, fractional_maximal_values, mean_oscillation,
                              riesz_potential, riesz_potential_field, riesz_potential_values,
                              sharp_maximal_centered, sharp_maximal_uncentered)


def interval(N):
    return GridFunction.sample(lambda x: (np.abs(x[:, 0]) < 1).astype(float), [-1], [1], [N])


def test_riesz_interval_oracle():
    # int_{-1}^{1} |y|^{-1/2} dy = 4
    for N in (1000, 2000):
        assert riesz_potential(interval(N), 0.5, [0.0]) == pytest.approx(4.0, rel=0.02)


def test_riesz_field_and_zero():
    field = riesz_potential_field(interval(1000), 0.5, point_mass([0.0]))
    assert field.values[0] == pytest.approx(4.0, rel=0.02)
    zero = interval(100).with_values(np.zeros(100))
    assert riesz_potential(zero, 0.5, [0.3]) == 0.0
    assert np.all(riesz_potential_field(zero, 0.5, lebesgue_on_box(([-1], [1]), 10)).values == 0)


def test_riesz_invalid_order():
    f = interval(10)
    for a in (0.0, 1.0, -0.5, 2.0):
        with pytest.raises(ValueError, match="invalid order"):
            riesz_potential(f, a, [0.0])


def test_riesz_monotone_along_ray():
    f = GridFunction.sample(lambda x: np.clip(1 - np.sum(x**2, axis=1), 0, None), [-1, -1], [1, 1], [40, 40])
    xs = np.stack([np.linspace(0.0, 4.0, 30), np.zeros(30)], axis=1)
    vals = riesz_potential_values(f, 1.0, xs)
    assert np.all(np.diff(vals) <= 1e-12)


def test_riesz_lower_bound_scales_like_r_delta():
    # on chi_{B(x0, r)}, I_delta at x0 is r^delta times a fixed constant (same cells per radius)
    delta = 0.75
    x0 = np.array([0.3, -0.2])
    unit = GridFunction.sample(lambda x: (np.linalg.norm(x, axis=1) < 1).astype(float), [-1, -1], [1, 1], [32, 32])
    consts = []
    for r in np.geomspace(0.01, 1.0, 5):
        f = GridFunction(unit.origin * r + x0, unit.spacing * r, unit.values)
        consts.append(riesz_potential(f, delta, x0) / r**delta)
    assert max(consts) / min(consts) == pytest.approx(1.0, abs=1e-9)
    assert min(consts) > 0


def test_riesz_scaling_law():
    # f_g(y) = f(g y) gives I f_g(x) = g^-alpha I f(g x)
    alpha, g = 0.6, 2.0
    f = GridFunction.sample(lambda x: np.exp(-np.sum(x**2, axis=1)), [-3, -3], [3, 3], [60, 60])
    fg = GridFunction(f.origin / g, f.spacing / g, f.values)
    x = np.array([0.4, 0.1])
    assert riesz_potential(fg, alpha, x) == pytest.approx(g**-alpha * riesz_potential(f, alpha, g * x), rel=0.02)


def test_maximal_interval_oracle():
    # r^{-1/2} min(2r, 2) peaks at r = 1
    v = fractional_maximal(interval(1000), 0.5, [0.0], radii=RadiiGrid(0.01, 4.0, 8))
    assert v == pytest.approx(2.0, rel=0.02)
    assert fractional_maximal(interval(1000), 0.5, [0.0], per_octave=8) == pytest.approx(2.0, rel=0.02)


def test_maximal_of_constant():
    # with unit kernel constant, averages carry the unit-ball volume: M_0 c = |B_1| c
    for n, N in ((1, 400), (2, 80)):
        f = GridFunction.sample(lambda x: np.full(len(x), 3.0), [-10] * n, [10] * n, [N] * n)
        v = fractional_maximal(f, 0.0, [0.1] * n, radii=RadiiGrid(1.0, 4.0, 4))
        assert v == pytest.approx(3.0 * unit_ball_volume(n), rel=0.05)


def test_maximal_errors():
    with pytest.raises(ValueError, match="empty grid"):
        fractional_maximal(interval(10), 0.5, [0.0], radii=[])
    with pytest.raises(ValueError, match="invalid order"):
        fractional_maximal(interval(10), 1.0, [0.0])


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([(1, 0.3), (1, 0.8), (2, 0.5), (2, 1.5)]))
def test_kernel_minorant(seed, case):
    n, alpha = case
    rng = np.random.default_rng(seed)
    shape = [64] if n == 1 else [16, 16]
    f = GridFunction(np.full(n, -1.0), np.full(n, 2.0 / shape[0]), rng.uniform(0, 1, shape) * (rng.random(shape) < 0.5))
    pts = rng.uniform(-2, 2, (20, n))
    m = fractional_maximal_values(f, alpha, pts)
    i = riesz_potential_values(f, alpha, pts)
    assert np.all(m <= i * (1 + 1e-6))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_sublinearity(seed):
    rng = np.random.default_rng(seed)
    f = GridFunction([-1.0], [0.05], rng.standard_normal(40))
    g = f.with_values(rng.standard_normal(40))
    pts = rng.uniform(-1.5, 1.5, (15, 1))
    r = RadiiGrid(0.05, 4.0, 4)
    mfg = fractional_maximal_values(f.with_values(f.values + g.values), 0.5, pts, r)
    assert np.all(mfg <= fractional_maximal_values(f, 0.5, pts, r) + fractional_maximal_values(g, 0.5, pts, r) + 1e-12)
    i_abs = riesz_potential_values(f.with_values(np.abs(f.values)), 0.5, pts)
    assert np.all(np.abs(riesz_potential_values(f, 0.5, pts)) <= i_abs + 1e-12)


def _uniform_line(N=200):
    return lebesgue_on_box(([-1.0], [1.0]), N)


def test_sharp_centered_examples():
    mu = _uniform_line()
    radii = RadiiGrid(0.05, 1.0, 4)
    assert sharp_maximal_centered(SampledFunction(mu, np.full(len(mu), 7.0)), 1.0, [0.0], radii) == 0.0
    # half the ball in E: mean 1/2, deviation 1/2 everywhere -> r^-beta mu(B_r) / 2
    g = SampledFunction(mu, (mu.points[:, 0] > 0).astype(float))
    r = 0.5
    v = sharp_maximal_centered(g, 1.0, [0.0], [r])
    mass = float(mu.weights[mu.ball_indices([0.0], r)].sum())
    assert v == pytest.approx(mass / 2 / r, rel=1e-12)
    lin = SampledFunction(mu, 2.0 * mu.points[:, 0] + 1.0)
    idx = mu.ball_indices([0.0], r)
    brute = float(np.sum(mu.weights[idx] * np.abs(lin.values[idx] - np.average(lin.values[idx], weights=mu.weights[idx]))))
    assert sharp_maximal_centered(lin, 1.0, [0.0], [r]) == pytest.approx(brute / r, rel=1e-12)
    assert brute > 0


def test_sharp_uncentered_examples():
    mu = _uniform_line(64)
    g = SampledFunction(mu, np.sin(5 * mu.points[:, 0]))
    root = root_cube(mu)
    x = np.array([0.3])
    const = SampledFunction(mu, np.ones(len(mu)))
    fam = [dyadic_cube_at(root, x, k) for k in range(4)]
    assert sharp_maximal_uncentered(const, x, fam) == 0.0
    Q = fam[2]
    assert sharp_maximal_uncentered(g, x, [Q]) == mean_oscillation(g, mu.box_indices(Q.lo, Q.hi))
    vals = [sharp_maximal_uncentered(g, x, fam[: k + 1]) for k in range(4)]
    assert np.all(np.diff(vals) >= 0)
    with pytest.raises(ValueError, match="uncovered point"):
        sharp_maximal_uncentered(g, [5.0], fam)


def test_grid_round_trip_and_locate():
    f = GridFunction.sample(lambda x: x[:, 0] * x[:, 1], [0, 0], [1, 2], [4, 5])
    back = GridFunction.from_dict(f.to_dict())
    assert np.array_equal(back.values, f.values) and np.array_equal(back.origin, f.origin)
    assert f.locate([0.0, 0.0]) == 0
    assert f.locate([1.0, 0.0]) is None
    assert f.locate([0.99, 1.99]) == 19
