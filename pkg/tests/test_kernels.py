import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from nlpot.kernels import DomainError, GreenBall, GreenHalfSpace, Riesz, kernel_eval, kernel_operator, kernel_potential
from nlpot.measures import AtomicMeasure, CellDensityMeasure, Grid
from test_geometry import pyramid_corner_integral

coord = st.floats(-0.55, 0.55)
inside_ball = st.lists(coord, min_size=3, max_size=3).filter(lambda v: sum(c * c for c in v) < 0.9)


def test_riesz_value():
    assert kernel_eval(Riesz(2.0, 3), [0, 0, 0], [2, 0, 0]) == pytest.approx(0.5)


def test_half_space_reflection_value():
    assert kernel_eval(GreenHalfSpace(3), [0, 0, 1], [0, 0, 2]) == pytest.approx(2 / 3)


def test_diagonal_is_infinite():
    assert kernel_eval(Riesz(1.0, 3), [1, 2, 3], [1, 2, 3]) == np.inf
    assert kernel_eval(GreenBall(3), [0.1, 0, 0], [0.1, 0, 0]) == np.inf


def test_green_ball_at_center():
    # y = 0 limit: |x|^(2-n) - R^(2-n)
    K = GreenBall(3, radius=2.0)
    assert kernel_eval(K, [0.5, 0, 0], [0, 0, 0]) == pytest.approx(2.0 - 0.5)


def test_domain_errors():
    with pytest.raises(DomainError):
        kernel_eval(GreenHalfSpace(3), [0, 0, -1], [0, 0, 1])
    with pytest.raises(DomainError):
        kernel_eval(GreenBall(3), [2, 0, 0], [0, 0, 0])
    with pytest.raises(DomainError):
        kernel_potential(GreenHalfSpace(3), AtomicMeasure([[0, 0, -0.5]], [1.0]), [0, 0, 1])
    with pytest.raises(ValueError):
        Riesz(3.0, 3)
    with pytest.raises(ValueError):
        GreenBall(2)


def test_green_vanishes_on_boundary():
    assert kernel_eval(GreenHalfSpace(3), [0.3, 0.1, 0.0], [0, 0, 1]) == pytest.approx(0.0, abs=1e-15)
    assert kernel_eval(GreenBall(3), [1.0, 0, 0], [0.2, 0.1, 0]) == pytest.approx(0.0, abs=1e-12)


@given(inside_ball, inside_ball)
def test_green_ball_symmetric_and_below_riesz(x, y):
    K = GreenBall(3)
    a = kernel_eval(K, x, y)
    b = kernel_eval(K, y, x)
    if np.isinf(a):
        return
    assert a == pytest.approx(b, rel=1e-9, abs=1e-12)
    assert 0 <= a <= kernel_eval(Riesz(2.0, 3), x, y) * (1 + 1e-12)


@given(st.lists(st.floats(-2, 2), min_size=2, max_size=2), st.floats(0.01, 3), st.floats(0.01, 3))
def test_half_space_symmetric_and_below_riesz(t, a, b):
    K = GreenHalfSpace(3)
    x = [t[0], t[1], a]
    y = [0.0, 0.0, b]
    g = kernel_eval(K, x, y)
    assert g == pytest.approx(kernel_eval(K, y, x), rel=1e-12)
    assert 0 < g <= kernel_eval(Riesz(2.0, 3), x, y)


def test_atomic_potentials():
    K = Riesz(2.0, 3)
    mu = AtomicMeasure([[1, 0, 0], [-1, 0, 0]], [1.0, 1.0])
    assert kernel_potential(K, mu, [0, 0, 0]) == pytest.approx(2.0)
    assert kernel_potential(K, AtomicMeasure([[0, 0, 0]], [1.0]), [2, 0, 0]) == pytest.approx(0.5)
    assert kernel_potential(K, mu, [1, 0, 0]) == np.inf


def test_cell_potential_interior_vs_cone_oracle():
    # unit density on [0,1]^3, Riesz 2α = 1.5; an interior x splits the cube into eight corner boxes
    K = Riesz(1.5, 3)
    mu = CellDensityMeasure([0, 0, 0], 0.5, (2, 2, 2), 1.0)
    x = np.array([0.3, 0.55, 0.8])
    oracle = sum(
        pyramid_corner_integral(np.where(np.array(s) == 0, x, 1 - x), 1.5) for s in np.ndindex(2, 2, 2)
    )
    assert kernel_potential(K, mu, x) == pytest.approx(oracle, rel=1e-9)


def test_cell_potential_exterior_vs_tplquad():
    K = Riesz(1.5, 3)
    mu = CellDensityMeasure([0, 0, 0], 0.5, (2, 2, 2), 1.0)
    x = np.array([1.6, 0.5, 0.5])
    f = lambda z, y, w: ((w - x[0]) ** 2 + (y - x[1]) ** 2 + (z - x[2]) ** 2) ** (-0.75)
    oracle = integrate.tplquad(f, 0, 1, 0, 1, 0, 1, epsabs=1e-11, epsrel=1e-10)[0]
    assert kernel_potential(K, mu, x) == pytest.approx(oracle, rel=1e-8)


def test_half_space_cell_potential_below_riesz():
    mu = CellDensityMeasure([-0.5, -0.5, 0.25], 0.25, (4, 4, 4), 1.0)
    X = np.array([[0.0, 0.0, 0.7], [0.3, -0.2, 1.5], [0.0, 0.0, 0.05]])
    g = kernel_potential(GreenHalfSpace(3), mu, X)
    r = kernel_potential(Riesz(2.0, 3), mu, X)
    assert np.all(g > 0) and np.all(g <= r)


@pytest.mark.parametrize("K,origin", [
    (Riesz(1.0, 3), [-0.5, -0.5, -0.5]),
    (GreenHalfSpace(3), [-0.5, -0.5, 0.25]),
    (GreenBall(3), [-0.5, -0.5, -0.5]),
])
def test_operator_matches_pointwise(K, origin):
    rng = np.random.default_rng(2)
    g = Grid(origin, 0.25, (4, 4, 4))
    d = rng.random(g.extents)
    tgt = g.padded(1) if K.kind != "green_ball" else g
    if K.kind == "green_half_space":
        tgt = Grid(g.origin - [0.25, 0.25, 0.0], 0.25, (6, 6, 5))
    fast = kernel_operator(K, g, tgt).apply(d)
    slow = kernel_potential(K, CellDensityMeasure.from_grid(g, d), tgt.centers())
    assert np.allclose(fast, slow, rtol=1e-8, atol=1e-12)
