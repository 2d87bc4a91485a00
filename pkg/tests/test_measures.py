import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nlpot.fields import SampledField
from nlpot.measures import (
    AtomicMeasure,
    CellDensityMeasure,
    DimensionError,
    Grid,
    ball_mass,
    ball_masses,
    restrict_measure,
    scale_density,
    support_bounds,
    total_mass,
    uniform_box,
)


def test_grid_centers_and_refine():
    g = Grid([0.0, 0.0], 0.5, (2, 3))
    c = g.centers()
    assert c.shape == (6, 2)
    assert np.allclose(c[0], [0.25, 0.25])
    assert np.allclose(c[-1], [0.75, 1.25])
    r = g.refine(2)
    assert r.extents == (4, 6) and r.h == 0.25
    assert np.array_equal(g.padded(1).offset_in(g), [-1, -1])


def test_grid_rejects_misaligned():
    with pytest.raises(ValueError):
        Grid([0.1, 0.0], 0.5, (2, 2)).offset_in(Grid([0.0, 0.0], 0.5, (2, 2)))
    with pytest.raises(DimensionError):
        Grid([0.0, 0.0], 0.5, (2, 2, 2))


def test_atomic_validation():
    with pytest.raises(ValueError):
        AtomicMeasure([[0.0, 0.0]], [-1.0])
    with pytest.raises(ValueError):
        AtomicMeasure([[0.0, 0.0], [0.0, 0.0]], [1.0, 1.0])
    with pytest.raises(ValueError):
        AtomicMeasure([[np.nan, 0.0]], [1.0])


def test_open_ball_excludes_boundary_atom():
    mu = AtomicMeasure([[1.0, 0.0, 0.0], [0.5, 0.0, 0.0]], [2.0, 3.0])
    assert ball_mass(mu, [0, 0, 0], 1.0)[0] == 3.0
    assert ball_mass(mu, [0, 0, 0], 1.0 + 1e-12)[0] == 5.0
    assert np.array_equal(ball_masses(mu, np.zeros(3), [0.5, 0.6, 1.0, 2.0]), [0.0, 3.0, 3.0, 5.0])


def test_dimension_mismatch():
    mu = AtomicMeasure([[0.0, 0.0, 0.0]], [1.0])
    with pytest.raises(DimensionError):
        ball_mass(mu, [0.0, 0.0], 1.0)


def test_uniform_box_ball_mass_exact():
    mu = uniform_box([-1, -1, -1], [1, 1, 1], 4, value=2.0)
    assert total_mass(mu) == pytest.approx(16.0)
    m, err = ball_mass(mu, [0, 0, 0], 0.9)
    exact = 2.0 * 4 / 3 * np.pi * 0.729
    assert m == pytest.approx(exact, rel=1e-12)
    # the reported bound is conservative but must cover the true error
    assert abs(m - exact) <= err < 1e-5
    # ball covering the box
    assert ball_mass(mu, [0, 0, 0], 2.0)[0] == pytest.approx(16.0, rel=1e-14)


def test_subdivide_method_close_to_exact():
    mu = uniform_box([0, 0, 0], [1, 1, 1], 2)
    exact = ball_mass(mu, [0.3, 0.4, 0.5], 0.6)[0]
    sub, err = ball_mass(mu, [0.3, 0.4, 0.5], 0.6, method="subdivide", tol=2e-2)
    assert abs(sub - exact) <= err + 1e-9


@given(st.floats(0.05, 2.0), st.floats(1.0, 2.0))
def test_ball_mass_monotone_in_radius(r, k):
    rng = np.random.default_rng(3)
    mu = CellDensityMeasure([0, 0, 0], 0.25, (3, 3, 3), rng.random((3, 3, 3)))
    x = np.array([0.4, 0.3, 0.5])
    a = ball_mass(mu, x, r)[0]
    b = ball_mass(mu, x, r * k)[0]
    assert b >= a - 1e-12
    assert a <= total_mass(mu) * (1 + 1e-12)


def test_refine_preserves_mass_and_ball_mass():
    rng = np.random.default_rng(4)
    mu = CellDensityMeasure([0, 0, 0], 0.5, (2, 2, 2), rng.random((2, 2, 2)))
    fine = mu.refine(3)
    assert total_mass(fine) == pytest.approx(total_mass(mu))
    x = [0.6, 0.2, 0.7]
    assert ball_mass(fine, x, 0.45)[0] == pytest.approx(ball_mass(mu, x, 0.45)[0], rel=1e-8)


def test_support_bounds():
    d = np.zeros((4, 4))
    d[1, 2] = 1.0
    mu = CellDensityMeasure([0, 0], 1.0, (4, 4), d)
    lo, hi = support_bounds(mu)
    assert np.allclose(lo, [1, 2]) and np.allclose(hi, [2, 3])
    assert support_bounds(CellDensityMeasure([0, 0], 1.0, (2, 2), 0.0)) is None


def test_restrict_and_scale():
    mu = AtomicMeasure([[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]], [1.0, 1.0, 1.0])
    gate = SampledField(mu.points, np.array([0.5, 2.0, 0.1]))
    r = restrict_measure(mu, 1.5, gate)
    # atom 1 fails the gate, atom 2 lies outside |y| < 1.5
    assert len(r) == 1 and np.allclose(r.points, [[0.0, 0.0]])
    w = SampledField(mu.points, np.array([1.0, 4.0, 9.0]))
    s = scale_density(mu, w, 0.5)
    assert np.allclose(s.masses, [1.0, 2.0, 3.0])
