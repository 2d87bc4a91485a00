import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from nlpot.geometry import (
    box_ball_volume,
    box_distance_range,
    corner_box_integral,
    gauss_legendre,
    riesz_box_integral,
    sphere_area,
    subdivided_ball_fraction,
    unit_ball_volume,
)


def pyramid_corner_integral(a, lam):
    """∫_{[0,a1]x[0,a2]x[0,a3]} |x|^-lam dx by splitting into the cones over the three far faces.

    Each cone maps to t*(face point), t in [0,1], which leaves a smooth 2D
    integral over the face times ∫ t^(2-lam) dt.
    """
    a = np.asarray(a, dtype=float)
    total = 0.0
    for k in range(3):
        d = a[k]
        u, v = [a[j] for j in range(3) if j != k]
        f = lambda y, x: d * (d * d + x * x + y * y) ** (-lam / 2)
        val, _ = integrate.dblquad(f, 0, u, 0, v, epsabs=1e-13, epsrel=1e-12)
        total += val
    return total / (3 - lam)


def test_unit_ball_and_sphere():
    assert unit_ball_volume(2) == pytest.approx(np.pi)
    assert unit_ball_volume(3) == pytest.approx(4 * np.pi / 3)
    assert sphere_area(3) == pytest.approx(4 * np.pi)
    assert sphere_area(2) == pytest.approx(2 * np.pi)


def test_gauss_legendre_exact_for_polynomials():
    t, w = gauss_legendre(4)
    # nodes on (0,1), exact up to degree 7
    assert w.sum() == pytest.approx(1.0)
    assert np.dot(w, t**7) == pytest.approx(1 / 8)


def test_box_ball_volume_limits():
    lo, hi = np.array([[-0.5, -0.5, -0.5]]), np.array([[0.5, 0.5, 0.5]])
    # ball inside the cube
    assert box_ball_volume(lo, hi, 0.3)[0] == pytest.approx(4 / 3 * np.pi * 0.027, rel=1e-12)
    # cube inside the ball
    assert box_ball_volume(lo, hi, 1.0)[0] == pytest.approx(1.0, rel=1e-14)
    # disjoint
    assert box_ball_volume(lo + 3, hi + 3, 1.0)[0] == 0.0


def test_box_ball_volume_half_cube_octant():
    # ball of radius 1 centred at a cube corner: one octant of the ball
    lo, hi = np.array([[0.0, 0.0, 0.0]]), np.array([[2.0, 2.0, 2.0]])
    assert box_ball_volume(lo, hi, 1.0)[0] == pytest.approx(np.pi / 6, rel=1e-12)


def test_box_ball_volume_2d_exact():
    lo, hi = np.array([[0.0, 0.0]]), np.array([[1.0, 1.0]])
    # quarter disk of radius 1 has area π/4
    assert box_ball_volume(lo, hi, 1.0)[0] == pytest.approx(np.pi / 4, rel=1e-14)


def test_box_ball_volume_vs_monte_carlo():
    rng = np.random.default_rng(1)
    lo = np.array([0.2, -0.4, 0.1])
    hi = lo + np.array([0.7, 0.5, 0.9])
    R = 0.8
    pts = lo + rng.random((400_000, 3)) * (hi - lo)
    mc = np.prod(hi - lo) * np.mean((pts**2).sum(1) < R * R)
    v = box_ball_volume(lo[None], hi[None], R)[0]
    assert v == pytest.approx(mc, abs=4e-3 * np.prod(hi - lo))


def test_subdivided_agrees_with_exact():
    lo, hi = np.array([[0.1, -0.3, 0.2]]), np.array([[0.9, 0.4, 0.8]])
    vol, err = subdivided_ball_fraction(lo, hi, 0.75, depth_cap=8, tol=1e-3)
    exact = box_ball_volume(lo, hi, 0.75)[0]
    assert abs(vol[0] - exact) <= max(err[0], 1e-12) + 1e-3 * exact


@given(
    st.lists(st.floats(-2, 2), min_size=3, max_size=3),
    st.lists(st.floats(0.05, 1.5), min_size=3, max_size=3),
    st.floats(0.01, 3.0),
    st.floats(1.0, 1.5),
)
def test_box_ball_volume_bounds_and_monotone(corner, sides, R, grow):
    lo = np.array([corner])
    hi = lo + np.array([sides])
    v1 = box_ball_volume(lo, hi, R)[0]
    v2 = box_ball_volume(lo, hi, R * grow)[0]
    box = float(np.prod(sides))
    assert -1e-12 <= v1 <= min(box, unit_ball_volume(3) * R**3) * (1 + 1e-10) + 1e-12
    assert v2 >= v1 - 1e-10 * max(box, 1e-3)


def test_box_distance_range():
    dmin, dmax = box_distance_range(np.array([[1.0, -1.0]]), np.array([[2.0, 1.0]]))
    assert dmin[0] == pytest.approx(1.0)
    assert dmax[0] == pytest.approx(np.sqrt(5))


@pytest.mark.parametrize("lam", [0.5, 1.0, 1.5, 2.5])
def test_corner_integral_vs_cone_oracle(lam):
    a = np.array([0.7, 1.1, 0.4])
    got = corner_box_integral(a[None], lam)
    got = float(np.atleast_1d(got)[0])
    assert got == pytest.approx(pyramid_corner_integral(a, lam), rel=1e-9)


@pytest.mark.parametrize("lam", [1.0, 1.5])
def test_riesz_box_integral_containing_point(lam):
    # a box containing the origin splits into eight corner boxes
    lo = np.array([-0.3, -0.6, -0.2])
    hi = np.array([0.5, 0.4, 0.9])
    oracle = 0.0
    for signs in np.ndindex(2, 2, 2):
        a = np.where(np.array(signs) == 0, -lo, hi)
        oracle += pyramid_corner_integral(a, lam)
    got = riesz_box_integral(lo[None], hi[None], lam)[0]
    assert got == pytest.approx(oracle, rel=1e-9)


@pytest.mark.parametrize("offset", [1.3, 2.5, 7.0])
def test_riesz_box_integral_far_box(offset):
    lo = np.array([offset, -0.5, -0.5])
    hi = lo + 1.0
    f = lambda z, y, x: (x * x + y * y + z * z) ** -0.5
    oracle, _ = integrate.tplquad(f, lo[0], hi[0], lo[1], hi[1], lo[2], hi[2], epsabs=1e-13, epsrel=1e-12)
    got = riesz_box_integral(lo[None], hi[None], 1.0)[0]
    assert got == pytest.approx(oracle, rel=1e-9)


@given(st.floats(0.2, 2.5), st.floats(1.1, 4.0))
def test_riesz_box_integral_scaling(lam, s):
    # ∫_{sB} |x|^-lam = s^(n-lam) ∫_B |x|^-lam
    lo = np.array([[0.3, -0.2, 0.1]])
    hi = np.array([[1.0, 0.6, 0.5]])
    a = riesz_box_integral(lo, hi, lam)[0]
    b = riesz_box_integral(s * lo, s * hi, lam)[0]
    assert b == pytest.approx(s ** (3 - lam) * a, rel=1e-8)
