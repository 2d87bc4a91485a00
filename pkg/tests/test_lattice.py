import numpy as np
import pytest

from nlpot.geometry import box_ball_volume, riesz_box_integral
from nlpot.lattice import LatticeConvolution, ball_tables, direct_convolution, offset_range, riesz_table


def test_riesz_table_entries_match_box_integral():
    lo, hi = (-2, -2, -2), (2, 2, 2)
    T = riesz_table(3, 1.0, lo, hi)
    v = np.array([2, -1, 0])
    want = riesz_box_integral((-0.5 - v)[None], (0.5 - v)[None], 1.0)[0]
    assert T[tuple(v - np.array(lo))] == pytest.approx(want, rel=1e-13)
    # symmetric under sign flips and permutations
    assert T[4, 1, 2] == pytest.approx(T[2, 0, 3], rel=1e-13)


def test_riesz_table_shifted():
    s = np.array([0.3, -0.2, 0.1])
    T = riesz_table(3, 1.5, (0, 0, 0), (1, 1, 1), shift=s)
    v = np.array([1, 0, 1]) + s
    want = riesz_box_integral((-0.5 - v)[None], (0.5 - v)[None], 1.5)[0]
    assert T[1, 0, 1] == pytest.approx(want, rel=1e-13)


def test_ball_tables_entries():
    F = ball_tables(3, [0.7, 1.6], (-1, -1, -1), (1, 1, 1))
    v = np.array([1, 0, -1])
    for k, r in enumerate([0.7, 1.6]):
        want = box_ball_volume((-0.5 - v)[None], (0.5 - v)[None], r)[0]
        assert F[k][tuple(v + 1)] == pytest.approx(want, abs=1e-8)
    assert F.flags.writeable is False
    G = ball_tables(3, [0.7, 1.6], (-1, -1, -1), (1, 1, 1), cache=False)
    assert np.array_equal(F, G)


@pytest.mark.parametrize("offset", [(0, 0, 0), (-1, 2, 0), (3, -2, 1)])
def test_fft_matches_direct(offset):
    rng = np.random.default_rng(0)
    src, tgt = (3, 2, 3), (2, 3, 2)
    lo, hi = offset_range(src, offset, tgt)
    T = riesz_table(3, 1.0, lo, hi)
    d = rng.random(src)
    fast = LatticeConvolution(T, src, offset, tgt).apply(d)
    slow = direct_convolution(T, d, src, offset, tgt)
    assert np.allclose(fast, slow, rtol=1e-12, atol=1e-14)


def test_stacked_tables_and_flip():
    rng = np.random.default_rng(1)
    src, tgt, off = (3, 3), (2, 2), (1, 0)
    lo, hi = offset_range(src, off, tgt)
    shape = tuple(b - a + 1 for a, b in zip(lo, hi))
    T = rng.random((2,) + shape)
    d = rng.random(src)
    out = LatticeConvolution(T, src, off, tgt).apply(d)
    for k in range(2):
        assert np.allclose(out[k], direct_convolution(T[k], d, src, off, tgt))
    flipped = LatticeConvolution(T[0], src, off, tgt, flip_axes=(1,)).apply(d)
    assert np.allclose(flipped, direct_convolution(T[0], d[:, ::-1], src, off, tgt))


def test_table_shape_mismatch():
    with pytest.raises(ValueError):
        LatticeConvolution(np.zeros((4, 4)), (2, 2), (0, 0), (2, 2))
