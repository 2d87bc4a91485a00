"""Translation-invariant tables on a cubic lattice and FFT application.

A target point sits at ``(o + i + tau) * h`` relative to the source lattice
and source cell ``j`` is the cube of side ``h`` centred at ``j * h``.  Any
quantity depending only on ``v = o + i - j + tau`` (in units of h) is
tabulated once over the needed offset range and applied to a density by
FFT convolution.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy import fft as sfft

from ._parallel import get_threads
from .geometry import box_ball_volume, box_distance_range, riesz_box_integral


def offset_range(src_shape, tgt_offset, tgt_shape):
    """Inclusive range of ``o + i - j`` over all target/source index pairs."""
    src = np.asarray(src_shape, dtype=int)
    o = np.asarray(tgt_offset, dtype=int)
    tgt = np.asarray(tgt_shape, dtype=int)
    return tuple(int(v) for v in o - (src - 1)), tuple(int(v) for v in o + tgt - 1)


def _offsets(lo, hi):
    axes = [np.arange(a, b + 1) for a, b in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1), tuple(len(a) for a in axes)


def _canonical(vecs, shift):
    # with no shift the tables are invariant under sign flips and axis
    # permutations, so only sorted |offset| tuples need evaluating
    if shift is None or not np.any(shift):
        key = np.sort(np.abs(vecs), axis=1)
        uniq, inv = np.unique(key, axis=0, return_inverse=True)
        return uniq.astype(float), inv.reshape(-1)
    return vecs + np.asarray(shift, dtype=float), None


@lru_cache(maxsize=64)
def _riesz_table(n, lam, lo, hi, shift):
    vecs, shape = _offsets(lo, hi)
    pts, inv = _canonical(vecs, np.asarray(shift) if shift else None)
    vals = riesz_box_integral(-0.5 - pts, 0.5 - pts, lam)
    if inv is not None:
        vals = vals[inv]
    out = vals.reshape(shape)
    out.setflags(write=False)
    return out


def riesz_table(n: int, lam: float, lo, hi, shift=None) -> np.ndarray:
    """``T[v] = ∫_{[-1/2,1/2]^n} |v + shift - z|^{-lam} dz`` over integer v in [lo, hi]."""
    key = tuple(float(s) for s in shift) if shift is not None and np.any(shift) else ()
    return _riesz_table(int(n), float(lam), tuple(lo), tuple(hi), key)


def _compute_ball_tables(n, radii, lo, hi, shift):
    vecs, shape = _offsets(lo, hi)
    pts, inv = _canonical(vecs, np.asarray(shift) if shift else None)
    blo, bhi = -0.5 - pts, 0.5 - pts
    dmin, dmax = box_distance_range(blo, bhi)
    out = np.zeros((len(radii), pts.shape[0]))
    for k, r in enumerate(radii):
        full = dmax <= r
        out[k, full] = 1.0
        part = ~full & (dmin < r)
        if part.any():
            out[k, part] = box_ball_volume(blo[part], bhi[part], r)
    if inv is not None:
        out = out[:, inv]
    return out.reshape((len(radii),) + shape)


@lru_cache(maxsize=16)
def _ball_tables(n, radii, lo, hi, shift):
    out = _compute_ball_tables(n, radii, lo, hi, shift)
    out.setflags(write=False)
    return out


def ball_tables(n: int, radii, lo, hi, shift=None, cache: bool = True) -> np.ndarray:
    """``F[k, v] = |([-1/2,1/2]^n + v) ∩ B(-shift, r_k)|`` stacked over radii.

    Equivalently the volume of the source cell at offset v inside the ball of
    radius r_k around the target point.
    """
    key = tuple(float(s) for s in shift) if shift is not None and np.any(shift) else ()
    radii = tuple(float(r) for r in radii)
    fn = _ball_tables if cache else _compute_ball_tables
    return fn(int(n), radii, tuple(lo), tuple(hi), key)


def fft_shape(src_shape, lo, hi):
    return tuple(sfft.next_fast_len(s + (b - a + 1) - 1, real=True) for s, a, b in zip(src_shape, lo, hi))


class LatticeConvolution:
    """``u[i] = sum_j table[o + i - j] * d[j]`` evaluated by real FFTs."""

    def __init__(self, table, src_shape, tgt_offset, tgt_shape, flip_axes=()):
        self.src_shape = tuple(int(s) for s in src_shape)
        self.tgt_shape = tuple(int(s) for s in tgt_shape)
        self.flip_axes = tuple(flip_axes)
        lo, hi = offset_range(self.src_shape, tgt_offset, self.tgt_shape)
        want = tuple(b - a + 1 for a, b in zip(lo, hi))
        table = np.asarray(table, dtype=float)
        lead = table.shape[: table.ndim - len(want)]
        if table.shape[len(lead):] != want:
            raise ValueError(f"table shape {table.shape} does not match offset range {want}")
        self.lead = lead
        n = len(want)
        self.axes = tuple(range(len(lead), len(lead) + n))
        self.fshape = tuple(sfft.next_fast_len(s + t - 1, real=True) for s, t in zip(self.src_shape, want))
        self.table_hat = sfft.rfftn(table, s=self.fshape, axes=self.axes, workers=get_threads())
        self.crop = tuple(slice(s - 1, s - 1 + e) for s, e in zip(self.src_shape, self.tgt_shape))

    def apply(self, density) -> np.ndarray:
        d = np.asarray(density, dtype=float).reshape(self.src_shape)
        if self.flip_axes:
            d = np.flip(d, axis=self.flip_axes)
        dh = sfft.rfftn(d, s=self.fshape, workers=get_threads())
        full = sfft.irfftn(self.table_hat * dh, s=self.fshape, axes=self.axes, workers=get_threads())
        return full[(Ellipsis,) + self.crop]


def direct_convolution(table, density, src_shape, tgt_offset, tgt_shape):
    """Slow reference for :class:`LatticeConvolution` (tests and tiny grids)."""
    d = np.asarray(density, dtype=float).reshape(src_shape)
    lo, _ = offset_range(src_shape, tgt_offset, tgt_shape)
    out = np.zeros(tgt_shape)
    src_idx = list(np.ndindex(*src_shape))
    for i in np.ndindex(*tgt_shape):
        acc = 0.0
        for j in src_idx:
            v = tuple(o + a - b - l for o, a, b, l in zip(tgt_offset, i, j, lo))
            acc += table[v] * d[j]
        out[i] = acc
    return out
