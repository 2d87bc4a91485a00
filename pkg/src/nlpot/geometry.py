"""Box/ball primitives shared by the measure and kernel code.

Everything here works on axis-aligned boxes given by their lower and upper
corners *relative to the evaluation point*, vectorized over a leading batch
axis.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product
from math import gamma, pi

import numpy as np
from scipy.special import hyp2f1


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def unit_ball_volume(n: int) -> float:
    return pi ** (n / 2) / gamma(n / 2 + 1)


def sphere_area(n: int) -> float:
    """Surface area of the unit sphere in R^n."""
    return 2 * pi ** (n / 2) / gamma(n / 2)


def box_distance_range(lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Smallest and largest distance from the origin to points of each box."""
    near = np.where(lo > 0, lo, np.where(hi < 0, -hi, 0.0))
    far = np.maximum(np.abs(lo), np.abs(hi))
    return np.sqrt((near**2).sum(-1)), np.sqrt((far**2).sum(-1))


# ---------------------------------------------------------------------------
# box / ball intersection volume
# ---------------------------------------------------------------------------

def _interval_length(lo, hi, R):
    return np.clip(np.minimum(hi, R) - np.maximum(lo, -R), 0.0, None)


def _quadrant_area(X, Y, R):
    # area of {0 <= u <= X, 0 <= v <= Y, u^2 + v^2 < R^2}, X, Y >= 0
    Xc = np.minimum(X, R)
    Yc = np.minimum(Y, R)
    full = Xc**2 + Yc**2 <= R**2
    Rs = np.where(R > 0, R, 1.0)
    ustar = np.sqrt(np.clip(R**2 - Yc**2, 0.0, None))

    def G(t):
        s = np.clip(t / Rs, -1.0, 1.0)
        return 0.5 * (t * np.sqrt(np.clip(R**2 - t**2, 0.0, None)) + R**2 * np.arcsin(s))

    partial = Yc * ustar + G(Xc) - G(ustar)
    out = np.where(full, Xc * Yc, partial)
    return np.where(R > 0, out, 0.0)


def _rect_disk_area(lo, hi, R):
    total = np.zeros(np.broadcast(lo[..., 0], R).shape)
    for cx, sx in ((hi[..., 0], 1.0), (lo[..., 0], -1.0)):
        for cy, sy in ((hi[..., 1], 1.0), (lo[..., 1], -1.0)):
            total = total + sx * sy * np.sign(cx) * np.sign(cy) * _quadrant_area(
                np.abs(cx), np.abs(cy), R
            )
    return np.clip(total, 0.0, None)


def _critical_radii_sq(lo, hi):
    # squared radii at which the (n)-dim volume function has kinks
    m = lo.shape[-1]
    opts = []
    for i in range(m):
        a, b = lo[..., i], hi[..., i]
        inside = (a < 0) & (b > 0)
        opts.append((np.zeros_like(a), a**2, b**2, inside))
    out = []
    for choice in product(range(3), repeat=m):
        s = np.zeros(lo.shape[:-1])
        for i, c in enumerate(choice):
            z, a2, b2, _ = opts[i]
            s = s + (z, a2, b2)[c]
        out.append(s)
    return np.stack(out, axis=-1)


def box_ball_volume(lo, hi, R, gl_order: int = 8):
    """Volume of ``[lo, hi] ∩ B(0, R)`` for a batch of boxes.

    Closed form in one and two dimensions; in higher dimensions the first
    coordinate is integrated by Gauss-Legendre on pieces split at every
    kink of the lower-dimensional volume function.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    R = np.broadcast_to(np.asarray(R, dtype=float), lo.shape[:-1]).copy()
    n = lo.shape[-1]
    if n == 1:
        return _interval_length(lo[..., 0], hi[..., 0], R)
    if n == 2:
        return _rect_disk_area(lo, hi, R)

    flat_lo = lo.reshape(-1, n)
    flat_hi = hi.reshape(-1, n)
    flat_R = R.reshape(-1)
    out = np.zeros(flat_R.shape)
    dmin, dmax = box_distance_range(flat_lo, flat_hi)
    full = dmax <= flat_R
    out[full] = np.prod(flat_hi[full] - flat_lo[full], axis=-1)
    part = ~full & (dmin < flat_R)
    if not part.any():
        return out.reshape(R.shape)

    plo, phi, pR = flat_lo[part], flat_hi[part], flat_R[part]
    z0 = np.maximum(plo[:, 0], -pR)
    z1 = np.minimum(phi[:, 0], pR)
    c2 = _critical_radii_sq(plo[:, 1:], phi[:, 1:])
    zc = np.sqrt(np.clip(pR[:, None] ** 2 - c2, 0.0, None))
    brk = np.concatenate([z0[:, None], z1[:, None], zc, -zc, np.zeros_like(z0)[:, None]], axis=1)
    brk = np.clip(brk, z0[:, None], z1[:, None])
    brk.sort(axis=1)
    # z = R sin(theta) removes the square-root behaviour at z = +-R
    th = np.arcsin(np.clip(brk / pR[:, None], -1.0, 1.0))
    a, b = th[:, :-1], th[:, 1:]
    t, w = gauss_legendre(gl_order)
    theta = a[..., None] + (b - a)[..., None] * t
    z = pR[:, None, None] * np.sin(theta)
    Rz = pR[:, None, None] * np.cos(theta)
    wz = (b - a)[..., None] * w * Rz
    sub_lo = np.broadcast_to(plo[:, None, None, 1:], z.shape + (n - 1,))
    sub_hi = np.broadcast_to(phi[:, None, None, 1:], z.shape + (n - 1,))
    vals = box_ball_volume(sub_lo, sub_hi, Rz, gl_order)
    out[part] = (vals * wz).sum(axis=(1, 2))
    return out.reshape(R.shape)


def subdivided_ball_fraction(lo, hi, R, depth_cap: int = 12, tol: float = 1e-6):
    """Adaptive-subdivision estimate of ``|[lo, hi] ∩ B(0, R)|`` per box.

    Boxes fully inside count fully, boxes fully outside are dropped and the
    ones crossing the sphere are split into 2^n children until the still
    unresolved volume is at most ``tol`` times the running estimate or the
    depth cap is reached; leftovers are decided by a center test.

    Returns ``(volume, error_bound)`` arrays.
    """
    lo = np.atleast_2d(np.asarray(lo, dtype=float))
    hi = np.atleast_2d(np.asarray(hi, dtype=float))
    n = lo.shape[1]
    R = float(R)
    owner = np.arange(lo.shape[0])
    vol = np.zeros(lo.shape[0])
    err = np.zeros(lo.shape[0])
    corners = np.array(list(product((0, 1), repeat=n)), dtype=float)
    depth = 0
    while lo.shape[0]:
        dmin, dmax = box_distance_range(lo, hi)
        size = np.prod(hi - lo, axis=1)
        inside = dmax < R
        np.add.at(vol, owner[inside], size[inside])
        crossing = ~inside & (dmin < R)
        lo, hi, owner, size = lo[crossing], hi[crossing], owner[crossing], size[crossing]
        if not lo.shape[0]:
            break
        unresolved = size.sum()
        settled = vol.sum()
        if depth >= depth_cap or unresolved <= tol * max(settled, 1e-300) and depth > 0:
            centre = 0.5 * (lo + hi)
            hit = (centre**2).sum(1) < R * R
            np.add.at(vol, owner[hit], size[hit])
            np.add.at(err, owner, size)
            break
        half = 0.5 * (hi - lo)
        lo = (lo[:, None, :] + corners[None] * half[:, None, :]).reshape(-1, n)
        hi = lo + np.repeat(half, len(corners), axis=0)
        owner = np.repeat(owner, len(corners))
        depth += 1
    return vol, err


# ---------------------------------------------------------------------------
# integrals of |y|^{-lam} over boxes
# ---------------------------------------------------------------------------

def _newton_corner(a, b, c):
    # ∫_{[0,a]x[0,b]x[0,c]} |y|^{-1} dy, a, b, c >= 0
    r = np.sqrt(a * a + b * b + c * c)
    with np.errstate(divide="ignore", invalid="ignore"):
        def ash(u, v, w):
            d = np.sqrt(v * v + w * w)
            return np.where(v * w > 0, v * w * np.arcsinh(u / np.where(d > 0, d, 1.0)), 0.0)

        def at(u, v, w):
            den = u * r
            return np.where(u > 0, u * u * np.arctan(v * w / np.where(den > 0, den, 1.0)), 0.0)

        val = ash(a, b, c) + ash(b, a, c) + ash(c, a, b) - 0.5 * (at(a, b, c) + at(b, a, c) + at(c, a, b))
    return val


def _offset_face_integral(c, B, lam, levels: int = 20, order: int = 8):
    """∫ over [0, B_1]x...x[0, B_m] of (c^2 + |w|^2)^{-lam/2} dw, c > 0."""
    m = B.shape[-1]
    if m == 0:
        return c ** (-lam)
    if m == 1:
        Bv = B[..., 0]
        return Bv * c ** (-lam) * hyp2f1(lam / 2, 0.5, 1.5, -(Bv / c) ** 2)
    # integrate the first face coordinate numerically on panels graded
    # geometrically from the scale c towards B_1
    B1 = B[..., 0]
    edges = c[..., None] * 4.0 ** np.arange(levels)[None, :]
    edges = np.concatenate([np.zeros_like(B1)[..., None], edges, B1[..., None]], axis=-1)
    edges = np.minimum(edges, B1[..., None])
    edges.sort(axis=-1)
    a, b = edges[..., :-1], edges[..., 1:]
    t, w = gauss_legendre(order)
    x = a[..., None] + (b - a)[..., None] * t
    wx = (b - a)[..., None] * w
    cc = np.sqrt(c[..., None, None] ** 2 + x**2)
    Bs = np.broadcast_to(B[..., None, None, 1:], x.shape + (m - 1,))
    inner = _offset_face_integral(cc, Bs, lam, levels, order)
    return (inner * wx).sum(axis=(-1, -2))


def corner_box_integral(A, lam):
    """∫_{[0, A]} |y|^{-lam} dy for boxes with a corner at the origin.

    Uses the pyramid decomposition from the origin, which is exact for the
    homogeneous integrand and leaves smooth face integrals.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[-1]
    if n == 3 and lam == 1.0:
        return _newton_corner(A[..., 0], A[..., 1], A[..., 2])
    total = np.zeros(A.shape[:-1])
    nonzero = np.all(A > 0, axis=-1)
    if not nonzero.any():
        return total
    Az = A[nonzero]
    acc = np.zeros(Az.shape[0])
    for k in range(n):
        rest = np.delete(Az, k, axis=-1)
        acc += Az[:, k] * _offset_face_integral(Az[:, k], rest, lam)
    total[nonzero] = acc / (n - lam)
    return total


def _near_box_integral(lo, hi, lam):
    n = lo.shape[-1]
    total = np.zeros(lo.shape[:-1])
    for choice in product((0, 1), repeat=n):
        corner = np.stack([hi[..., i] if c else lo[..., i] for i, c in enumerate(choice)], axis=-1)
        sign = np.prod([1.0 if c else -1.0 for c in choice]) * np.prod(np.sign(corner), axis=-1)
        total = total + sign * corner_box_integral(np.abs(corner), lam)
    return total


def _gl_box_integral(lo, hi, lam, order):
    n = lo.shape[-1]
    t, w = gauss_legendre(order)
    grids = np.meshgrid(*([t] * n), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    wts = np.prod(np.meshgrid(*([w] * n), indexing="ij"), axis=0).ravel()
    size = hi - lo
    y = lo[:, None, :] + size[:, None, :] * pts[None]
    r2 = (y**2).sum(-1)
    return np.prod(size, axis=-1) * ((r2 ** (-lam / 2)) * wts).sum(-1)


def riesz_box_integral(lo, hi, lam: float, chunk: int = 20000):
    """∫ over the box ``[lo, hi]`` of ``|y|^{-lam}`` (origin = evaluation point).

    Tensor Gauss-Legendre for boxes well separated from the origin (order
    picked from the distance/diameter ratio); for nearby boxes an exact
    inclusion-exclusion over corner boxes anchored at the origin.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    shape = lo.shape[:-1]
    n = lo.shape[-1]
    lo = lo.reshape(-1, n)
    hi = hi.reshape(-1, n)
    out = np.empty(lo.shape[0])
    centre = 0.5 * (lo + hi)
    dist = np.sqrt((centre**2).sum(-1))
    diam = np.sqrt(((hi - lo) ** 2).sum(-1))
    ratio = dist / np.where(diam > 0, diam, 1.0)
    bands = [(ratio >= 8, 3), ((ratio >= 4) & (ratio < 8), 4), ((ratio >= 2) & (ratio < 4), 6)]
    near = ratio < 2
    for mask, order in bands:
        idx = np.nonzero(mask)[0]
        for s in range(0, idx.size, chunk):
            j = idx[s : s + chunk]
            out[j] = _gl_box_integral(lo[j], hi[j], lam, order)
    idx = np.nonzero(near)[0]
    for s in range(0, idx.size, chunk):
        j = idx[s : s + chunk]
        out[j] = _near_box_integral(lo[j], hi[j], lam)
    return out.reshape(shape)
