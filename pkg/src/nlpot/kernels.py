"""Positive kernels G(x, y) and their potentials.

Built-in kernels are the unnormalized Riesz kernel |x-y|^(2a-n) and the
classical Green functions of -Δ for a ball and for the half-space
{x_n > 0}, both written without the dimensional constant.  All three are
symmetric (quasi-symmetry constant 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._parallel import parallel_map
from .geometry import riesz_box_integral
from .lattice import LatticeConvolution, offset_range, riesz_table
from .measures import AtomicMeasure, CellDensityMeasure, Grid, Measure

DENSE_LIMIT = 20_000_000

RIESZ = "riesz"
GREEN_BALL = "green_ball"
GREEN_HALF = "green_half_space"


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class KernelSpec:
    kind: str
    n: int
    two_alpha: float = 2.0
    radius: float = 1.0
    center: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in (RIESZ, GREEN_BALL, GREEN_HALF):
            raise ValueError(f"unknown kernel {self.kind!r}")
        if self.kind == RIESZ:
            if not (0 < self.two_alpha < self.n):
                raise ValueError("Riesz order must satisfy 0 < 2α < n")
            if self.n < 2:
                raise ValueError("dimension must be at least 2")
        else:
            if self.n < 3:
                raise ValueError("Green kernels need n >= 3")
            object.__setattr__(self, "two_alpha", 2.0)
        if self.kind == GREEN_BALL:
            if not self.radius > 0:
                raise ValueError("ball radius must be positive")
            c = np.zeros(self.n) if self.center is None else np.asarray(self.center, dtype=float)
            if c.shape != (self.n,):
                raise ValueError("ball centre has the wrong dimension")
            object.__setattr__(self, "center", c)

    @property
    def lam(self) -> float:
        """Order of the singularity, the kernel behaves like |x-y|^(-lam)."""
        return self.n - self.two_alpha

    @property
    def wmp_constant(self) -> Optional[float]:
        # strong maximum principle for Green kernels and Riesz kernels of
        # order 2α <= 2; larger Riesz orders only have a measured constant
        if self.kind != RIESZ or self.two_alpha <= 2.0:
            return 1.0
        return None

    @property
    def quasi_symmetry(self) -> float:
        return 1.0

    def contains(self, x, closed: bool = False) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == RIESZ:
            return np.ones(x.shape[:-1], dtype=bool)
        if self.kind == GREEN_HALF:
            return x[..., -1] >= 0 if closed else x[..., -1] > 0
        d2 = ((x - self.center) ** 2).sum(-1)
        return d2 <= self.radius**2 if closed else d2 < self.radius**2

    def describe(self) -> dict:
        out = {"kind": self.kind, "n": self.n}
        if self.kind == RIESZ:
            out["two_alpha"] = self.two_alpha
        if self.kind == GREEN_BALL:
            out["radius"] = self.radius
            out["center"] = [float(v) for v in self.center]
        return out


def Riesz(two_alpha: float, n: int) -> KernelSpec:
    return KernelSpec(RIESZ, n, two_alpha=two_alpha)


def GreenBall(n: int, radius: float = 1.0, center=None) -> KernelSpec:
    return KernelSpec(GREEN_BALL, n, radius=radius, center=center)


def GreenHalfSpace(n: int) -> KernelSpec:
    return KernelSpec(GREEN_HALF, n)


def _check_dim(K: KernelSpec, *arrs):
    for a in arrs:
        if a.shape[-1] != K.n:
            raise ValueError(f"expected points in R^{K.n}")


def kernel_eval(K: KernelSpec, x, y):
    """G(x, y), vectorized by broadcasting; +inf on the diagonal."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_dim(K, x, y)
    if not (np.all(K.contains(x, closed=True)) and np.all(K.contains(y, closed=True))):
        raise DomainError("point outside the kernel's domain")
    d2 = ((x - y) ** 2).sum(-1)
    e = -0.5 * K.lam
    with np.errstate(divide="ignore"):
        direct = np.where(d2 > 0, d2, 0.0) ** e
    if K.kind == RIESZ:
        out = direct
    elif K.kind == GREEN_HALF:
        diff = x - y
        img2 = (diff[..., :-1] ** 2).sum(-1) + (x[..., -1] + y[..., -1]) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            out = direct - np.where(img2 > 0, img2, 0.0) ** e
    else:
        xc = x - K.center
        yc = y - K.center
        R2 = K.radius**2
        img2 = (xc**2).sum(-1) * (yc**2).sum(-1) / R2 - 2.0 * (xc * yc).sum(-1) + R2
        with np.errstate(divide="ignore", invalid="ignore"):
            out = direct - np.where(img2 > 0, img2, 0.0) ** e
    out = np.where(d2 > 0, out, np.inf)
    if K.kind != RIESZ:
        # on the boundary the kernel vanishes (the difference above may be
        # slightly negative from rounding)
        out = np.where(np.isinf(out), out, np.maximum(out, 0.0))
    return out[()] if np.ndim(out) == 0 else out


def _check_support(K: KernelSpec, mu: Measure):
    if K.kind == RIESZ:
        return
    if isinstance(mu, AtomicMeasure):
        if len(mu) and not np.all(K.contains(mu.points)):
            raise DomainError("measure support leaves the kernel's domain")
        return
    lo, hi = mu.grid.cell_bounds()
    keep = mu.density.reshape(-1) > 0
    lo, hi = lo[keep], hi[keep]
    if K.kind == GREEN_HALF:
        ok = np.all(lo[:, -1] >= -1e-12)
    else:
        far = np.maximum(np.abs(lo - K.center), np.abs(hi - K.center))
        ok = np.all(np.sqrt((far**2).sum(-1)) <= K.radius * (1 + 1e-12))
    if not ok:
        raise DomainError("measure support leaves the kernel's domain")


def _image_integrals(K: KernelSpec, x, lo, hi) -> np.ndarray:
    """∫_{[lo_j, hi_j]} of the reflected (image) part of the Green kernel."""
    xs = x[:, None, :]
    if K.kind == GREEN_HALF:
        rlo = lo.copy()
        rhi = hi.copy()
        rlo[:, -1], rhi[:, -1] = -hi[:, -1], -lo[:, -1]
        return riesz_box_integral(rlo[None] - xs, rhi[None] - xs, K.lam)
    # ball: G_img(x, y) = (|x-c|/R)^(2-n) |y - x*|^(2-n), x* the inversion of x
    xc = x - K.center
    r2 = (xc**2).sum(-1)
    vol = np.prod(hi - lo, axis=-1)
    img = np.empty((x.shape[0], lo.shape[0]))
    at_c = r2 == 0
    img[at_c] = K.radius ** (2 - K.n) * vol[None, :]
    nz = ~at_c
    if nz.any():
        xstar = K.center + K.radius**2 * xc[nz] / r2[nz, None]
        fac = (np.sqrt(r2[nz]) / K.radius) ** (2 - K.n)
        xs2 = xstar[:, None, :]
        img[nz] = fac[:, None] * riesz_box_integral(lo[None] - xs2, hi[None] - xs2, K.lam)
    return img


def cell_kernel_integrals(K: KernelSpec, x, lo, hi) -> np.ndarray:
    """Matrix of ∫_{[lo_j, hi_j]} G(x_i, y) dy, shape (points, cells)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    xs = x[:, None, :]
    out = riesz_box_integral(lo[None] - xs, hi[None] - xs, K.lam)
    if K.kind != RIESZ:
        out = out - _image_integrals(K, x, lo, hi)
        inside = K.contains(x)
        out = np.where(inside[:, None], np.maximum(out, 0.0), 0.0)
    return out


def kernel_potential(K: KernelSpec, mu: Measure, x, tol: float = 1e-9, chunk_pairs: int = 400000):
    """**G**mu at one point (scalar) or many points (array).

    Cell densities are integrated cell by cell with exact box integrals of
    the singular part (the reflected Green terms are box integrals of the
    same kind), so ``tol`` is met without subdivision.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    _check_dim(K, X)
    _check_support(K, mu)
    if K.kind != RIESZ and not np.all(K.contains(X, closed=True)):
        raise DomainError("evaluation point outside the kernel's domain")
    if isinstance(mu, AtomicMeasure):
        if not len(mu):
            out = np.zeros(X.shape[0])
        else:
            vals = kernel_eval(K, X[:, None, :], mu.points[None, :, :])
            with np.errstate(invalid="ignore"):
                out = np.where(np.isinf(vals).any(1), np.inf, (vals * mu.masses).sum(1))
        return float(out[0]) if single else out
    lo, hi = mu.grid.cell_bounds()
    dens = mu.density.reshape(-1)
    keep = dens > 0
    lo, hi, dens = lo[keep], hi[keep], dens[keep]
    if not dens.size:
        return 0.0 if single else np.zeros(X.shape[0])
    step = max(1, chunk_pairs // dens.size)
    chunks = [X[s : s + step] for s in range(0, X.shape[0], step)]
    parts = parallel_map(lambda c: cell_kernel_integrals(K, c, lo, hi) @ dens, chunks)
    out = np.concatenate(parts)
    return float(out[0]) if single else out


class KernelOperator:
    """Linear map from cell densities on ``source`` to **G** values at targets.

    Targets are the points ``target.centers() + shift * h``.
    """

    def __init__(self, K: KernelSpec, source: Grid, target: Optional[Grid] = None, shift=None):
        self.K = K
        self.source = source
        self.target = source if target is None else target
        self.shift = None if shift is None or not np.any(shift) else np.asarray(shift, dtype=float)
        h = source.h
        n = source.n
        if n != K.n:
            raise ValueError("grid and kernel dimensions differ")
        o = self.target.offset_in(source)
        pts = self.target.centers() + (0.0 if self.shift is None else self.shift * h)
        self.points = pts
        self._dense = None
        self._mask = None
        scale = h ** (n - K.lam)
        lo_r, hi_r = offset_range(source.extents, o, self.target.extents)
        T = scale * riesz_table(n, K.lam, lo_r, hi_r, self.shift)
        self._direct = LatticeConvolution(T, source.extents, o, self.target.extents)
        self._image = None
        self._src_ok = None
        if K.kind != RIESZ:
            slo, shi = source.cell_bounds()
            if K.kind == GREEN_HALF:
                self._src_ok = slo[:, -1] >= -1e-12 * h
            else:
                far = np.maximum(np.abs(slo - K.center), np.abs(shi - K.center))
                self._src_ok = np.sqrt((far**2).sum(-1)) <= K.radius * (1 + 1e-12)
        if K.kind == GREEN_BALL:
            self._mask = K.contains(pts)
            self._cells = source.cell_bounds()
            if self.target.size * source.size <= DENSE_LIMIT:
                self._dense = self._image_block(np.arange(self.target.size))
            return
        if K.kind == GREEN_HALF:
            s = 2.0 * source.origin[-1] / h
            if abs(s - round(s)) > 1e-9:
                raise ValueError("half-space lattice needs origin_n on the half-cell lattice")
            o_img = o.copy()
            o_img[-1] = o[-1] + source.extents[-1] + int(round(s))
            lo_i, hi_i = offset_range(source.extents, o_img, self.target.extents)
            Ti = scale * riesz_table(n, K.lam, lo_i, hi_i, self.shift)
            self._image = LatticeConvolution(Ti, source.extents, o_img, self.target.extents, flip_axes=(n - 1,))
            self._mask = K.contains(pts)

    def _image_block(self, rows):
        lo, hi = self._cells
        out = np.zeros((rows.size, lo.shape[0]))
        inside = self._mask[rows]
        step = max(1, 200000 // max(lo.shape[0], 1))
        idx = np.nonzero(inside)[0]
        for s0 in range(0, idx.size, step):
            r = idx[s0 : s0 + step]
            out[r] = _image_integrals(self.K, self.points[rows[r]], lo, hi)
        return out

    def apply(self, density) -> np.ndarray:
        d = np.asarray(density, dtype=float).reshape(-1)
        out = self._direct.apply(d).reshape(-1)
        if self.K.kind == RIESZ:
            return out
        if np.any(d[~self._src_ok] > 0):
            raise DomainError("density charges cells outside the kernel's domain")
        if self._image is not None:
            img = self._image.apply(d).reshape(-1)
        elif self._dense is not None:
            img = self._dense @ d
        else:
            img = np.zeros_like(out)
            rows = np.arange(self.target.size)
            step = max(1, DENSE_LIMIT // max(self.source.size, 1))
            for s0 in range(0, rows.size, step):
                r = rows[s0 : s0 + step]
                img[r] = self._image_block(r) @ d
        return np.where(self._mask, np.maximum(out - img, 0.0), 0.0)


def kernel_operator(K: KernelSpec, source: Grid, target: Optional[Grid] = None, shift=None) -> KernelOperator:
    return KernelOperator(K, source, target, shift)
