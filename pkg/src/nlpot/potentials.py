"""Wolff potentials, the Havin-Maz'ya potential and the centred maximal function.

    W_{α,p} σ(x) = ∫_0^∞ [σ(B(x, r)) / r^(n-αp)]^(1/(p-1)) dr / r

Atomic measures have a step function r ↦ σ(B(x, r)), which gives a closed
form.  For the quadrature form the radial integral is taken in log r with
composite Gauss-Legendre panels, split at every radius where the
integrand is not smooth when those are known (atom distances).  Below the
first radius the head is integrated in closed form from the local density,
and beyond the last one the tail is closed form with the full mass.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, log
from typing import Optional

import numpy as np

from ._parallel import parallel_map
from .fields import SampledField
from .geometry import box_ball_volume, box_distance_range, gauss_legendre, sphere_area, unit_ball_volume
from .kernels import KernelOperator, Riesz, cell_kernel_integrals, kernel_potential
from .lattice import LatticeConvolution, ball_tables, fft_shape, offset_range
from .measures import AtomicMeasure, CellDensityMeasure, Grid, Measure, reference_points, total_mass


@dataclass(frozen=True)
class WolffParams:
    alpha: float
    p: float
    n: int

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "n", int(self.n))
        if not self.p > 1:
            raise ValueError("Wolff potentials need p > 1")
        if not self.alpha > 0:
            raise ValueError("Wolff potentials need α > 0")
        if not self.alpha * self.p < self.n:
            raise ValueError("αp >= n: the potential is identically +inf for nonzero measures")

    @property
    def kappa(self) -> float:
        """Decay exponent (n - αp)/(p - 1) of the potential of a point mass."""
        return (self.n - self.alpha * self.p) / (self.p - 1)

    @property
    def beta(self) -> float:
        return self.n - self.alpha * self.p


@dataclass(frozen=True)
class QuadratureSpec:
    r_min: Optional[float] = None
    r_max: Optional[float] = None
    nodes_per_decade: int = 32

    def __post_init__(self):
        if self.nodes_per_decade < 8:
            raise ValueError("nodes_per_decade must be at least 8")
        if self.r_min is not None and self.r_max is not None and not self.r_min < self.r_max:
            raise ValueError("r_min must be below r_max")
        if self.r_min is not None and not self.r_min > 0:
            raise ValueError("r_min must be positive")


GL_ORDER = 8
TABLE_BUDGET = 600e6  # bytes of radial tables kept alive by one operator


def log_panels(edges, width_decades: float, order: int = GL_ORDER):
    """Nodes/weights for ∫ g(r) dr/r over [edges[0], edges[-1]] in t = log r.

    Each interval between consecutive edges is split into equal panels no
    wider than ``width_decades`` decades.
    """
    edges = np.asarray(edges, dtype=float)
    t_edges = np.log(edges)
    t, w = gauss_legendre(order)
    nodes, weights = [], []
    span = width_decades * log(10.0)
    for a, b in zip(t_edges[:-1], t_edges[1:]):
        if not b > a:
            continue
        k = max(1, ceil((b - a) / span))
        cuts = np.linspace(a, b, k + 1)
        lo, hi = cuts[:-1, None], cuts[1:, None]
        nodes.append((lo + (hi - lo) * t).ravel())
        weights.append(((hi - lo) * w).ravel())
    if not nodes:
        return np.zeros(0), np.zeros(0)
    return np.exp(np.concatenate(nodes)), np.concatenate(weights)


def _as_points(x, n):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    if X.shape[1] != n:
        raise ValueError(f"expected points in R^{n}")
    return X, single


def _head(density, wp: WolffParams, r0):
    # ∫_0^{r0} [ρ ω_n r^n / r^(n-αp)]^(1/(p-1)) dr/r
    a = wp.alpha * wp.p / (wp.p - 1)
    return (density * unit_ball_volume(wp.n)) ** (1 / (wp.p - 1)) * r0**a / a


def _tail(mass, wp: WolffParams, R):
    # ∫_R^∞ [M / r^(n-αp)]^(1/(p-1)) dr/r
    return mass ** (1 / (wp.p - 1)) * R ** (-wp.kappa) / wp.kappa


# ---------------------------------------------------------------------------
# atomic measures
# ---------------------------------------------------------------------------

def wolff_atomic_exact(mu: AtomicMeasure, wp: WolffParams, x, masses=None):
    """Closed-form W_{α,p} of an atomic measure.

    ``masses`` may be a (T, N) array of alternative mass vectors on the same
    atoms; the result then has shape (T, P).
    """
    X, single = _as_points(x, wp.n)
    m = mu.masses if masses is None else np.asarray(masses, dtype=float)
    batch = m.ndim == 2
    m2 = np.atleast_2d(m)
    if not len(mu):
        out = np.zeros((m2.shape[0], X.shape[0]))
    else:
        d = np.sqrt(((X[:, None, :] - mu.points[None]) ** 2).sum(-1))
        order = np.argsort(d, axis=1, kind="stable")
        ds = np.take_along_axis(d, order, axis=1)
        S = np.cumsum(m2[:, order], axis=-1)
        with np.errstate(divide="ignore"):
            dk = ds ** (-wp.kappa)
        dk_next = np.concatenate([dk[:, 1:], np.zeros((dk.shape[0], 1))], axis=1)
        gap = np.where(np.isinf(dk), np.inf, dk - dk_next)
        with np.errstate(invalid="ignore"):
            terms = np.where(S > 0, S ** (1 / (wp.p - 1)), 0.0) * gap[None]
            terms = np.where(np.isnan(terms), 0.0, terms)
        out = terms.sum(-1) / wp.kappa
        hit = ds[:, 0] == 0
        first_mass = m2[:, order[:, 0]]
        out = np.where(hit[None] & (first_mass > 0), np.inf, out)
    if not batch:
        out = out[0]
        return float(out[0]) if single else out
    return out[:, 0] if single else out


def _atomic_quadrature(mu: AtomicMeasure, wp: WolffParams, x, quad: QuadratureSpec):
    d = np.sqrt(((mu.points - x) ** 2).sum(-1))
    order = np.argsort(d, kind="stable")
    ds = d[order]
    if ds[0] == 0:
        return np.inf, 0.0
    S = np.cumsum(mu.masses[order])
    diam = np.ptp(mu.points, axis=0)
    diam = float(np.sqrt((diam**2).sum()))
    r_max = quad.r_max if quad.r_max is not None else 1e3 * (diam + ds[0])
    r_max = max(r_max, ds[-1])
    edges = np.unique(np.concatenate([ds, [r_max]]))
    width = GL_ORDER / quad.nodes_per_decade
    vals = []
    for order_gl in (GL_ORDER, GL_ORDER // 2):
        r, w = log_panels(edges, width, order_gl)
        # open ball: mass at radius r counts atoms with distance < r
        mass = np.concatenate([[0.0], S])[np.searchsorted(ds, r, side="left")]
        g = (mass / r**wp.beta) ** (1 / (wp.p - 1))
        vals.append(float(g @ w) + _tail(S[-1], wp, r_max))
    return vals[0], abs(vals[0] - vals[1])


# ---------------------------------------------------------------------------
# cell densities, arbitrary points
# ---------------------------------------------------------------------------

def _cone_scale(grid: Grid, x) -> float:
    # below this radius the ball around x only meets the cells incident to x,
    # so sigma(B(x, r)) is exactly c * r^n there
    h = grid.h
    best = np.inf
    for k in range(grid.n):
        u = (x[k] - grid.origin[k]) / h
        e = grid.extents[k]
        if u <= 0 or u >= e:
            dist = min(abs(u), abs(u - e)) * h
            if dist > 1e-12 * h:
                best = min(best, dist)
            continue
        frac = u - np.floor(u)
        cands = [frac, 1.0 - frac]
        cands = [c for c in cands if c > 1e-12]
        best = min(best, min(cands) * h)
    return best if np.isfinite(best) else 0.5 * h


def _cell_radial(mu: CellDensityMeasure, x, r):
    """sigma(B(x, r)) for a vector of radii (exact box/ball overlaps)."""
    lo, hi = mu.grid.cell_bounds()
    dens = mu.density.reshape(-1)
    keep = dens > 0
    lo, hi, dens = lo[keep] - x, hi[keep] - x, dens[keep]
    vol = mu.cell_size**mu.n
    dmin, dmax = box_distance_range(lo, hi)
    order = np.argsort(dmax)
    cum = np.concatenate([[0.0], np.cumsum(dens[order] * vol)])
    full = cum[np.searchsorted(dmax[order], r, side="right")]
    part = (dmin[None, :] < r[:, None]) & (dmax[None, :] > r[:, None])
    ri, ci = np.nonzero(part)
    extra = np.zeros_like(r)
    if ri.size:
        v = box_ball_volume(lo[ci], hi[ci], r[ri])
        np.add.at(extra, ri, dens[ci] * v)
    return full + extra, float(dmax.max())


def _cell_quadrature(mu: CellDensityMeasure, wp: WolffParams, x, quad: QuadratureSpec):
    M = total_mass(mu)
    if M == 0:
        return 0.0, 0.0
    r0 = _cone_scale(mu.grid, x)
    if quad.r_min is not None:
        r0 = min(r0, quad.r_min)
    m0, r_top = _cell_radial(mu, x, np.array([r0]))
    m0 = float(m0[0])
    if quad.r_max is not None:
        r_top = max(r_top, quad.r_max)
    head = 0.0
    if m0 > 0:
        # cone model: sigma(B(x, r)) = m0 (r / r0)^n for r < r0
        head = _head(m0 / (unit_ball_volume(wp.n) * r0**wp.n), wp, r0)
    width = GL_ORDER / quad.nodes_per_decade
    r, w = log_panels([r0, r_top], width, GL_ORDER)
    rc, wc = log_panels([r0, r_top], width, GL_ORDER // 2)
    mass, _ = _cell_radial(mu, x, np.concatenate([r, rc]))
    g = (np.clip(mass, 0.0, None) / np.concatenate([r, rc]) ** wp.beta) ** (1 / (wp.p - 1))
    fine = float(g[: r.size] @ w)
    coarse = float(g[r.size :] @ wc)
    tail = _tail(M, wp, r_top)
    return head + fine + tail, abs(fine - coarse)


def wolff_potential(mu: Measure, wp: WolffParams, x, quad: Optional[QuadratureSpec] = None, return_error: bool = False):
    """Quadrature form of W_{α,p}mu at one point or a batch of points.

    With ``return_error`` a second array holds the difference between the
    order-8 and order-4 Gauss-Legendre results on the same panels.
    """
    quad = quad or QuadratureSpec(nodes_per_decade=32 if isinstance(mu, AtomicMeasure) else 64)
    X, single = _as_points(x, wp.n)
    if mu.n != wp.n:
        raise ValueError("measure and parameters disagree on the dimension")
    if total_mass(mu) == 0:
        vals = np.zeros(X.shape[0])
        errs = np.zeros(X.shape[0])
    else:
        fn = _atomic_quadrature if isinstance(mu, AtomicMeasure) else _cell_quadrature
        res = parallel_map(lambda xi: fn(mu, wp, xi, quad), list(X))
        vals = np.array([v for v, _ in res])
        errs = np.array([e for _, e in res])
    if single:
        return (float(vals[0]), float(errs[0])) if return_error else float(vals[0])
    return (vals, errs) if return_error else vals


# ---------------------------------------------------------------------------
# lattice operator (targets on a grid aligned with the source cells)
# ---------------------------------------------------------------------------

class WolffLatticeOperator:
    """W_{α,p} of a cell density evaluated at (shifted) target cell centres.

    For p = 2 the potential is linear and equals the Riesz potential of
    order 2α divided by n - 2α, which is applied exactly.  Otherwise the
    ball masses at every radial node come from tabulated box/ball overlap
    volumes applied by FFT.
    """

    def __init__(self, wp: WolffParams, source: Grid, target: Optional[Grid] = None, shift=None, nodes_per_decade: int = 48):
        self.wp = wp
        self.source = source
        self.target = source if target is None else target
        self.shift = np.zeros(source.n) if shift is None else np.asarray(shift, dtype=float)
        if np.any(np.abs(self.shift) >= 0.5):
            raise ValueError("shift must stay inside the target cell")
        h = source.h
        self.o = self.target.offset_in(source)
        self.linear = wp.p == 2.0
        if self.linear:
            self._riesz = KernelOperator(Riesz(2 * wp.alpha, wp.n), source, self.target, shift if np.any(self.shift) else None)
            return
        lo, hi = offset_range(source.extents, self.o, self.target.extents)
        corner = np.maximum(np.abs(np.array(lo) + self.shift), np.abs(np.array(hi) + self.shift))
        self.r0 = 0.5 - float(np.abs(self.shift).max())
        self.r_top = float(np.sqrt(((corner + 0.5) ** 2).sum()))
        width = GL_ORDER / nodes_per_decade
        r, w = log_panels([self.r0, self.r_top], width, GL_ORDER)
        self.r_unit = r
        self.weights = w
        self._lo, self._hi = lo, hi
        fs = fft_shape(source.extents, lo, hi)
        per_radius = 8 * (np.prod(fs[:-1]) * (fs[-1] // 2 + 1) * 2 + np.prod(np.array(hi) - np.array(lo) + 1))
        self._chunk = max(1, int(TABLE_BUDGET // per_radius))
        self._conv = None
        if self._chunk >= len(r):
            tables = ball_tables(wp.n, r, lo, hi, self.shift if np.any(self.shift) else None)
            self._conv = LatticeConvolution(tables, source.extents, self.o, self.target.extents)
        self.h = h
        # own-cell index for the head term
        idx = np.stack(np.meshgrid(*[np.arange(e) for e in self.target.extents], indexing="ij"), -1).reshape(-1, source.n)
        own = idx + self.o
        self._own_ok = np.all((own >= 0) & (own < np.asarray(source.extents)), axis=1)
        self._own = np.ravel_multi_index(np.clip(own, 0, np.asarray(source.extents) - 1).T, source.extents)

    def apply(self, density) -> np.ndarray:
        d = np.asarray(density, dtype=float).reshape(-1)
        wp = self.wp
        if self.linear:
            return self._riesz.apply(d) / (wp.n - 2 * wp.alpha)
        h = self.h
        vol = h**wp.n
        M = d.sum() * vol
        if M == 0:
            return np.zeros(self.target.size)
        body = np.zeros(self.target.size)
        for k0, raw in self._ball_mass_chunks(d):
            mass = np.clip(raw.reshape(raw.shape[0], -1) * vol, 0.0, None)
            k1 = k0 + mass.shape[0]
            r = (self.r_unit[k0:k1] * h)[:, None]
            g = (mass / r**wp.beta) ** (1 / (wp.p - 1))
            body += (self.weights[k0:k1, None] * g).sum(0)
        rho = np.where(self._own_ok, d[self._own], 0.0)
        head = _head(rho, wp, self.r0 * h)
        tail = _tail(M, wp, self.r_top * h)
        return head + body + tail

    def _ball_mass_chunks(self, d):
        if self._conv is not None:
            yield 0, self._conv.apply(d)
            return
        # the full stack of radial tables would not fit the memory budget,
        # so they are rebuilt chunk by chunk on every application
        shift = self.shift if np.any(self.shift) else None
        for k0 in range(0, len(self.r_unit), self._chunk):
            radii = self.r_unit[k0 : k0 + self._chunk]
            tables = ball_tables(self.wp.n, radii, self._lo, self._hi, shift, cache=False)
            conv = LatticeConvolution(tables, self.source.extents, self.o, self.target.extents)
            yield k0, conv.apply(d)


def wolff_at_cells(mu: CellDensityMeasure, wp: WolffParams, target: Optional[Grid] = None) -> np.ndarray:
    """W_{α,p}mu at the cell centres of ``target`` (default: mu's own grid)."""
    op = WolffLatticeOperator(wp, mu.grid, target)
    return op.apply(mu.density)


# ---------------------------------------------------------------------------
# maximal function
# ---------------------------------------------------------------------------

def maximal_function(mu: Measure, f: SampledField, x):
    """Centred maximal function M_mu f at one point or a batch of points.

    Exact for atomic measures (the sup over radii is attained just above a
    distance to an atom).  For cell densities the sup runs over radii equal
    to the distances to the cell centres plus a logarithmic grid, which is
    a lower bound for the true supremum.
    """
    ref = reference_points(mu)
    if len(f) != ref.shape[0]:
        raise ValueError("f must be sampled at the measure's reference points")
    fv = np.abs(f.values)
    X, single = _as_points(x, mu.n)
    if isinstance(mu, AtomicMeasure):
        out = _maximal_atomic(mu, fv[None], X)[0]
    else:
        out = np.array(parallel_map(lambda xi: _maximal_cells(mu, fv, xi), list(X)))
    return float(out[0]) if single else out


def _maximal_atomic(mu: AtomicMeasure, F, X):
    """Vectorized exact maximal function for a stack of functions F (T, N)."""
    if not len(mu):
        return np.zeros((F.shape[0], X.shape[0]))
    d = np.sqrt(((X[:, None, :] - mu.points[None]) ** 2).sum(-1))
    order = np.argsort(d, axis=1, kind="stable")
    ds = np.take_along_axis(d, order, axis=1)
    m = mu.masses[order]
    cm = np.cumsum(m, axis=1)
    cfm = np.cumsum(F[:, order] * m[None], axis=-1)
    # a ball just above d_i holds every atom at distance <= d_i
    last = np.empty_like(order)
    for i in range(ds.shape[0]):
        last[i] = np.searchsorted(ds[i], ds[i], side="right") - 1
    cm_l = np.take_along_axis(cm, last, axis=1)
    cfm_l = np.take_along_axis(cfm, np.broadcast_to(last, cfm.shape), axis=-1)
    return (cfm_l / cm_l[None]).max(-1)


def maximal_function_atomic_batch(mu: AtomicMeasure, F, X) -> np.ndarray:
    """M_mu f for several functions at once, result shape (T, P)."""
    return _maximal_atomic(mu, np.abs(np.atleast_2d(F)), np.atleast_2d(X))


def _maximal_cells(mu: CellDensityMeasure, fv, x):
    lo, hi = mu.grid.cell_bounds()
    dens = mu.density.reshape(-1)
    keep = dens > 0
    if not keep.any():
        return 0.0
    lo, hi, dens, fk = lo[keep] - x, hi[keep] - x, dens[keep], fv[keep]
    centre_d = np.sqrt(((0.5 * (lo + hi)) ** 2).sum(-1))
    dmin, dmax = box_distance_range(lo, hi)
    top = dmax.max()
    small = max(dmin.min(), 1e-3 * mu.cell_size)
    radii = np.unique(np.concatenate([centre_d, np.geomspace(small, top, 64)]))
    radii = radii[radii > 0]
    best = 0.0
    for r in radii:
        v = box_ball_volume(lo, hi, np.full(dens.size, r))
        m = dens @ v
        if m > 0:
            best = max(best, float((fk * dens) @ v / m))
    return best


# ---------------------------------------------------------------------------
# Havin-Maz'ya potential
# ---------------------------------------------------------------------------

def havin_mazya_potential(mu: Measure, wp: WolffParams, x, grid: Grid):
    """V_{α,p}mu = I_α[(I_α mu)^(1/(p-1)) dx] with the inner potential on ``grid``.

    The outer integral runs over the grid cells (piecewise-constant inner
    values) plus a tail for the region outside the grid, where the inner
    potential is replaced by its far field (M/|y-c|^(n-α))^(1/(p-1)) and the
    outer kernel by |y-c|^(α-n) over the exterior of the ball with the
    grid's volume.
    """
    if not wp.alpha < wp.n:
        raise ValueError("Havin-Maz'ya potential needs α < n")
    X, single = _as_points(x, wp.n)
    M = total_mass(mu)
    if M == 0:
        out = np.zeros(X.shape[0])
        return float(out[0]) if single else out
    K = Riesz(wp.alpha, wp.n)
    centres = grid.centers()
    if isinstance(mu, CellDensityMeasure) and _aligned(mu.grid, grid):
        inner = KernelOperator(K, mu.grid, grid).apply(mu.density)
    else:
        inner = kernel_potential(K, mu, centres)
    inner = np.where(np.isfinite(inner), inner, 0.0)
    f = inner ** (1 / (wp.p - 1))
    lo, hi = grid.cell_bounds()
    body = np.concatenate(
        parallel_map(lambda c: cell_kernel_integrals(K, c, lo, hi) @ f, [X[s : s + 64] for s in range(0, X.shape[0], 64)])
    )
    R_eq = (grid.size * grid.cell_volume / unit_ball_volume(wp.n)) ** (1 / wp.n)
    e = (wp.n - wp.alpha) / (wp.p - 1)
    tail = sphere_area(wp.n) * M ** (1 / (wp.p - 1)) * R_eq ** (wp.alpha - e) / (e - wp.alpha)
    out = body + tail
    return float(out[0]) if single else out


def _aligned(a: Grid, b: Grid) -> bool:
    try:
        b.offset_in(a)
    except ValueError:
        return False
    return True


def cell_operator(target, source: Grid, target_grid: Optional[Grid] = None, shift=None, nodes_per_decade: int = 48):
    """Lattice operator for either a kernel (KernelSpec) or W_{α,p} (WolffParams)."""
    if isinstance(target, WolffParams):
        return WolffLatticeOperator(target, source, target_grid, shift, nodes_per_decade)
    return KernelOperator(target, source, target_grid, shift)
