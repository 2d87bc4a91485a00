"""Lebesgue and σ-weighted norms of sampled fields, and membership tests.

Infinite results carry a locus: ``"head"`` when a node value is already
infinite (or the local singularity is not integrable) and ``"tail"`` when
the decay model at infinity is not integrable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import beta as beta_fn

from .exponents import ProblemParams, derive_exponents, fraction_str
from .fields import SampledField, TailModel
from .geometry import box_ball_volume, gauss_legendre, sphere_area
from .kernels import GREEN_BALL, GREEN_HALF, KernelSpec, Riesz
from .measures import AtomicMeasure, CellDensityMeasure, Grid, Measure, reference_masses, reference_points, total_mass
from .potentials import WolffParams, cell_operator, wolff_atomic_exact

__all__ = [
    "SampledField",
    "TailModel",
    "NormResult",
    "ConditionResult",
    "lp_norm_dx",
    "lp_norm_dsigma",
    "fit_tail",
    "tail_integral",
    "condition_integral",
    "extended_dx_norm",
    "CONDITIONS",
]


@dataclass
class NormResult:
    value: float
    integral: float
    finite: bool
    locus: Optional[str] = None
    warning: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "value": _jsonable(self.value),
            "integral": _jsonable(self.integral),
            "finite": self.finite,
            "locus": self.locus,
            "warning": self.warning,
        }


def _jsonable(v):
    v = float(v)
    return v if np.isfinite(v) else "inf"


def _infinite(locus, warning=None) -> NormResult:
    return NormResult(np.inf, np.inf, False, locus, warning)


# ---------------------------------------------------------------------------
# tails
# ---------------------------------------------------------------------------

def _model_box_integral(tail: TailModel, exponent: float, box: Grid, order: int = 3) -> float:
    t, w = gauss_legendre(order)
    n = box.n
    mesh = np.meshgrid(*([t] * n), indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], -1)
    wts = np.prod(np.meshgrid(*([w] * n), indexing="ij"), axis=0).ravel()
    lo, _ = box.cell_bounds()
    total = 0.0
    step = max(1, 2_000_000 // pts.shape[0])
    for s in range(0, lo.shape[0], step):
        y = lo[s : s + step, None, :] + box.h * pts[None]
        total += float(((tail(y) ** exponent) * wts).sum()) * box.cell_volume
    return total


def tail_integral(tail: TailModel, exponent: float, box: Grid, half_space: bool = False) -> float:
    """∫ over R^n minus the box of (C(1+|x-c|)^(-δ))^exponent dx.

    The whole-space integral is a Beta function; the part inside the box is
    subtracted by tensor Gauss-Legendre.  With ``half_space`` both pieces
    are restricted to {x_n > 0}, taking half of the whole-space integral
    (the model centre is expected on the boundary plane).
    """
    n = box.n
    a = tail.delta * exponent
    if a <= n:
        return np.inf
    full = tail.C**exponent * sphere_area(n) * beta_fn(n, a - n)
    if half_space:
        full *= 0.5
        lo = box.origin.copy()
        ext = list(box.extents)
        k0 = int(np.ceil(max(0.0, -lo[-1]) / box.h - 1e-9))
        if k0 >= ext[-1]:
            return full
        lo[-1] += k0 * box.h
        ext[-1] -= k0
        box = Grid(lo, box.h, tuple(ext))
    inside = _model_box_integral(tail, exponent, box)
    return max(full - inside, 0.0)


def fit_tail(points, values, delta: float, center=None) -> TailModel:
    """Least-squares C in log v = log C - δ log(1 + |x - c|) with δ fixed."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    values = np.asarray(values, dtype=float)
    c = np.zeros(points.shape[1]) if center is None else np.asarray(center, dtype=float)
    ok = np.isfinite(values) & (values > 0)
    if not ok.any():
        raise ValueError("no positive samples to fit a tail")
    rho = np.sqrt(((points[ok] - c) ** 2).sum(-1))
    logC = np.mean(np.log(values[ok]) + delta * np.log1p(rho))
    return TailModel(float(np.exp(logC)), float(delta), c)


def axis_ray_indices(grid: Grid, center, inner_radius: float, directions=None) -> np.ndarray:
    """Flat indices of grid cells on the 2n axis rays from ``center`` beyond ``inner_radius``."""
    c = np.asarray(center, dtype=float)
    idx0 = np.clip(np.floor((c - grid.origin) / grid.h).astype(int), 0, np.asarray(grid.extents) - 1)
    out = []
    dirs = directions if directions is not None else [(k, s) for k in range(grid.n) for s in (1, -1)]
    for k, s in dirs:
        steps = np.arange(grid.extents[k])
        idx = np.tile(idx0, (steps.size, 1))
        idx[:, k] = steps
        pos = grid.origin[k] + (steps + 0.5) * grid.h
        sel = (s * (pos - c[k]) > inner_radius)
        if sel.any():
            out.append(np.ravel_multi_index(idx[sel].T, grid.extents))
    return np.concatenate(out) if out else np.zeros(0, dtype=int)


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

def lp_norm_dx(field: SampledField, exponent: float, box: Grid, half_space: bool = False) -> NormResult:
    """L^exponent(dx) norm of a field sampled at the cell centres of ``box``.

    Grid part: h^n Σ v^e; outside the box the field's tail model is
    integrated analytically.  Without a tail model the result is the grid
    part alone, flagged with a warning unless the field visibly vanishes on
    the box boundary.
    """
    e = float(exponent)
    if not e > 0:
        raise ValueError("exponent must be positive")
    if len(field) != box.size:
        raise ValueError("field is not sampled on the box grid")
    v = field.values
    if np.any(np.isinf(v)):
        return _infinite("head")
    grid_part = float(np.sum(v**e)) * box.cell_volume
    warning = None
    tail_part = 0.0
    if field.tail is not None:
        if field.tail.delta * e <= box.n:
            return _infinite("tail")
        tail_part = tail_integral(field.tail, e, box, half_space)
    else:
        vv = v.reshape(box.extents)
        edge = max(
            float(np.max(np.abs(np.take(vv, [0, -1], axis=k)), initial=0.0)) for k in range(box.n)
        )
        if edge > 1e-6 * max(float(v.max(initial=0.0)), 1e-300):
            warning = "no tail model and the field does not vanish on the box boundary"
    total = grid_part + tail_part
    return NormResult(total ** (1 / e), total, True, None, warning)


def lp_norm_dsigma(field: SampledField, exponent: float, mu: Measure) -> NormResult:
    """(Σ v(node)^e · mass(node))^(1/e) over the measure's reference points."""
    e = float(exponent)
    if not e > 0:
        raise ValueError("exponent must be positive")
    ref = reference_points(mu)
    if len(field) != ref.shape[0]:
        raise ValueError("field nodes do not match the measure's reference points")
    m = reference_masses(mu)
    v = field.values
    massive = m > 0
    if np.any(np.isinf(v[massive])):
        return _infinite("head")
    total = float(np.sum(v[massive] ** e * m[massive]))
    return NormResult(total ** (1 / e), total, True)


def extended_dx_norm(mu: CellDensityMeasure, values, box: Grid, delta: float, exponent: float) -> NormResult:
    """L^exponent(dx) norm of a potential of ``mu`` sampled on ``box``.

    A decay model C(1+|x-c|)^(-delta) centred on the support is fitted along
    the axis rays of the box and integrated beyond it.
    """
    g = mu.grid
    lo, hi = g.cell_bounds()
    keep = mu.density.reshape(-1) > 0
    c = 0.5 * (lo[keep].min(0) + hi[keep].max(0))
    rad = 0.5 * float(np.sqrt(((hi[keep].max(0) - lo[keep].min(0)) ** 2).sum()))
    idx = axis_ray_indices(box, c, rad + 2 * box.h)
    vals = np.clip(np.asarray(values, dtype=float), 0.0, None)
    if idx.size == 0:
        return _infinite("tail", "padding too small to fit a tail")
    tail = fit_tail(box.centers()[idx], vals[idx], delta, c)
    return lp_norm_dx(SampledField(box.centers(), vals, tail), exponent, box)


# ---------------------------------------------------------------------------
# membership conditions
# ---------------------------------------------------------------------------

CONDITIONS = ("dsigma-wolff", "dsigma-riesz", "dsigma-green", "dx-wolff", "dx-riesz", "dx-green")


@dataclass
class ConditionResult:
    which: str
    exponent: str
    value: float
    finite: bool
    locus: Optional[str] = None
    refinement_history: list = field(default_factory=list)
    warning: Optional[str] = None

    @property
    def drift(self) -> Optional[float]:
        h = [v for v in self.refinement_history if np.isfinite(v)]
        if len(h) < 2:
            return None
        return abs(h[-1] - h[-2]) / abs(h[-1])

    def to_dict(self) -> dict:
        return {
            "which": self.which,
            "exponent": self.exponent,
            "value": _jsonable(self.value),
            "finite": self.finite,
            "locus": self.locus,
            "refinement_history": [_jsonable(v) for v in self.refinement_history],
            "drift": self.drift,
            "warning": self.warning,
        }


def _target_for(which: str, pp: ProblemParams, kernel: Optional[KernelSpec]):
    n = pp.n
    if which.endswith("wolff"):
        return WolffParams(float(pp.alpha), float(pp.p), n)
    if which.endswith("riesz"):
        return Riesz(2 * float(pp.alpha), n)
    if kernel is None:
        raise ValueError("green conditions need a kernel")
    return kernel


def _exponent_for(which: str, pp: ProblemParams):
    if which.endswith("wolff"):
        es = derive_exponents(pp)
        return es.sigma_norm_exponent if which.startswith("dsigma") else es.dx_norm_exponent
    # kernel conditions use the p = 2 exponents (α = 1 for Green kernels)
    kp = pp.replace(p=2) if which.endswith("riesz") else pp.replace(p=2, alpha=1)
    es = derive_exponents(kp)
    return es.kernel_sigma_exponent if which.startswith("dsigma") else es.kernel_dx_exponent


def _decay(target) -> float:
    if isinstance(target, WolffParams):
        return target.kappa
    if target.kind == GREEN_HALF:
        return target.n - 1.0
    return target.lam


def _single_level(mu: CellDensityMeasure, which: str, target, e: float, pad) -> tuple:
    if which.startswith("dsigma"):
        vals = cell_operator(target, mu.grid).apply(mu.density)
        f = SampledField(mu.grid.centers(), np.clip(vals, 0.0, None))
        res = lp_norm_dsigma(f, e, mu)
        return res.integral, res.locus, res.warning
    # Lebesgue norms on a padded grid plus a fitted decay model
    g = mu.grid
    if isinstance(target, KernelSpec) and target.kind == GREEN_BALL:
        return _ball_dx(mu, target, e)
    padc = pad if pad is not None else max(g.extents)
    box = g.padded(padc)
    half = isinstance(target, KernelSpec) and target.kind == GREEN_HALF
    if half:
        k0 = int(np.floor(-box.origin[-1] / box.h + 1e-9))
        if k0 > 0:
            lo = box.origin.copy()
            lo[-1] += k0 * box.h
            ext = list(box.extents)
            ext[-1] -= k0
            box = Grid(lo, box.h, tuple(ext))
    vals = np.clip(cell_operator(target, g, box).apply(mu.density), 0.0, None)
    lo_s, hi_s = g.cell_bounds()
    keep = mu.density.reshape(-1) > 0
    c = 0.5 * (lo_s[keep].min(0) + hi_s[keep].max(0))
    support_r = 0.5 * float(np.sqrt(((hi_s[keep].max(0) - lo_s[keep].min(0)) ** 2).sum()))
    dirs = None
    if half:
        c[-1] = 0.0
        dirs = [(k, s) for k in range(g.n - 1) for s in (1, -1)] + [(g.n - 1, 1)]
    idx = axis_ray_indices(box, c, support_r + 2 * box.h, dirs)
    if idx.size == 0:
        return np.inf, "tail", "padding too small to fit a tail"
    tail = fit_tail(box.centers()[idx], vals[idx], _decay(target), c)
    res = lp_norm_dx(SampledField(box.centers(), vals, tail), e, box, half_space=half)
    return res.integral, res.locus, res.warning


def _ball_dx(mu: CellDensityMeasure, K: KernelSpec, e: float):
    g = mu.grid
    lo_c = np.floor((K.center - K.radius - g.origin) / g.h).astype(int)
    hi_c = np.ceil((K.center + K.radius - g.origin) / g.h).astype(int)
    box = Grid(g.origin + lo_c * g.h, g.h, tuple(int(v) for v in hi_c - lo_c))
    vals = np.clip(cell_operator(K, g, box).apply(mu.density), 0.0, None)
    lo, hi = box.cell_bounds()
    w = box_ball_volume(lo - K.center, hi - K.center, K.radius)
    return float(np.sum(vals**e * w)), None, None


def condition_integral(
    mu: Measure,
    pp: ProblemParams,
    which: str,
    kernel: Optional[KernelSpec] = None,
    levels: int = 1,
    pad: Optional[int] = None,
) -> ConditionResult:
    """Evaluate one membership condition as an integral with a finite/infinite verdict.

    ``dsigma-*`` give ∫ P^s dσ and ``dx-*`` give ∫ P^s dx, with P the Wolff,
    Riesz or Green potential of mu and s the matching exponent.  Cell
    measures are re-evaluated on ``levels`` successively halved grids (the
    measure itself does not change) and the history is returned.
    """
    if which not in CONDITIONS:
        raise ValueError(f"unknown condition {which!r}")
    e_exact = _exponent_for(which, pp)
    e = float(e_exact)
    es = fraction_str(e_exact)
    target = _target_for(which, pp, kernel)
    if total_mass(mu) == 0:
        return ConditionResult(which, es, 0.0, True, None, [0.0])
    if isinstance(mu, AtomicMeasure):
        return _atomic_condition(mu, which, target, e, es)
    hist = []
    locus = warning = None
    m = mu
    for level in range(levels):
        if level:
            m = m.refine(2)
        val, locus, warning = _single_level(m, which, target, e, None if pad is None else pad * 2**level)
        hist.append(val)
        if not np.isfinite(val):
            break
    val = hist[-1]
    return ConditionResult(which, es, val, bool(np.isfinite(val)), locus, hist, warning)


def _atomic_condition(mu: AtomicMeasure, which, target, e, es) -> ConditionResult:
    if which.startswith("dsigma"):
        # every potential here is +inf on the atoms, which carry mass
        return ConditionResult(which, es, np.inf, False, "head", [np.inf])
    # dx: near an atom the potential behaves like |x - a|^(-decay)
    if _decay(target) * e >= mu.n:
        return ConditionResult(which, es, np.inf, False, "head", [np.inf])
    if isinstance(target, WolffParams):
        lo = mu.points.min(0) - 2 * (np.ptp(mu.points, 0).max() + 1)
        hi = mu.points.max(0) + 2 * (np.ptp(mu.points, 0).max() + 1)
        N = 32
        box = Grid(lo, float((hi - lo).max()) / N, (N,) * mu.n)
        vals = wolff_atomic_exact(mu, target, box.centers())
        tail = TailModel(total_mass(mu) ** (1 / (target.p - 1)) / target.kappa, target.kappa, mu.points.mean(0))
        res = lp_norm_dx(SampledField(box.centers(), vals, tail), e, box)
        return ConditionResult(which, es, res.integral, res.finite, res.locus, [res.integral],
                               "integrable point singularities estimated by the midpoint rule")
    raise NotImplementedError("Lebesgue conditions for atomic measures are only provided for Wolff potentials")
