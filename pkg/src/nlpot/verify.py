"""Executable checks of the pointwise and norm inequalities.

Inequalities with an explicit constant (WMP constant h, constant 1) are
asserted with a slack; those with an unspecified constant c(α,p,n) only
report the measured constant.  Margins are relative:
(larger side - smaller side) / max(|sides|), so a margin below -slack is a
violation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from scipy.optimize import minimize

from .exponents import ProblemParams, derive_exponents
from .fields import SampledField
from .kernels import GREEN_BALL, GREEN_HALF, KernelSpec, GreenBall, GreenHalfSpace, Riesz, kernel_eval, kernel_potential
from .measures import AtomicMeasure, CellDensityMeasure, Grid, Measure, reference_masses, scale_density, total_mass
from .norms import condition_integral, extended_dx_norm, lp_norm_dsigma
from .potentials import (
    WolffParams,
    cell_operator,
    havin_mazya_potential,
    maximal_function,
    maximal_function_atomic_batch,
    wolff_atomic_exact,
    wolff_potential,
)

WMP_SLACK = 1e-6


@dataclass
class CheckReport:
    name: str
    asserted: bool
    passed: bool
    worst_margin: float
    empirical_constant: Optional[float] = None
    sample_count: int = 0
    seed: Optional[int] = None
    slack: float = 0.0
    violations: int = 0
    violating_point: Optional[list] = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "asserted": self.asserted,
            "passed": self.passed,
            "worst_margin": _num(self.worst_margin),
            "empirical_constant": _num(self.empirical_constant),
            "sample_count": self.sample_count,
            "seed": self.seed,
            "slack": self.slack,
            "violations": self.violations,
            "violating_point": self.violating_point,
            "details": _clean(self.details),
        }


def _num(v):
    if v is None:
        return None
    v = float(v)
    if np.isnan(v):
        return "nan"
    if np.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


def rel_margin(small, large) -> np.ndarray:
    """Relative margin of small <= large; +inf on the right counts as 1."""
    a = np.asarray(small, dtype=float)
    b = np.asarray(large, dtype=float)
    both_inf = np.isinf(a) & np.isinf(b)
    with np.errstate(invalid="ignore", divide="ignore"):
        den = np.maximum(np.abs(a), np.abs(b))
        m = np.where(den > 0, (b - a) / np.where(den > 0, den, 1.0), 0.0)
    m = np.where(np.isinf(b) & ~np.isinf(a), 1.0, m)
    m = np.where(np.isinf(a) & ~np.isinf(b), -1.0, m)
    return np.where(both_inf, 0.0, m)


def _finish(name, margins, points, slack, asserted=True, seed=None, constant=None, details=None) -> CheckReport:
    margins = np.asarray(margins, dtype=float).reshape(-1)
    pts = np.asarray(points, dtype=float)
    worst = float(margins.min()) if margins.size else 0.0
    bad = margins < -slack
    vp = None
    if asserted and bad.any():
        k = int(np.argmin(margins))
        vp = [float(v) for v in pts.reshape(-1, pts.shape[-1])[k % pts.reshape(-1, pts.shape[-1]).shape[0]]]
    return CheckReport(
        name=name,
        asserted=asserted,
        passed=bool(not asserted or not bad.any()),
        worst_margin=worst,
        empirical_constant=constant,
        sample_count=int(margins.size),
        seed=seed,
        slack=slack,
        violations=int(bad.sum()) if asserted else 0,
        violating_point=vp,
        details=details or {},
    )


def _potential(target, mu: Measure, X) -> np.ndarray:
    if isinstance(target, WolffParams):
        return np.asarray(wolff_potential(mu, target, X), dtype=float)
    return np.asarray(kernel_potential(target, mu, X), dtype=float)


def _node_potential(target, mu: CellDensityMeasure, weights=None) -> np.ndarray:
    d = mu.density.reshape(-1)
    if weights is not None:
        d = d * weights
    return np.clip(cell_operator(target, mu.grid).apply(d), 0.0, None)


# ---------------------------------------------------------------------------
# iterated inequalities
# ---------------------------------------------------------------------------

def check_iterated(target: Union[KernelSpec, WolffParams], mu: Measure, t: float, points, slack: Optional[float] = None,
                   seed: Optional[int] = None) -> CheckReport:
    """(Pσ)^t against the iterated potential P((Pσ)^e dσ).

    Kernels (e = t-1): (Gσ)^t <= t h^(t-1) G((Gσ)^(t-1) dσ) for t >= 1 and
    the reverse with t h^(t-1) for t <= 1, asserted when h is known.
    Wolff (e = (t-1)(p-1)): the constant is reported, c = max (t >= 1) or
    min (t <= 1) of the ratio of the two sides.

    On an atomic σ the potential is +inf on the atoms, so for t != 1 the
    right side is +inf (t > 1) or 0 (t < 1) and the check holds trivially;
    this is flagged in the details.  Cell densities give a genuine test.
    """
    t = float(t)
    if not t > 0:
        raise ValueError("t must be positive")
    X = np.atleast_2d(np.asarray(points, dtype=float))
    wolff = isinstance(target, WolffParams)
    e = (t - 1) * (target.p - 1) if wolff else t - 1
    name = f"iterated-{'wolff' if wolff else 'kernel'}"
    details = {"t": t, "measure": "atomic" if isinstance(mu, AtomicMeasure) else "cells"}
    if total_mass(mu) == 0:
        return _finish(name, np.zeros(len(X)), X, 0.0, not wolff, seed, None, details)
    P = _potential(target, mu, X)
    lhs = P**t
    if isinstance(mu, AtomicMeasure):
        if slack is None:
            slack = 1e-9
        details["degenerate"] = t != 1
        if t > 1:
            rhs_raw = np.full(len(X), np.inf)
        elif t < 1:
            rhs_raw = np.zeros(len(X))
        else:
            rhs_raw = _potential(target, mu, X)
    else:
        if slack is None:
            slack = 1e-3
        w = _node_potential(target, mu) ** e
        rhs_raw = _potential(target, scale_density(mu, SampledField(mu.grid.centers(), w), 1.0), X)
    if wolff:
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = lhs / rhs_raw
        fin = ratio[np.isfinite(ratio)]
        c = (float(fin.max()) if t >= 1 else float(fin.min())) if fin.size else None
        details["ratio_min"] = float(fin.min()) if fin.size else None
        details["ratio_max"] = float(fin.max()) if fin.size else None
        return _finish(name, np.zeros(len(X)), X, 0.0, False, seed, c, details)
    h = target.wmp_constant
    if h is None:
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = lhs / (t * rhs_raw)
        fin = ratio[np.isfinite(ratio)]
        details["note"] = "WMP constant unknown, ratio reported"
        return _finish(name, np.zeros(len(X)), X, 0.0, False, seed, float(fin.max()) if fin.size else None, details)
    rhs = t * h ** (t - 1) * rhs_raw
    m = rel_margin(lhs, rhs) if t >= 1 else rel_margin(rhs, lhs)
    return _finish(name, m, X, slack, True, seed, None, details)


# ---------------------------------------------------------------------------
# weak maximum principle
# ---------------------------------------------------------------------------

def _support_sup(target, mu: Measure, extra, rng, per_cell: int = 8):
    """Sup of the potential over supp(mu): samples plus local refinement."""
    if isinstance(mu, AtomicMeasure):
        return np.inf, None
    lo, hi = mu.grid.cell_bounds()
    keep = mu.density.reshape(-1) > 0
    lo, hi = lo[keep], hi[keep]
    samples = [0.5 * (lo + hi)]
    for _ in range(per_cell):
        samples.append(lo + rng.random(lo.shape) * (hi - lo))
    S = np.concatenate(samples)
    if extra is not None and len(extra):
        inside = np.zeros(len(extra), dtype=bool)
        for a, b in zip(lo, hi):
            inside |= np.all((extra >= a) & (extra <= b), axis=1)
        S = np.concatenate([S, extra[inside]])
    vals = _potential(target, mu, S)
    best = float(vals.max())
    arg = S[int(np.argmax(vals))]
    for k in np.argsort(-vals, kind="stable")[:3]:
        x0 = S[k]
        # restrict the search to the support cell holding the start point
        j = int(np.argmax(np.all((x0 >= lo) & (x0 <= hi), axis=1)))
        res = minimize(
            lambda x: -float(_potential(target, mu, x[None])[0]),
            x0,
            method="L-BFGS-B",
            bounds=list(zip(lo[j], hi[j])),
            options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 200},
        )
        if -res.fun > best:
            best, arg = float(-res.fun), res.x
    return best, arg


def check_wmp(target: Union[KernelSpec, WolffParams], mu: Measure, points, seed: int = 0) -> CheckReport:
    """sup over ``points`` of the potential, divided by its sup over supp(mu)."""
    X = np.atleast_2d(np.asarray(points, dtype=float))
    if total_mass(mu) == 0:
        raise ValueError("the measure must be nonzero")
    rng = np.random.default_rng(seed)
    sup_s, arg = _support_sup(target, mu, X, rng)
    vals = _potential(target, mu, X)
    fin = vals[np.isfinite(vals)]
    sup_g = float(fin.max()) if fin.size else 0.0
    measured = sup_g / sup_s if sup_s > 0 else np.inf
    h = None if isinstance(target, WolffParams) else target.wmp_constant
    details = {"sup_support": sup_s, "sup_grid": sup_g, "support_argmax": None if arg is None else list(arg)}
    if h is None:
        details["note"] = "constant not explicit, measured value reported"
        return _finish("wmp", [0.0], X[:1], 0.0, False, seed, measured, details)
    details["h"] = h
    margin = 1.0 - measured / h
    rep = _finish("wmp", [margin], X[:1], WMP_SLACK, True, seed, measured, details)
    rep.sample_count = len(X)
    if not rep.passed:
        rep.violating_point = [float(v) for v in X[int(np.argmax(np.where(np.isfinite(vals), vals, -np.inf)))]]
    return rep


# ---------------------------------------------------------------------------
# lower bounds and dominations
# ---------------------------------------------------------------------------

def check_lower_bound(u: SampledField, sigma: CellDensityMeasure, target: Union[KernelSpec, ProblemParams],
                      q: Optional[float] = None, slack: float = 1e-6, residual_tol: float = 1e-3) -> CheckReport:
    """Pointwise lower bound of a (super)solution by a power of the potential of σ.

    Kernel: u >= (1-q)^(1/(1-q)) h^(-q/(1-q)) (Gσ)^(1/(1-q)), asserted.
    Wolff: u >= c (Wσ)^((p-1)/(p-1-q)), c reported.
    """
    if not isinstance(sigma, CellDensityMeasure):
        raise ValueError("lower bounds are checked on cell-density measures")
    nodes = sigma.grid.centers()
    if isinstance(target, ProblemParams):
        q = float(target.q)
        p = float(target.p)
        P = WolffParams(float(target.alpha), p, target.n)
        t = (p - 1) / (p - 1 - q)
        name = "lower-bound-wolff"
    else:
        if q is None:
            raise ValueError("q is required for kernels")
        q = float(q)
        P = target
        t = 1 / (1 - q)
        name = "lower-bound-kernel"
    if total_mass(sigma) == 0:
        return _finish(name, np.zeros(len(nodes)), nodes, slack, True, None, None, {"note": "zero measure"})
    uv = u.values
    base = _node_potential(P, sigma) ** t
    Tu = _node_potential(P, sigma, uv**q)
    super_gap = float(np.max((Tu - uv) / np.maximum(uv, 1e-300)))
    details = {"supersolution_gap": super_gap, "q": q}
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(base > 0, uv / base, np.inf)
    c_emp = float(ratio.min())
    if super_gap > residual_tol:
        details["note"] = "invalid: u is not a supersolution within the residual tolerance"
        rep = _finish(name, [-1.0], nodes[:1], slack, True, None, c_emp, details)
        return rep
    if isinstance(P, WolffParams) or P.wmp_constant is None:
        return _finish(name, np.zeros(len(nodes)), nodes, 0.0, False, None, c_emp, details)
    h = P.wmp_constant
    c = (1 - q) ** (1 / (1 - q)) * h ** (-q / (1 - q))
    details["constant"] = c
    return _finish(name, rel_margin(c * base, uv), nodes, slack, True, None, c_emp, details)


def check_maximal_domination(sigma: Measure, f, wp: WolffParams, points, slack: Optional[float] = None,
                             seed: Optional[int] = None) -> CheckReport:
    """W(f dσ) <= (M_σ f)^(1/(p-1)) Wσ with constant 1.

    ``f`` is a SampledField or an array (T, N) of T functions on the
    reference points.  Atomic σ is exact on both sides; on cell densities the
    maximal function is a lower bound, so the slack covers quadrature error.
    """
    X = np.atleast_2d(np.asarray(points, dtype=float))
    F = np.atleast_2d(f.values if isinstance(f, SampledField) else np.asarray(f, dtype=float))
    if np.any(F < 0):
        raise ValueError("f must be nonnegative")
    if isinstance(sigma, AtomicMeasure):
        slack = 1e-9 if slack is None else slack
        lhs = wolff_atomic_exact(sigma, wp, X, masses=F * sigma.masses[None])
        M = maximal_function_atomic_batch(sigma, F, X)
        W = wolff_atomic_exact(sigma, wp, X)
        rhs = M ** (1 / (wp.p - 1)) * W[None]
    else:
        slack = 1e-3 if slack is None else slack
        W = np.asarray(wolff_potential(sigma, wp, X), dtype=float)
        nodes = sigma.grid.centers()
        lhs, rhs = [], []
        for fv in F:
            fs = SampledField(nodes, fv)
            lhs.append(wolff_potential(scale_density(sigma, fs, 1.0), wp, X))
            rhs.append(np.asarray(maximal_function(sigma, fs, X)) ** (1 / (wp.p - 1)) * W)
        lhs, rhs = np.array(lhs), np.array(rhs)
    m = rel_margin(lhs, rhs)
    pts = np.broadcast_to(X[None], (F.shape[0],) + X.shape).reshape(-1, X.shape[1])
    return _finish("maximal-domination", m, pts, slack, True, seed, None, {"functions": F.shape[0]})


def check_domination(pair: str, mu: Measure, points, target=None, grid: Optional[Grid] = None,
                     seed: Optional[int] = None) -> CheckReport:
    """``green_vs_riesz`` (target: Green KernelSpec) asserts G <= |x-y|^(2-n)
    on kernel values and potentials; ``wolff_vs_hm`` (target: WolffParams)
    reports the ratio of the Wolff to the Havin-Maz'ya potential."""
    X = np.atleast_2d(np.asarray(points, dtype=float))
    if pair == "green_vs_riesz":
        K = target
        if not isinstance(K, KernelSpec) or K.kind not in (GREEN_BALL, GREEN_HALF):
            raise ValueError("green_vs_riesz needs a Green kernel")
        R = Riesz(2.0, K.n)
        Y = mu.points if isinstance(mu, AtomicMeasure) else mu.grid.centers()[mu.density.reshape(-1) > 0]
        gk = kernel_eval(K, X[:, None, :], Y[None])
        rk = kernel_eval(R, X[:, None, :], Y[None])
        gp = kernel_potential(K, mu, X)
        rp = kernel_potential(R, mu, X)
        m = np.concatenate([rel_margin(gk, rk).reshape(-1), rel_margin(gp, rp)])
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(rk > 0, gk / rk, 0.0)
        fin = ratio[np.isfinite(ratio)]
        pts = np.concatenate([np.repeat(X, len(Y), axis=0), X])
        return _finish("domination-green-riesz", m, pts, 1e-12, True, seed, float(fin.max()) if fin.size else None,
                       {"kernel": K.describe()})
    if pair == "wolff_vs_hm":
        wp = target
        if grid is None:
            grid = _default_grid(mu)
        W = np.asarray(wolff_potential(mu, wp, X), dtype=float)
        V = np.asarray(havin_mazya_potential(mu, wp, X, grid), dtype=float)
        ok = np.isfinite(W) & np.isfinite(V) & (V > 0)
        ratio = W[ok] / V[ok]
        details = {"ratio_min": float(ratio.min()) if ratio.size else None,
                   "ratio_max": float(ratio.max()) if ratio.size else None,
                   "finite_points": int(ok.sum())}
        return _finish("domination-wolff-hm", np.zeros(len(X)), X, 0.0, False, seed,
                       float(ratio.max()) if ratio.size else None, details)
    raise ValueError(f"unknown pair {pair!r}")


def _default_grid(mu: Measure) -> Grid:
    if isinstance(mu, CellDensityMeasure):
        return mu.grid.padded(max(mu.grid.extents))
    lo, hi = mu.points.min(0), mu.points.max(0)
    span = float(max(np.max(hi - lo), 1e-3))
    h = span / 16
    lo = lo - 8 * h - 0.5 * h
    return Grid(lo, h, tuple([33] * mu.n))


# ---------------------------------------------------------------------------
# weighted norm inequalities and condition chains
# ---------------------------------------------------------------------------

def random_test_functions(sigma: Measure, exponent: float, trials: int, seed: int) -> np.ndarray:
    """Per-node uniform(0,1] values normalised in L^exponent(dσ)."""
    rng = np.random.default_rng(seed)
    m = reference_masses(sigma)
    F = 1.0 - rng.random((trials, m.size))
    norms = (F**exponent @ m) ** (1 / exponent)
    return F / norms[:, None]


def check_weighted_norm(sigma: CellDensityMeasure, pp: ProblemParams, trials: int = 50, seed: int = 0,
                        functions=None, pad: Optional[int] = None) -> CheckReport:
    """Measured constants of the σ-σ and dx-σ weighted norm inequalities.

    Ratio 1: ‖W(f dσ)‖_{L^(γ+q)(dσ)} / ‖f‖_{L^s(dσ)}^(1/(p-1)).
    Ratio 2: ‖W(f dσ)‖_{L^r(dx)} / ‖f‖_{L^s(dσ)}^(1/(p-1)), and the same
    divided by ‖Wσ‖_{L^(r(p-1)/(p-1-q))(dx)}^(1/s'), s = (γ+q)/q.
    """
    cond = condition_integral(sigma, pp, "dsigma-wolff")
    if not cond.finite:
        return CheckReport("weighted-norm", False, True, 0.0, None, 0, seed,
                           details={"skipped": "dsigma-wolff condition is infinite"})
    es = derive_exponents(pp)
    wp = WolffParams(float(pp.alpha), float(pp.p), pp.n)
    p, q, r = float(pp.p), float(pp.q), float(pp.r)
    s = float(es.s_embed)
    e1 = float(es.gamma + pp.q)
    g = sigma.grid
    box = g.padded(pad if pad is not None else max(g.extents))
    op_nodes = cell_operator(wp, g)
    op_box = cell_operator(wp, g, box)
    dens = sigma.density.reshape(-1)
    m = reference_masses(sigma)
    nodes = g.centers()
    W_dx = extended_dx_norm(sigma, op_box.apply(dens), box, wp.kappa, float(es.dx_norm_exponent)).value
    s_conj = s / (s - 1)
    F = random_test_functions(sigma, s, trials, seed) if functions is None else np.atleast_2d(functions)
    r1, r2 = [], []
    for f in F:
        fn = float((f**s @ m) ** (1 / s)) ** (1 / (p - 1))
        a = lp_norm_dsigma(SampledField(nodes, np.clip(op_nodes.apply(dens * f), 0, None)), e1, sigma).value
        b = extended_dx_norm(sigma, op_box.apply(dens * f), box, wp.kappa, r).value
        r1.append(a / fn)
        r2.append(b / fn)
    r1, r2 = np.array(r1), np.array(r2)
    c2 = r2 / W_dx ** (1 / s_conj)
    finite = bool(np.all(np.isfinite(r1)) and np.all(np.isfinite(r2)) and np.isfinite(W_dx))
    details = {
        "s": s,
        "sigma_sigma_max": float(r1.max()),
        "dx_sigma_max": float(r2.max()),
        "dx_structured_max": float(c2.max()),
        "wolff_sigma_dx_norm": W_dx,
        "condition_dsigma_wolff": cond.value,
    }
    return CheckReport("weighted-norm", True, finite, 0.0 if finite else -1.0, float(r1.max()), len(F), seed,
                       details=details)


def check_condition_chain(mu: CellDensityMeasure, pp: ProblemParams, levels: int = 3, drift_tol: float = 0.02,
                          kernel: Optional[KernelSpec] = None) -> CheckReport:
    """A finite dσ condition must come with a finite dx condition.

    Wolff by default, or the Green kernel chain when ``kernel`` is given.
    Both integrals are refined ``levels`` times; the drift between the two
    finest levels must stay below ``drift_tol``.
    """
    kind = "wolff" if kernel is None else "green"
    ds = condition_integral(mu, pp, f"dsigma-{kind}", kernel, levels)
    dx = condition_integral(mu, pp, f"dx-{kind}", kernel, levels)
    ok_chain = (not ds.finite) or dx.finite
    drifts = [d for d in (ds.drift, dx.drift) if d is not None]
    ok_drift = all(d < drift_tol for d in drifts)
    margin = min([1.0 if ok_chain else -1.0] + [1.0 - d / drift_tol for d in drifts])
    return CheckReport(f"condition-chain-{kind}", True, bool(ok_chain and ok_drift), margin, None, levels,
                       details={"dsigma": ds.to_dict(), "dx": dx.to_dict(), "drift_tol": drift_tol})


# ---------------------------------------------------------------------------
# standard scenarios (used by the command line)
# ---------------------------------------------------------------------------

def box_scenario() -> tuple:
    """Uniform density on the unit cube, 8 cells per side, with (n,p,q,α,r) = (3,3/2,1/4,1,6)."""
    from .measures import uniform_box

    return uniform_box([0, 0, 0], [1, 1, 1], 8), ProblemParams(3, "3/2", "1/4", 1, 6)


def random_atoms(rng, count: int, n: int = 3, lo=-1.0, hi=1.0) -> AtomicMeasure:
    return AtomicMeasure(rng.uniform(lo, hi, (count, n)), rng.uniform(0.1, 1.0, count))


def random_cells(rng, K: KernelSpec, cells: int = 4) -> CellDensityMeasure:
    """Random density on a cells^n grid inside the kernel's domain."""
    n = K.n
    if K.kind == GREEN_BALL:
        side = 2 * K.radius / np.sqrt(n) * 0.95
        origin = K.center - side / 2
    elif K.kind == GREEN_HALF:
        side = 1.0
        origin = np.r_[np.full(n - 1, -0.5), 0.25]
    else:
        side = 1.0
        origin = np.full(n, -0.5)
    dens = rng.uniform(0.0, 1.0, (cells,) * n) * (rng.random((cells,) * n) < 0.6)
    if not dens.any():
        dens.flat[0] = 1.0
    return CellDensityMeasure(origin, side / cells, (cells,) * n, dens)


def grid_points(K: KernelSpec, count: int, rng) -> np.ndarray:
    """Roughly ``count`` points in K's domain: a cube grid clipped to the domain."""
    n = K.n
    if K.kind == GREEN_BALL:
        pts = K.center + K.radius * rng.uniform(-1, 1, (8 * count, n))
        pts = pts[np.linalg.norm(pts - K.center, axis=1) < 0.999 * K.radius][:count]
        return pts
    k = int(round(count ** (1 / n)))
    axes = [np.linspace(-1.5, 1.5, k)] * n
    if K.kind == GREEN_HALF:
        axes[-1] = np.linspace(0.05, 3.0, k)
    return np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, n)


CheckFn = Callable[[int, int, int], list]


def _std_iterated(seed, points, trials):
    rng = np.random.default_rng(seed)
    K = Riesz(2.0, 3)
    mu = random_atoms(rng, 20)
    X = rng.uniform(-1.5, 1.5, (points, 3))
    out = [check_iterated(K, mu, t, X, seed=seed) for t in (0.5, 1.0, 1.5, 2.0, 3.0)]
    cells = random_cells(rng, K)
    Xc = X[: max(1, points // 10)]
    out += [check_iterated(K, cells, t, Xc, seed=seed) for t in (0.5, 2.0)]
    return out


def _std_iterated_wolff(seed, points, trials):
    rng = np.random.default_rng(seed)
    mu, pp = box_scenario()
    wp = WolffParams(float(pp.alpha), float(pp.p), pp.n)
    coarse = CellDensityMeasure(mu.origin, 0.25, (4, 4, 4), np.ones((4, 4, 4)))
    X = rng.uniform(-0.5, 1.5, (max(1, points // 50), 3))
    return [check_iterated(wp, coarse, t, X, seed=seed) for t in (0.5, 2.0)]


def _std_wmp(seed, points, trials):
    rng = np.random.default_rng(seed)
    out = []
    for K in (GreenBall(3), Riesz(2.0, 3)):
        X = grid_points(K, points, rng)
        worst = None
        for i in range(min(trials, 20)):
            rep = check_wmp(K, random_cells(rng, K), X, seed=seed + i)
            if worst is None or rep.worst_margin < worst.worst_margin:
                worst = rep
        worst.name = f"wmp-{K.kind}"
        worst.details["measures"] = min(trials, 20)
        out.append(worst)
    return out


def _std_maximal(seed, points, trials):
    rng = np.random.default_rng(seed)
    sigma = random_atoms(rng, 20)
    F = rng.random((trials, len(sigma)))
    X = rng.uniform(-1.5, 1.5, (points, 3))
    return [check_maximal_domination(sigma, F, WolffParams(1.0, 1.5, 3), X, seed=seed)]


def _std_lower_bound(seed, points, trials):
    from .measures import uniform_box
    from .solver import manufacture_solution, solve_kernel

    K = GreenHalfSpace(3)
    rho = uniform_box([-0.5, -0.5, 0.25], [0.5, 0.5, 1.25], 8)
    sigma, _ = manufacture_solution(K, rho, 0.5, rule="average")
    _, u = solve_kernel(K, sigma, 0.5)
    return [check_lower_bound(u, sigma, K, 0.5)]


def _std_domination(seed, points, trials):
    rng = np.random.default_rng(seed)
    out = []
    for K in (GreenHalfSpace(3), GreenBall(3)):
        X = grid_points(K, points, rng)
        mu = random_cells(rng, K)
        out.append(check_domination("green_vs_riesz", mu, X, K, seed=seed))
    mu, pp = box_scenario()
    coarse = CellDensityMeasure(mu.origin, 0.25, (4, 4, 4), np.ones((4, 4, 4)))
    X = rng.uniform(-1.0, 2.0, (max(1, points // 20), 3))
    out.append(check_domination("wolff_vs_hm", coarse, X, WolffParams(1.0, 1.5, 3), seed=seed))
    return out


def _std_weighted_norm(seed, points, trials):
    mu, pp = box_scenario()
    return [check_weighted_norm(mu, pp, trials, seed)]


def _std_chain(seed, points, trials):
    mu, pp = box_scenario()
    coarse = CellDensityMeasure(mu.origin, 0.25, (4, 4, 4), np.ones((4, 4, 4)))
    half = CellDensityMeasure([-0.5, -0.5, 0.25], 0.25, (4, 4, 4), np.ones((4, 4, 4)))
    return [
        check_condition_chain(coarse, pp, levels=3),
        check_condition_chain(half, ProblemParams(3, 2, "1/2", 1, 6), levels=3, kernel=GreenHalfSpace(3)),
    ]


STANDARD_CHECKS: dict = {
    "iterated": _std_iterated,
    "iterated-wolff": _std_iterated_wolff,
    "wmp": _std_wmp,
    "maximal": _std_maximal,
    "lower-bound": _std_lower_bound,
    "domination": _std_domination,
    "weighted-norm": _std_weighted_norm,
    "chain": _std_chain,
}


def run_checks(names, seed: int = 0, points: int = 1000, trials: int = 50) -> list:
    """Run named standard checks (or "all") and return their reports in a fixed order."""
    if names in ("all", None) or names == ["all"]:
        names = list(STANDARD_CHECKS)
    elif isinstance(names, str):
        names = [names]
    unknown = [n for n in names if n not in STANDARD_CHECKS]
    if unknown:
        raise KeyError(f"unknown check(s): {', '.join(unknown)}")
    out = []
    for n in names:
        out.extend(STANDARD_CHECKS[n](seed, points, trials))
    return out
