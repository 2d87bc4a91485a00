"""Monotone iteration for u = W_{α,p}(u^q dσ) and u = G(u^q dσ).

The unknown lives at the cell centres of a cell-density σ and u^q dσ is the
cell density σ_j u_j^q (piecewise-constant collocation).  Starting from
u_0 = c_0 P^t, with P the potential of σ and t = (p-1)/(p-1-q), the map
u ↦ T(u) is applied until it stops moving; c_0 is halved until u_1 >= u_0
so that the iterates increase.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .exponents import ProblemParams, TrivialRegimeError, derive_exponents, validate_params
from .fields import SampledField
from .geometry import gauss_legendre
from .kernels import KernelSpec, kernel_potential
from .measures import AtomicMeasure, CellDensityMeasure, Measure, scale_density, total_mass
from .norms import extended_dx_norm, lp_norm_dsigma
from .potentials import QuadratureSpec, WolffParams, cell_operator, wolff_potential

MONOTONE_SLACK = 1e-12
MAX_HALVINGS = 60
DIVERGENCE_FACTOR = 1e6


class SolverInputError(ValueError):
    pass


@dataclass
class SolveReport:
    converged: bool
    iterations: int
    final_residual: float
    lgq_sigma_norm: float
    lr_dx_norm: Optional[float] = None
    divergence_flag: bool = False
    monotone_ok: bool = True
    worst_monotone_margin: float = 0.0
    c0: float = 1.0
    halvings: int = 0
    norm_history: list = field(default_factory=list)
    residual_history: list = field(default_factory=list)
    message: str = ""

    def to_dict(self) -> dict:
        def f(v):
            if v is None:
                return None
            v = float(v)
            return v if np.isfinite(v) else "inf"

        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "final_residual": f(self.final_residual),
            "lgq_sigma_norm": f(self.lgq_sigma_norm),
            "lr_dx_norm": f(self.lr_dx_norm),
            "divergence_flag": self.divergence_flag,
            "monotone_ok": self.monotone_ok,
            "worst_monotone_margin": f(self.worst_monotone_margin),
            "c0": f(self.c0),
            "halvings": self.halvings,
            "norm_history": [f(v) for v in self.norm_history],
            "residual_history": [f(v) for v in self.residual_history],
            "message": self.message,
        }


def _sup_rel(a, b):
    den = np.maximum(np.abs(b), 1e-300)
    return float(np.max(np.abs(a - b) / den))


def monotone_iteration(apply, sigma: CellDensityMeasure, base, t: float, q: float, norm_exp: float,
                       c0: float = 1.0, tol: float = 1e-4, max_iter: int = 500, trace=None):
    """Run the iteration with T(u) = apply(σ_j u_j^q); returns (report, u).

    ``base`` is the potential of σ at the nodes and ``t`` the exponent of
    the seed u_0 = c_0 base^t.
    """
    dens = sigma.density.reshape(-1)
    nodes = sigma.grid.centers()

    def T(u):
        return np.clip(apply(dens * u**q), 0.0, None)

    def norm(u):
        return lp_norm_dsigma(SampledField(nodes, u), norm_exp, sigma).value

    seed = base**t
    halvings = 0
    while True:
        u0 = c0 * seed
        u1 = T(u0)
        if np.all(u1 >= u0 * (1 - MONOTONE_SLACK)):
            break
        if halvings >= MAX_HALVINGS:
            raise SolverInputError("could not find a seed constant with u_1 >= u_0")
        c0 *= 0.5
        halvings += 1

    rep = SolveReport(False, 0, np.inf, np.nan, c0=c0, halvings=halvings)
    u_prev, u = u0, u1
    first = norm(u0)
    rep.norm_history = [first, norm(u1)]
    worst = float(np.min((u1 - u0) / np.maximum(u0, 1e-300)))
    changes = [_sup_rel(u1, u0)]
    rep.residual_history = [changes[0]]
    if trace is not None:
        trace.append(u0.copy())
        trace.append(u1.copy())
    j = 1
    while j < max_iter:
        u_next = T(u)
        j += 1
        worst = min(worst, float(np.min((u_next - u) / np.maximum(u, 1e-300))))
        ch = _sup_rel(u_next, u)
        changes.append(ch)
        rep.residual_history.append(ch)
        rep.norm_history.append(norm(u_next))
        if trace is not None:
            trace.append(u_next.copy())
        if rep.norm_history[-1] > DIVERGENCE_FACTOR * max(first, 1e-300):
            rep.divergence_flag = True
            u_prev, u = u, u_next
            rep.message = "norm grew past the divergence cap"
            break
        # u is the last iterate whose fixed-point residual (= ch) is known;
        # the step into u had size changes[-2]
        if ch < tol and changes[-2] < tol:
            rep.converged = True
            break
        u_prev, u = u, u_next
    rep.iterations = j
    rep.final_residual = changes[-1]
    rep.worst_monotone_margin = worst
    rep.monotone_ok = worst >= -MONOTONE_SLACK
    rep.converged = rep.converged and rep.monotone_ok
    rep.lgq_sigma_norm = norm(u)
    if not rep.message:
        rep.message = "converged" if rep.converged else "iteration limit reached"
    return rep, u


def _check_sigma(sigma: Measure):
    if isinstance(sigma, AtomicMeasure):
        raise SolverInputError(
            "atomic measures are rejected by the solver: the potential is infinite on the atoms"
        )
    if not isinstance(sigma, CellDensityMeasure):
        raise SolverInputError("sigma must be a cell-density measure")


def _zero_solution(sigma: CellDensityMeasure):
    nodes = sigma.grid.centers()
    rep = SolveReport(True, 1, 0.0, 0.0, c0=1.0, norm_history=[0.0], residual_history=[0.0], message="zero measure")
    return rep, SampledField(nodes, np.zeros(nodes.shape[0]))


def solve_wolff(sigma: Measure, pp: ProblemParams, c0: float = 1.0, tol: float = 1e-4, max_iter: int = 500,
                dx_norm: bool = False, nodes_per_decade: int = 48, trace=None):
    """Solve u = W_{α,p}(u^q dσ) on σ's cell centres; returns (SolveReport, SampledField)."""
    verdict = validate_params(pp)
    if not verdict.ok:
        raise TrivialRegimeError(verdict)
    _check_sigma(sigma)
    if total_mass(sigma) == 0:
        return _zero_solution(sigma)
    es = derive_exponents(pp)
    wp = WolffParams(float(pp.alpha), float(pp.p), pp.n)
    if sigma.n != wp.n:
        raise SolverInputError("measure dimension differs from n")
    op = cell_operator(wp, sigma.grid, nodes_per_decade=nodes_per_decade)
    base = op.apply(sigma.density)
    if not np.all(np.isfinite(base)):
        raise SolverInputError("potential of sigma is infinite at a node")
    p, q = float(pp.p), float(pp.q)
    t = (p - 1) / (p - 1 - q)
    rep, u = monotone_iteration(op.apply, sigma, base, t, q, float(es.gamma + pp.q), c0, tol, max_iter, trace)
    out = SampledField(sigma.grid.centers(), u)
    if dx_norm:
        rep.lr_dx_norm = solution_dx_norm(out, sigma, wp, float(pp.q), float(pp.r), nodes_per_decade)
    return rep, out


def solve_kernel(K: KernelSpec, sigma: Measure, q: float, c0: float = 1.0, tol: float = 1e-4, max_iter: int = 500,
                 gamma: float = 1.0, trace=None):
    """Solve u = G(u^q dσ) with 0 < q < 1; returns (SolveReport, SampledField).

    ``gamma`` selects the reported norm L^{γ+q}(dσ).
    """
    q = float(q)
    if not 0 < q < 1:
        raise SolverInputError("kernel equations need 0 < q < 1")
    _check_sigma(sigma)
    if total_mass(sigma) == 0:
        return _zero_solution(sigma)
    op = cell_operator(K, sigma.grid)
    base = op.apply(sigma.density)
    massive = sigma.density.reshape(-1) > 0
    if not np.all(np.isfinite(base)) or np.any(base[massive] <= 0):
        raise SolverInputError("kernel potential of sigma must be finite and positive on the support")
    rep, u = monotone_iteration(op.apply, sigma, base, 1 / (1 - q), q, gamma + q, c0, tol, max_iter, trace)
    return rep, SampledField(sigma.grid.centers(), u)


def solution_dx_norm(u: SampledField, sigma: CellDensityMeasure, target, q: float, r: float,
                     nodes_per_decade: int = 48, pad: Optional[int] = None) -> float:
    """L^r(dx) norm of the extension T(u) of a node solution, with a fitted tail."""
    g = sigma.grid
    box = g.padded(pad if pad is not None else max(g.extents))
    op = cell_operator(target, g, box, nodes_per_decade=nodes_per_decade)
    vals = op.apply(sigma.density.reshape(-1) * u.values**q)
    delta = target.kappa if isinstance(target, WolffParams) else target.lam
    return extended_dx_norm(sigma, vals, box, delta, r).value


def extend_solution(u_nodes: SampledField, sigma: Measure, target: Union[ProblemParams, WolffParams, KernelSpec], x,
                    q: Optional[float] = None, quad: Optional[QuadratureSpec] = None):
    """One more application of the fixed-point map, evaluated anywhere."""
    if isinstance(target, ProblemParams):
        q = float(target.q)
        target = WolffParams(float(target.alpha), float(target.p), target.n)
    if q is None:
        raise ValueError("q is required unless ProblemParams are given")
    mu = scale_density(sigma, u_nodes, q)
    if isinstance(target, WolffParams):
        return wolff_potential(mu, target, x, quad)
    return kernel_potential(target, mu, x)


def manufacture_solution(target: Union[KernelSpec, WolffParams], rho: CellDensityMeasure, q: float,
                         rule: str = "center", order: int = 2):
    """Exact pair (σ, u*) with u* = P ρ and u* = P(u*^q dσ).

    ``rule="center"`` sets σ_j = ρ_j u*(x_j)^(-q), which makes u* an exact
    fixed point of the discrete map.  ``rule="average"`` uses the cell
    average of ρ u*^(-q) (tensor Gauss-Legendre of the given order), so the
    discrete solution differs from u* by a genuine discretization error.
    """
    if not isinstance(rho, CellDensityMeasure):
        raise SolverInputError("rho must be a cell-density measure")
    q = float(q)
    g = rho.grid
    d = rho.density.reshape(-1)
    centre = cell_operator(target, g).apply(d)
    massive = d > 0
    if np.any(centre[massive] <= 0) or not np.all(np.isfinite(centre)):
        raise RuntimeError("manufactured potential vanishes on a charged cell")
    if rule == "center":
        factor = np.where(massive, np.where(massive, centre, 1.0) ** (-q), 0.0)
    elif rule == "average":
        t, w = gauss_legendre(order)
        factor = np.zeros_like(d)
        for idx in np.ndindex(*([order] * g.n)):
            shift = np.array([t[i] - 0.5 for i in idx])
            wt = float(np.prod([w[i] for i in idx]))
            vals = cell_operator(target, g, shift=shift).apply(d)
            factor += wt * np.where(massive, np.where(massive, vals, 1.0), 1.0) ** (-q)
        factor = np.where(massive, factor, 0.0)
    else:
        raise ValueError(f"unknown rule {rule!r}")
    sigma = CellDensityMeasure(g.origin, g.h, g.extents, (d * factor).reshape(g.extents))
    return sigma, SampledField(g.centers(), centre)
