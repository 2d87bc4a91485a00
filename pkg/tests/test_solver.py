import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlpot.exponents import ProblemParams, TrivialRegimeError
from nlpot.fields import SampledField
from nlpot.kernels import GreenHalfSpace, Riesz
from nlpot.measures import AtomicMeasure, CellDensityMeasure, uniform_box
from nlpot.potentials import WolffParams
from nlpot.solver import (
    SolverInputError,
    extend_solution,
    manufacture_solution,
    solve_kernel,
    solve_wolff,
)

PP = ProblemParams(3, "3/2", "1/4", 1, 6)
WP = WolffParams(1, 1.5, 3)
SIGMA = uniform_box([0, 0, 0], [1, 1, 1], 4)


def test_zero_measure_gives_zero_solution():
    rep, u = solve_wolff(uniform_box([0, 0, 0], [1, 1, 1], 2, value=0.0), PP)
    assert rep.converged and rep.iterations == 1
    assert np.all(u.values == 0)


def test_rejections():
    with pytest.raises(SolverInputError):
        solve_wolff(AtomicMeasure([[0.0, 0.0, 0.0]], [1.0]), PP)
    with pytest.raises(TrivialRegimeError):
        solve_wolff(SIGMA, PP.replace(r=1))
    with pytest.raises(TrivialRegimeError):
        solve_wolff(SIGMA, ProblemParams(3, 3, 1, 1, 10))
    with pytest.raises(SolverInputError):
        solve_kernel(Riesz(2.0, 3), SIGMA, 1.0)


def test_wolff_solution_is_monotone_fixed_point():
    rep, u = solve_wolff(SIGMA, PP, tol=1e-8)
    assert rep.converged and rep.monotone_ok and not rep.divergence_flag
    assert rep.final_residual < 1e-8
    # the norm history increases along the monotone iteration
    assert np.all(np.diff(rep.norm_history) >= -1e-12 * rep.norm_history[-1])
    # one more application of the map at the nodes reproduces u
    again = extend_solution(u, SIGMA, PP, u.nodes)
    assert np.allclose(again, u.values, rtol=1e-4)


@pytest.mark.parametrize("target", [WP, GreenHalfSpace(3)], ids=["wolff", "green-half-space"])
def test_center_rule_is_exact_discrete_fixed_point(target):
    origin = [0, 0, 0] if target is WP else [-0.5, -0.5, 0.25]
    rho = CellDensityMeasure(origin, 0.25, (4, 4, 4), 1.0)
    q = 0.25
    sigma, ustar = manufacture_solution(target, rho, q, rule="center")
    if target is WP:
        rep, u = solve_wolff(sigma, PP, tol=1e-10)
    else:
        rep, u = solve_kernel(target, sigma, q, tol=1e-10)
    assert rep.converged
    assert np.max(np.abs(u.values / ustar.values - 1)) < 1e-8


def test_center_rule_tiny_q_keeps_sigma():
    rho = CellDensityMeasure([0, 0, 0], 0.25, (4, 4, 4), 1.0)
    sigma, ustar = manufacture_solution(Riesz(2.0, 3), rho, 1e-6)
    assert np.allclose(sigma.density, rho.density, rtol=1e-5)
    rep, u = solve_kernel(Riesz(2.0, 3), sigma, 1e-6, tol=1e-10)
    assert np.allclose(u.values, ustar.values, rtol=1e-8)


def test_manufacture_scaling():
    # u* = P(λρ) = λ^(1/(p-1)) Pρ and σ = λρ u*^(-q)
    rho = CellDensityMeasure([0, 0, 0], 0.25, (4, 4, 4), 1.0)
    lam, q = 3.0, 0.25
    s1, u1 = manufacture_solution(WP, rho, q)
    s2, u2 = manufacture_solution(WP, CellDensityMeasure([0, 0, 0], 0.25, (4, 4, 4), lam), q)
    k = lam ** (1 / (WP.p - 1))
    assert np.allclose(u2.values, k * u1.values, rtol=1e-12)
    assert np.allclose(s2.density, lam * k ** (-q) * s1.density, rtol=1e-12)


@settings(max_examples=6)
@given(st.floats(0.1, 10.0))
def test_solution_scaling(lam):
    # u solves u = W(u^q λσ) iff u = λ^(1/(p-1-q)) v with v the solution for σ
    base_rep, v = solve_wolff(SIGMA, PP, tol=1e-9)
    rep, u = solve_wolff(CellDensityMeasure(SIGMA.origin, SIGMA.cell_size, SIGMA.extents, lam), PP, tol=1e-9)
    k = lam ** (1 / (1.5 - 1 - 0.25))
    assert np.allclose(u.values, k * v.values, rtol=1e-6)


def test_extension_decays_like_a_point_mass():
    rep, u = solve_wolff(SIGMA, PP, tol=1e-8)
    c = np.array([0.5, 0.5, 0.5])
    d = np.array([20.0, 40.0, 80.0])
    vals = extend_solution(u, SIGMA, PP, c + d[:, None] * np.array([1.0, 0, 0]))
    slope = np.diff(np.log(vals)) / np.diff(np.log(d))
    assert np.allclose(slope, -WP.kappa, atol=0.02)


def test_kernel_solution_below_riesz_solution():
    # G <= I_2 pointwise, so the Green solution is below the Riesz one
    sigma = CellDensityMeasure([-0.5, -0.5, 0.25], 0.25, (4, 4, 4), 1.0)
    _, ug = solve_kernel(GreenHalfSpace(3), sigma, 0.5, tol=1e-9)
    _, ur = solve_kernel(Riesz(2.0, 3), sigma, 0.5, tol=1e-9)
    assert np.all(ug.values <= ur.values * (1 + 1e-9))


def test_non_convergence_reported():
    rep, _ = solve_wolff(SIGMA, PP, tol=1e-14, max_iter=3)
    assert not rep.converged and rep.iterations == 3
    assert "iteration" in rep.message or rep.message
