"""Nonlinear potentials of measures and the sublinear equations u = W(u^q dσ), u = G(u^q dσ)."""

__version__ = "0.1.0"

from .exponents import ExponentSet, ProblemParams, TrivialRegimeError, Verdict, derive_exponents, validate_params
from .fields import SampledField, TailModel
from .kernels import DomainError, GreenBall, GreenHalfSpace, KernelSpec, Riesz, kernel_eval, kernel_potential
from .measures import AtomicMeasure, CellDensityMeasure, DimensionError, Grid, ball_mass, uniform_box
from .norms import condition_integral, lp_norm_dsigma, lp_norm_dx
from .potentials import (
    QuadratureSpec,
    WolffParams,
    havin_mazya_potential,
    maximal_function,
    wolff_atomic_exact,
    wolff_potential,
)
from .solver import SolveReport, extend_solution, manufacture_solution, solve_kernel, solve_wolff
from .verify import CheckReport, run_checks

__all__ = [
    "AtomicMeasure", "CellDensityMeasure", "CheckReport", "DimensionError", "DomainError", "ExponentSet",
    "GreenBall", "GreenHalfSpace", "Grid", "KernelSpec", "ProblemParams", "QuadratureSpec", "Riesz",
    "SampledField", "SolveReport", "TailModel", "TrivialRegimeError", "Verdict", "WolffParams",
    "ball_mass", "condition_integral", "derive_exponents", "extend_solution", "havin_mazya_potential",
    "kernel_eval", "kernel_potential", "lp_norm_dsigma", "lp_norm_dx", "manufacture_solution",
    "maximal_function", "run_checks", "solve_kernel", "solve_wolff", "uniform_box", "validate_params",
    "wolff_atomic_exact", "wolff_potential",
]
