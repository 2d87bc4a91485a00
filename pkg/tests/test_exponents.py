from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from nlpot.exponents import (
    ProblemParams,
    TrivialRegimeError,
    critical_r,
    derive_exponents,
    energy_r,
    exponent_table,
    to_fraction,
    validate_params,
)


@st.composite
def solvable(draw, p2=False, alpha1=False):
    """Parameters strictly inside the solvable regime, as exact fractions."""
    n = draw(st.integers(3, 6) if p2 and alpha1 else st.integers(2, 6))
    t = lambda: Fraction(draw(st.integers(1, 19)), 20)  # in (0, 1)
    if alpha1:
        a = Fraction(1)
        p = Fraction(2) if p2 else 1 + t() * (n - 1)
    else:
        p = Fraction(2) if p2 else 1 + t() * (n - 1) * 2
        a = t() * n / p
    q = t() * (p - 1)
    r = n * (p - 1) / (n - a * p) + Fraction(draw(st.integers(1, 200)), 10)
    return ProblemParams(n, p, q, a, r)


def test_reference_example():
    es = derive_exponents(ProblemParams(3, 2, 0.5, 1, 6))
    assert es.gamma == 1 and es.s_embed == 3
    assert es.s1 == es.s2 == es.s3 == Fraction(4, 3)
    assert es.r_critical == 3 and es.r_energy == 6
    assert es.sigma_norm_exponent == 3  # (1 + 1/2) * 1 / (1/2)
    assert es.dx_norm_exponent == 12
    assert "gamma" in exponent_table(es)


def test_trivial_regimes():
    v = validate_params(ProblemParams(3, 3, 1, 1, 10))
    assert not v.ok and "alpha*p<n" in v.violations
    v = validate_params(ProblemParams(3, 2, 0.5, 1, 3))
    assert not v.ok and v.violations == ("r>r_critical",)
    assert validate_params(ProblemParams(3, 2, 0.5, 1, 6)).ok
    with pytest.raises(TrivialRegimeError):
        derive_exponents(ProblemParams(3, 2, 0.5, 1, 3))
    assert not validate_params(ProblemParams(3, 2, 1, 1, 6)).ok  # q = p-1


def test_float_conversion_is_decimal():
    assert to_fraction(0.1) == Fraction(1, 10)
    assert to_fraction("3/2") == Fraction(3, 2)
    with pytest.raises(ValueError):
        to_fraction(float("nan"))


@given(solvable())
def test_embedding_identity_and_positivity(pp):
    es = derive_exponents(pp)
    assert es.s_embed == (es.gamma + pp.q) / pp.q
    assert es.s_embed == es.s_embed_direct
    assert es.gamma > 0
    assert es.s_embed > 1 and es.s_wolff_energy > 1


@given(solvable())
def test_gamma_sign_and_monotone(pp):
    rc = critical_r(pp)
    below = pp.replace(r=rc)
    assert not validate_params(below).ok
    g1 = derive_exponents(pp).gamma
    g2 = derive_exponents(pp.replace(r=pp.r + 1)).gamma
    assert g2 > g1 > 0
    assert derive_exponents(pp.replace(r=energy_r(pp))).gamma == 1


@given(solvable(p2=True, alpha1=True))
def test_sufficient_exponents_collapse(pp):
    es = derive_exponents(pp)
    assert es.s1 == es.s2 == es.s3
    assert es.s1 > 1


@given(solvable(alpha1=True))
def test_wolff_proposition_exponent_equals_s1(pp):
    es = derive_exponents(pp)
    assert es.s_wolff_energy == es.s1


@given(solvable(p2=True, alpha1=True))
def test_kernel_proposition_exponent_equals_s3(pp):
    es = derive_exponents(pp)
    assert es.s_kernel_energy == es.s3
