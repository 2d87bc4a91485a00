"""Parameter ranges and exponent formulas, evaluated in exact arithmetic.

Every input is converted to a Fraction: integers and "a/b" strings
directly, floats through their shortest decimal representation (so 0.5
becomes 1/2 and 0.1 becomes 1/10).  The identities between the exponents
then hold with ``==``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

Number = Union[int, float, str, Fraction]

SOLVABLE = "solvable-regime"
TRIVIAL = "trivial-regime"


def to_fraction(v: Number) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        if v != v or v in (float("inf"), float("-inf")):
            raise ValueError("parameters must be finite")
        return Fraction(repr(v))
    if isinstance(v, str):
        return Fraction(v.strip())
    raise TypeError(f"cannot read {v!r} as a number")


def fraction_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class ProblemParams:
    n: int
    p: Fraction
    q: Fraction
    alpha: Fraction
    r: Fraction

    def __init__(self, n, p, q, alpha=1, r=None):
        if r is None:
            raise TypeError("r is required")
        nf = to_fraction(n)
        if nf.denominator != 1:
            raise ValueError("n must be an integer")
        object.__setattr__(self, "n", int(nf))
        object.__setattr__(self, "p", to_fraction(p))
        object.__setattr__(self, "q", to_fraction(q))
        object.__setattr__(self, "alpha", to_fraction(alpha))
        object.__setattr__(self, "r", to_fraction(r))

    def floats(self) -> dict:
        return {"n": self.n, "p": float(self.p), "q": float(self.q), "alpha": float(self.alpha), "r": float(self.r)}

    def to_dict(self) -> dict:
        return {"n": self.n, "p": fraction_str(self.p), "q": fraction_str(self.q), "alpha": fraction_str(self.alpha), "r": fraction_str(self.r)}

    def replace(self, **kw) -> "ProblemParams":
        d = {"n": self.n, "p": self.p, "q": self.q, "alpha": self.alpha, "r": self.r}
        d.update(kw)
        return ProblemParams(**d)


def critical_r(pp: ProblemParams) -> Optional[Fraction]:
    """n(p-1)/(n-αp), or None when αp >= n."""
    denom = pp.n - pp.alpha * pp.p
    if denom <= 0:
        return None
    return pp.n * (pp.p - 1) / denom


def energy_r(pp: ProblemParams) -> Optional[Fraction]:
    """The r at which γ = 1, namely np/(n-αp)."""
    denom = pp.n - pp.alpha * pp.p
    if denom <= 0:
        return None
    return pp.n * pp.p / denom


@dataclass(frozen=True)
class Verdict:
    verdict: str
    violations: tuple = ()
    messages: tuple = ()

    @property
    def ok(self) -> bool:
        return self.verdict == SOLVABLE

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "violations": list(self.violations), "messages": list(self.messages)}


def validate_params(pp: ProblemParams) -> Verdict:
    bad, msg = [], []
    if pp.n < 2:
        bad.append("n>=2")
        msg.append(f"dimension n={pp.n} must be at least 2")
    if not pp.p > 1:
        bad.append("p>1")
        msg.append(f"p={fraction_str(pp.p)} must exceed 1")
    if not pp.alpha > 0:
        bad.append("alpha>0")
        msg.append("α must be positive")
    if not (0 < pp.q < pp.p - 1):
        bad.append("0<q<p-1")
        msg.append(f"q={fraction_str(pp.q)} must lie strictly between 0 and p-1={fraction_str(pp.p - 1)}")
    if not pp.alpha * pp.p < pp.n:
        bad.append("alpha*p<n")
        if pp.alpha == 1:
            msg.append(f"p={fraction_str(pp.p)} >= n={pp.n}: only the trivial supersolution exists")
        else:
            msg.append(f"αp={fraction_str(pp.alpha * pp.p)} >= n={pp.n}: only the trivial supersolution exists")
    if not pp.r > 0:
        bad.append("r>0")
        msg.append("r must be positive")
    rc = critical_r(pp)
    if rc is not None and pp.r > 0 and not pp.r > rc:
        bad.append("r>r_critical")
        msg.append(
            f"r={fraction_str(pp.r)} <= n(p-1)/(n-αp)={fraction_str(rc)}: only the trivial supersolution exists"
        )
    return Verdict(TRIVIAL if bad else SOLVABLE, tuple(bad), tuple(msg))


@dataclass(frozen=True)
class ExponentSet:
    gamma: Fraction
    s_embed: Fraction
    s_embed_direct: Fraction
    r_critical: Fraction
    r_energy: Fraction
    sigma_norm_exponent: Fraction
    dx_norm_exponent: Fraction
    kernel_sigma_exponent: Optional[Fraction]
    kernel_dx_exponent: Optional[Fraction]
    s1: Optional[Fraction]
    s2: Optional[Fraction]
    s3: Optional[Fraction]
    s_wolff_energy: Fraction
    s_kernel_energy: Optional[Fraction]
    extras: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        out = {}
        for k in (
            "gamma", "s_embed", "s_embed_direct", "r_critical", "r_energy", "sigma_norm_exponent",
            "dx_norm_exponent", "kernel_sigma_exponent", "kernel_dx_exponent", "s1", "s2", "s3",
            "s_wolff_energy", "s_kernel_energy",
        ):
            v = getattr(self, k)
            out[k] = None if v is None else {"exact": fraction_str(v), "value": float(v)}
        return out


class TrivialRegimeError(ValueError):
    def __init__(self, verdict: Verdict):
        super().__init__("; ".join(verdict.messages) or "parameters outside the solvable regime")
        self.verdict = verdict


def derive_exponents(pp: ProblemParams) -> ExponentSet:
    v = validate_params(pp)
    if not v.ok:
        raise TrivialRegimeError(v)
    n, p, q, a, r = Fraction(pp.n), pp.p, pp.q, pp.alpha, pp.r
    gamma = (r * (n - a * p) - (p - 1) * n) / n
    s_embed = (gamma + q) / q
    s_embed_direct = (r * (n - a * p) - (p - 1) * n) / (n * q) + 1
    sig_exp = (gamma + q) * (p - 1) / (p - 1 - q)
    dx_exp = r * (p - 1) / (p - 1 - q)
    # sufficient-condition exponents, each defined where its formula applies
    s1 = n * r / (n * (p - 1 - q) + p * r) if a == 1 else None
    s2 = n * r / (n * (1 - q) + 2 * a * r) if p == 2 else None
    s3 = n * r / (n * (1 - q) + 2 * r) if (p == 2 and a == 1 and n >= 3) else None
    beta = sig_exp
    s_wolff_energy = n * (beta + p - 1) / (n * (p - 1) + p * a * beta)
    k_sig = k_dx = s_kernel_energy = None
    if q < 1:
        k_sig = (gamma + q) / (1 - q)
        k_dx = r / (1 - q)
        if a == 1:
            b3 = (gamma + q) / (1 - q)
            s_kernel_energy = n * (b3 + 1) / (n + 2 * a * b3)
    return ExponentSet(
        gamma=gamma,
        s_embed=s_embed,
        s_embed_direct=s_embed_direct,
        r_critical=critical_r(pp),
        r_energy=energy_r(pp),
        sigma_norm_exponent=sig_exp,
        dx_norm_exponent=dx_exp,
        kernel_sigma_exponent=k_sig,
        kernel_dx_exponent=k_dx,
        s1=s1,
        s2=s2,
        s3=s3,
        s_wolff_energy=s_wolff_energy,
        s_kernel_energy=s_kernel_energy,
    )


def exponent_table(es: ExponentSet) -> str:
    rows = [(k, v["exact"], f"{v['value']:.12g}") for k, v in es.to_dict().items() if v is not None]
    w = max(len(k) for k, _, _ in rows)
    lines = [f"{'name':<{w}}  {'exact':>14}  {'value':>18}"]
    lines += [f"{k:<{w}}  {e:>14}  {f:>18}" for k, e, f in rows]
    return "\n".join(lines)
