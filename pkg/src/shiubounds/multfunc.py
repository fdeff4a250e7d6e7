"""Nonnegative multiplicative functions and their membership-condition checks.

A function is given by its rule on prime powers plus the class constants
(A1, A2, A3, beta, optional smooth-support cap Q).  Evaluation is the
product of the rule over a Factorization, so f(1) = 1 by the empty product.
Membership in the bounded / growing / smooth-supported classes can only be
falsified on finite samples, never proven; the checker reports witnesses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

from .arith import PRIME_CACHE, Factorization, factorize_small
from .errors import ConfigurationError, ContractViolationError, DomainError
from .logsum import NEG_INF


@dataclass(frozen=True)
class EvalContext:
    """The scale x entering (log log x)^beta growth; needs log log x > 0."""

    x: float

    def __post_init__(self):
        if self.x < 16:
            raise DomainError(f"evaluation scale x = {self.x} is below 16 (log log x <= 0)")

    @property
    def loglog(self) -> float:
        return math.log(math.log(self.x))


@dataclass(frozen=True)
class FunctionParams:
    """Class constants attached to a function.

    a1 bounds f(p^l) <= a1^l (times (log log x)^(beta*l) when beta > 0);
    a2/a3 are the Condition-ii/2 envelope constants; q, if set, is the
    smooth-support cap: the rule must vanish on primes above q.
    """

    a1: float
    a2: float = 2.0
    a3: float = 2.0
    beta: float = 0.0
    q: Optional[float] = None


# rule(prime, exponent, ctx) -> nonnegative value of f at prime^exponent
PrimePowerRule = Callable[[int, int, EvalContext], float]


@dataclass(frozen=True)
class MultiplicativeFunction:
    name: str
    rule: PrimePowerRule
    params: FunctionParams
    # f(p) = prime_coeff(ctx) for every prime p (<= q when q is set); lets
    # prime sums run off cached cumulative arrays instead of per-prime calls.
    prime_coeff: Optional[Callable[[EvalContext], float]] = None
    selector: str = field(default="", compare=False)

    def describe(self) -> str:
        return self.selector or self.name


def _rule_value(f: MultiplicativeFunction, p: int, e: int, ctx: EvalContext) -> float:
    v = f.rule(p, e, ctx)
    if v < 0.0:
        raise ContractViolationError(f"{f.name}({p}^{e}) = {v} < 0 breaks nonnegativity")
    if f.params.q is not None and p > f.params.q and v != 0.0:
        raise ContractViolationError(
            f"{f.name} claims {f.params.q}-smooth support but {f.name}({p}^{e}) = {v}"
        )
    return v


def evaluate(f: MultiplicativeFunction, fac: Factorization, ctx: EvalContext) -> float:
    """f(n) as the product of the prime-power rule over fac."""
    out = 1.0
    for p, e in fac.factors:
        out *= _rule_value(f, p, e, ctx)
        if out == 0.0:
            return 0.0
    return out


def evaluate_log(f: MultiplicativeFunction, fac: Factorization, ctx: EvalContext) -> float:
    """log f(n); -inf when f(n) = 0.  Survives values far beyond float range."""
    total = 0.0
    for p, e in fac.factors:
        v = _rule_value(f, p, e, ctx)
        if v == 0.0:
            return NEG_INF
        total += math.log(v)
    return total


def evaluate_at(f: MultiplicativeFunction, n: int, ctx: EvalContext) -> float:
    """Convenience wrapper factoring small n by trial division."""
    return evaluate(f, factorize_small(n), ctx)


@lru_cache(maxsize=None)
def tau_prime_power(d: int, l: int) -> int:
    """tau_d(p^l) by the convolution recursion tau_{d+1} = tau_d * 1.

    tau_1 is identically 1 on prime powers; each step sums the previous
    row over exponents 0..l.  (The closed form C(l+d-1, d-1) is used only
    as an independent oracle in tests.)
    """
    if d < 1 or l < 0:
        raise DomainError(f"tau_prime_power needs d >= 1, l >= 0, got d={d}, l={l}")
    if d == 1:
        return 1
    return sum(tau_prime_power(d - 1, j) for j in range(l + 1))


BUILTIN_NAMES = (
    "one",
    "tau_d",
    "tau_d_power_R",
    "smooth_indicator",
    "smooth_tau_d_power_R",
    "synthetic_large",
)


def builtin(name: str, **params) -> MultiplicativeFunction:
    """Construct one of the built-in functions by name.

    one                      -- constantly 1
    tau_d(d)                 -- d-fold divisor function
    tau_d_power_R(d, r)      -- tau_d(n)^r
    smooth_indicator(q)      -- 1 on q-smooth n, else 0
    smooth_tau_d_power_R(d, r, q)
    synthetic_large(c, beta) -- f(p^l) = (c (log log x)^beta)^l; saturates
                                the growing-class bound at every prime power
    """
    if name == "one":
        _expect_params(name, params, set())
        return MultiplicativeFunction(
            name="one",
            rule=lambda p, e, ctx: 1.0,
            params=FunctionParams(a1=1.0),
            prime_coeff=lambda ctx: 1.0,
        )
    if name == "tau_d":
        _expect_params(name, params, {"d"})
        d = _positive_int(name, "d", params.get("d", 2))
        return MultiplicativeFunction(
            name=f"tau{d}",
            rule=lambda p, e, ctx: float(tau_prime_power(d, e)),
            params=FunctionParams(a1=float(d)),
            prime_coeff=lambda ctx: float(d),
        )
    if name == "tau_d_power_R":
        _expect_params(name, params, {"d", "r"})
        d = _positive_int(name, "d", params.get("d", 2))
        r = _positive_float(name, "r", params.get("r", 1.0))
        return MultiplicativeFunction(
            name=f"tau{d}^{r:g}",
            rule=lambda p, e, ctx: float(tau_prime_power(d, e)) ** r,
            params=FunctionParams(a1=float(d) ** r),
            prime_coeff=lambda ctx: float(d) ** r,
        )
    if name == "smooth_indicator":
        _expect_params(name, params, {"q"})
        q = _positive_float(name, "q", params.get("q"))
        return MultiplicativeFunction(
            name=f"smooth<=~{q:g}",
            rule=lambda p, e, ctx: 1.0 if p <= q else 0.0,
            params=FunctionParams(a1=1.0, q=q),
            prime_coeff=lambda ctx: 1.0,
        )
    if name == "smooth_tau_d_power_R":
        _expect_params(name, params, {"d", "r", "q"})
        d = _positive_int(name, "d", params.get("d", 2))
        r = _positive_float(name, "r", params.get("r", 1.0))
        q = _positive_float(name, "q", params.get("q"))
        return MultiplicativeFunction(
            name=f"smooth-tau{d}^{r:g}<=~{q:g}",
            rule=lambda p, e, ctx: (float(tau_prime_power(d, e)) ** r if p <= q else 0.0),
            params=FunctionParams(a1=float(d) ** r, q=q),
            prime_coeff=lambda ctx: float(d) ** r,
        )
    if name == "synthetic_large":
        _expect_params(name, params, {"c", "beta"})
        c = _positive_float(name, "c", params.get("c", 1.0))
        beta = float(params.get("beta", 0.1))
        if beta < 0:
            raise ConfigurationError(f"synthetic_large needs beta >= 0, got {beta}")
        return MultiplicativeFunction(
            name=f"synthetic(c={c:g},beta={beta:g})",
            rule=lambda p, e, ctx: (c * ctx.loglog**beta) ** e,
            params=FunctionParams(a1=c, beta=beta),
            prime_coeff=lambda ctx: c * ctx.loglog**beta,
        )
    raise ConfigurationError(f"unknown builtin function {name!r}; known: {BUILTIN_NAMES}")


def _expect_params(name, params, allowed):
    extra = set(params) - allowed
    if extra:
        raise ConfigurationError(f"{name} does not accept parameters {sorted(extra)}")


def _positive_int(name, key, value):
    if value is None:
        raise ConfigurationError(f"{name} requires parameter {key}")
    iv = int(value)
    if iv < 1 or iv != value:
        raise ConfigurationError(f"{name} parameter {key} must be a positive integer, got {value}")
    return iv


def _positive_float(name, key, value):
    if value is None:
        raise ConfigurationError(f"{name} requires parameter {key}")
    fv = float(value)
    if not fv > 0:
        raise ConfigurationError(f"{name} parameter {key} must be positive, got {value}")
    return fv


@dataclass(frozen=True)
class ConditionSample:
    """Finite sample on which the membership conditions are evaluated."""

    prime_powers: tuple[tuple[int, int], ...]
    integers: tuple[int, ...]
    eps: float = 0.1


@dataclass(frozen=True)
class Witness:
    condition: str
    point: tuple
    value: float
    bound: float


@dataclass(frozen=True)
class ConditionReport:
    claim: str
    holds: bool
    witnesses: tuple[Witness, ...]
    checked: int
    sample: ConditionSample

    def first_witness(self) -> Optional[Witness]:
        return self.witnesses[0] if self.witnesses else None


CLASS_CLAIMS = ("M", "M_beta", "M_Q", "M_Q_beta")


def check_condition_set(
    f: MultiplicativeFunction,
    ctx: EvalContext,
    class_claim: str,
    sample: ConditionSample,
    gamma: Optional[float] = None,
) -> ConditionReport:
    """Literally evaluate each membership inequality at every sample point.

    A violation is a reported witness, never an exception: the checker can
    falsify a class claim but not prove it.  ``gamma`` switches the large-n
    envelope to the tightened max{A2 x^eps, A3 e^{(log log x)^{1-gamma}}}
    variant (checked literally; there is no accompanying constant to pin).
    """
    if class_claim not in CLASS_CLAIMS:
        raise ConfigurationError(f"unknown class claim {class_claim!r}; known: {CLASS_CLAIMS}")
    p_ = f.params
    eps = sample.eps
    growing = class_claim.endswith("_beta")
    smooth = class_claim.startswith("M_Q")
    witnesses: list[Witness] = []
    checked = 0

    for p, l in sample.prime_powers:
        v = _rule_value(f, p, l, ctx)
        checked += 1
        if growing:
            bound = p_.a1**l * ctx.loglog ** (p_.beta * l)
            cond = "prime_power_growing"
        else:
            bound = p_.a1**l
            cond = "prime_power_bounded"
        if v > bound:
            witnesses.append(Witness(cond, (p, l), v, bound))
        if smooth:
            checked += 1
            if p_.q is None:
                witnesses.append(Witness("smooth_support_unset", (p, l), v, 0.0))
            elif p > p_.q and v != 0.0:
                witnesses.append(Witness("smooth_support", (p, l), v, 0.0))

    for n in sample.integers:
        v = evaluate_at(f, n, ctx)
        checked += 1
        if growing:
            if gamma is not None:
                big = p_.a3 * math.exp(ctx.loglog ** (1.0 - gamma))
                cond = "envelope_growing_gamma"
            else:
                big = p_.a3 * math.log(ctx.x) ** eps
                cond = "envelope_growing"
            bound = max(p_.a2 * ctx.x**eps, big)
        else:
            bound = p_.a2 * float(n) ** eps
            cond = "envelope_bounded"
        if v > bound:
            witnesses.append(Witness(cond, (n,), v, bound))

    return ConditionReport(
        claim=class_claim,
        holds=not witnesses,
        witnesses=tuple(witnesses),
        checked=checked,
        sample=sample,
    )


def prime_sum(
    f: MultiplicativeFunction,
    x_upper: float,
    k: int,
    lower: float,
    ctx: EvalContext,
) -> float:
    """sum of f(p)/p over primes with lower < p <= x_upper and p not dividing k.

    Exact finite sum over sieved primes.  Functions exposing a constant
    prime value use cached cumulative reciprocal sums; anything else falls
    back to a per-prime loop.
    """
    if k < 1:
        raise DomainError(f"prime_sum needs k >= 1, got {k}")
    hi = x_upper
    if f.params.q is not None:
        hi = min(hi, f.params.q)
    if hi < 2 or hi <= lower:
        return 0.0

    k_prime_correction = 0.0
    for p, _ in factorize_small(k).factors:
        if lower < p <= hi:
            k_prime_correction += 1.0 / p

    if f.prime_coeff is not None:
        coeff = f.prime_coeff(ctx)
        return coeff * (PRIME_CACHE.recip_sum_between(lower, hi) - k_prime_correction)

    total = 0.0
    for p in PRIME_CACHE.upto(int(hi)).tolist():
        if p <= lower or k % p == 0:
            continue
        total += _rule_value(f, p, 1, ctx) / p
    return total
