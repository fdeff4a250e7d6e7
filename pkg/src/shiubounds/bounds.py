"""Right-hand-side cores, the rough count, the class partition, and the
derived parameters of the short-interval machinery.

Every theorem bound here is an upper bound up to an unspecified implied
constant, so each evaluator exposes the displayed expression with that
constant stripped ("core"), in log domain.  Ratios lhs/core are what the
harness freezes and regression-tests; nothing here proves anything.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

from . import dickman
from .arith import (
    Factorization,
    euler_phi,
    factor_interval_cached,
    iter_products_ascending,
    prime_count,
    prime_factors_between,
    residues_in_interval,
)
from .errors import ConfigurationError, DomainError
from .logsum import NEG_INF, log_sum_exp, safe_exp
from .multfunc import EvalContext, MultiplicativeFunction, evaluate, evaluate_log, prime_sum

THEOREM_TAGS = ("Shiu", "Main", "MnThm2-C1", "MnThm2-C2", "dfold", "dfold-smooth", "smooththm")

_E_TO_E = math.e**math.e


def _eval_ctx(x: float) -> EvalContext:
    # The context scale only feeds (log log x)^beta-style rules, which are
    # meaningless below e^e anyway; flooring at 16 keeps toy intervals legal.
    return EvalContext(max(float(x), 16.0))


def interval_spec_problem(x, y, k, a, alpha, kappa) -> Optional[str]:
    """Reason code for an inadmissible (x, y, k, a, alpha, kappa), else None."""
    if not 0.0 < alpha < 0.5:
        return "alpha_out_of_range"
    if not 0.0 < kappa < 0.5:
        return "kappa_out_of_range"
    if x < 1 or y < 1:
        return "x_or_y_not_positive"
    if y > x:
        return "y_above_x"
    if y < x**kappa:
        return "y_below_x_pow_kappa"
    if k < 1:
        return "k_not_positive"
    if k >= y ** (1.0 - alpha):
        return "k_not_below_y_pow"
    if not 0 <= a < k:
        return "a_out_of_range"
    if math.gcd(a, k) != 1:
        return "a_not_coprime_to_k"
    return None


@dataclass(frozen=True)
class IntervalSpec:
    """The admissible tuple (x, y, k, a, alpha, kappa).

    Encodes the hypotheses x^kappa <= y <= x, k < y^(1-alpha), (a, k) = 1;
    construction raises DomainError with a reason code when they fail.
    """

    x: int
    y: int
    k: int = 1
    a: int = 0
    alpha: float = 0.25
    kappa: float = 0.25

    def __post_init__(self):
        problem = interval_spec_problem(self.x, self.y, self.k, self.a, self.alpha, self.kappa)
        if problem:
            raise DomainError(problem)

    def residues(self) -> list[int]:
        return residues_in_interval(self.x, self.y, self.k, self.a)


@dataclass(frozen=True)
class SmoothnessContext:
    """Derived parameters of a run.

    q: smooth-support scale (defaults to x, making u = 1)
    u: log x / log q
    j: prime threshold separating the smooth head s from the rough tail t
    z: cap for the head factor c_n of the class partition
    r0/r1/r2: prime-factor-count thresholds steering the class-IV machinery
    """

    x: float
    q: float
    u: float
    j: float
    z: float
    r0: int
    r1: float
    r2: float
    beta: float
    flags: tuple[str, ...] = ()


def derive_context(
    spec: IntervalSpec, beta: float = 0.0, q: Optional[float] = None
) -> SmoothnessContext:
    """Compute the derived parameters for a spec at class exponent beta.

    The working interval length is the spec's y (the top-level report view);
    degenerate values at desk scale are flagged, not errors.
    """
    x = float(spec.x)
    if x <= _E_TO_E:
        raise DomainError(f"x = {x} too small: need log log x > 1")
    if not 0.0 <= beta < 1.0:
        raise DomainError(f"beta = {beta} outside [0, 1)")
    q_val = x if q is None else float(q)
    if q_val < 2.0:
        raise DomainError(f"q = {q_val} below 2")

    lx = math.log(x)
    llx = math.log(lx)
    j = llx ** (1.0 - beta)
    z = float(spec.y) ** (spec.alpha / 10.0)
    big_l = lx * llx
    r0 = math.floor(math.log(z) / (5.0 * math.log(big_l))) if z > 1.0 else 0
    r1 = llx ** (1.0 - beta / 2.0)
    ak = spec.alpha * spec.kappa
    r2 = ak * (1.0 - ak / 20.0) * lx / (20.0 * math.log(q_val))
    u = lx / math.log(q_val)

    flags = []
    if z < 2.0:
        flags.append("z_degenerate")
    if big_l**5 > math.sqrt(z):
        flags.append("outside_asymptotic_regime")
    if r2 > r0:
        flags.append("r2_above_r0")
    return SmoothnessContext(
        x=x, q=q_val, u=u, j=j, z=z, r0=r0, r1=r1, r2=r2, beta=beta, flags=tuple(flags)
    )


def context_with_z(ctx: SmoothnessContext, z: float) -> SmoothnessContext:
    """Diagnostic override of the class-partition cap z (flags recomputed)."""
    if z < 1.0:
        raise DomainError(f"z override {z} below 1")
    flags = [f for f in ctx.flags if f not in ("z_degenerate", "outside_asymptotic_regime")]
    if z < 2.0:
        flags.append("z_degenerate")
    if (math.log(ctx.x) * math.log(math.log(ctx.x))) ** 5 > math.sqrt(z):
        flags.append("outside_asymptotic_regime")
    flags.append("z_overridden")
    return replace(ctx, z=z, flags=tuple(sorted(flags)))


@dataclass(frozen=True)
class BoundReport:
    """One LHS/RHS-core comparison with its parameter echo.

    Values are carried in log domain; linear readings saturate to inf/0.
    """

    theorem_tag: str
    lhs_log: float
    rhs_core_log: float
    params: dict
    flags: tuple[str, ...] = ()
    rhs_core_alt_log: Optional[float] = None

    def __post_init__(self):
        if self.theorem_tag not in THEOREM_TAGS:
            raise ConfigurationError(f"unknown theorem tag {self.theorem_tag!r}")

    @property
    def lhs(self) -> float:
        return safe_exp(self.lhs_log)

    @property
    def rhs_core(self) -> float:
        return safe_exp(self.rhs_core_log)

    @property
    def ratio_log(self) -> float:
        return self.lhs_log - self.rhs_core_log

    @property
    def ratio(self) -> float:
        return safe_exp(self.ratio_log)


def _residue_factorizations(spec: IntervalSpec) -> list[Factorization]:
    interval = factor_interval_cached(spec.x, spec.y)
    return [interval[n - spec.x] for n in spec.residues()]


def lhs_sum(f: MultiplicativeFunction, spec: IntervalSpec) -> float:
    """log of sum of f(n) over n in [x, x+y) with n ≡ a (mod k)."""
    ectx = _eval_ctx(spec.x)
    return log_sum_exp(evaluate_log(f, fac, ectx) for fac in _residue_factorizations(spec))


def rhs_shiu(f: MultiplicativeFunction, spec: IntervalSpec) -> float:
    """log core of (y / (phi(k) log x)) * exp(sum_{p<=x, p∤k} f(p)/p)."""
    ectx = _eval_ctx(spec.x)
    return (
        math.log(spec.y)
        - math.log(euler_phi(spec.k))
        - math.log(math.log(spec.x))
        + prime_sum(f, float(spec.x), spec.k, 0.0, ectx)
    )


def rhs_main(
    f: MultiplicativeFunction, spec: IntervalSpec, eps0: float = 0.1
) -> tuple[float, tuple[str, ...]]:
    """log core of (x / (phi(k) (log x)^(1-eps0))) * exp(prime sum).

    The class hypothesis beta < alpha*kappa/41 is checked; a violation
    downgrades to a warning and the core still evaluates.
    """
    if eps0 <= 0:
        raise DomainError(f"eps0 must be positive, got {eps0}")
    warnings = []
    if f.params.beta >= spec.alpha * spec.kappa / 41.0:
        warnings.append("beta_hypothesis_violated")
    ectx = _eval_ctx(spec.x)
    core = (
        math.log(spec.x)
        - math.log(euler_phi(spec.k))
        - (1.0 - eps0) * math.log(math.log(spec.x))
        + prime_sum(f, float(spec.x), spec.k, 0.0, ectx)
    )
    return core, tuple(warnings)


def constants_c1_c2(alpha: float, kappa: float) -> tuple[float, float]:
    """The two smooth-theorem exponent constants determined by alpha, kappa."""
    if not 0.0 < alpha < 0.5 or not 0.0 < kappa < 0.5:
        raise DomainError(f"alpha={alpha}, kappa={kappa} must lie in (0, 1/2)")
    ak = alpha * kappa
    c1 = ak / 41.0
    c2 = (5.0 / 656.0) * (ak * (1.0 - ak / 20.0) / 20.0)
    return c1, c2


@dataclass(frozen=True)
class SmoothCores:
    """Both readings of the smooth-theorem core.

    The displayed bound carries the prime factor as a bare parenthesized
    sum; the non-smooth theorems exponentiate it.  Both are returned and
    reported side by side rather than choosing.
    """

    sum_reading_log: float
    exp_reading_log: float
    prime_sum_value: float
    rho_power_log: float
    warnings: tuple[str, ...]


def rhs_smooth(
    f: MultiplicativeFunction,
    spec: IntervalSpec,
    ctx: SmoothnessContext,
    variant: str,
    eps: float = 0.1,
    table: Optional[dickman.DickmanTable] = None,
) -> SmoothCores:
    """Core of the smooth-supported bound, variant "C1" or "C2".

    C1: rho(u)^C1 * x/(phi(k) log x)      * [prime factor]
    C2: rho(u)^C2 * x/(phi(k) (log x)^(1-eps)) * [prime factor]
    with the prime factor sum_{p<=Q, p∤k} f(p)/p in both readings.
    """
    if variant not in ("C1", "C2"):
        raise ConfigurationError(f"variant must be C1 or C2, got {variant!r}")
    table = table or dickman.default_table()
    c1, c2 = constants_c1_c2(spec.alpha, spec.kappa)
    warnings = []
    if f.params.q is None:
        warnings.append("f_not_smooth_supported")
    lx = math.log(spec.x)
    llx = math.log(lx)
    if variant == "C1":
        c_exp = c1
        base = math.log(spec.x) - math.log(euler_phi(spec.k)) - math.log(lx)
    else:
        if eps <= 0:
            raise DomainError(f"eps must be positive, got {eps}")
        c_exp = c2
        base = math.log(spec.x) - math.log(euler_phi(spec.k)) - (1.0 - eps) * math.log(lx)
        q_cap = math.exp(lx * math.log(llx) / llx)
        if ctx.q > q_cap:
            warnings.append("q_hypothesis_violated")
        if f.params.beta >= spec.alpha * spec.kappa / 41.0:
            warnings.append("beta_hypothesis_violated")

    rho_power_log = c_exp * table.log_rho(ctx.u)
    ectx = _eval_ctx(spec.x)
    s = prime_sum(f, ctx.q, spec.k, 0.0, ectx)
    sum_reading = base + rho_power_log + (math.log(s) if s > 0 else NEG_INF)
    if s <= 0:
        warnings.append("empty_prime_sum")
    exp_reading = base + rho_power_log + s
    return SmoothCores(
        sum_reading_log=sum_reading,
        exp_reading_log=exp_reading,
        prime_sum_value=s,
        rho_power_log=rho_power_log,
        warnings=tuple(warnings),
    )


def phi_rough(x: int, y: int, z: float, k: int, a: int) -> tuple[int, float]:
    """Count of n in [x, x+y), n ≡ a (mod k), with least prime factor > z,
    paired with the bound core y/(phi(k) log z) + z^2.

    The count is well defined for any z >= 1 (z < 2 roughs out nothing);
    the core degenerates to inf at z = 1 where log z vanishes.
    """
    if z < 1:
        raise DomainError(f"phi_rough needs z >= 1, got {z}")
    interval = factor_interval_cached(x, y)
    count = 0
    for n in residues_in_interval(x, y, k, a):
        fac = interval[n - x]
        if not fac.factors or fac.factors[0][0] > z:
            count += 1
    log_z = math.log(z)
    core = y / (euler_phi(k) * log_z) + z * z if log_z > 0 else math.inf
    return count, core


@dataclass(frozen=True)
class ClassLabel:
    """Partition class of one n, with its head/tail split.

    c is the largest prefix product of complete prime powers <= z; d = n/c.
    regime_flag marks runs where (log x log log x)^5 > sqrt(z), i.e. the
    III/IV thresholds have crossed and the asymptotic ordering fails.
    """

    label: str
    c: int
    d: int
    regime_flag: bool


def classify(n: int, fac: Factorization, ctx: SmoothnessContext, x: float) -> ClassLabel:
    """Assign n to class I, II, III or IV (precedence in that order)."""
    z = ctx.z
    c = 1
    q_d = math.inf
    for p, e in fac.factors:
        step = c * p**e
        if step <= z:
            c = step
        else:
            q_d = float(p)
            break
    d = n // c
    sqrt_z = math.sqrt(z)
    big_l5 = (math.log(x) * math.log(math.log(x))) ** 5
    if q_d > sqrt_z:
        label = "I"
    elif c <= sqrt_z:
        label = "II"
    elif q_d <= big_l5:
        label = "III"
    else:
        label = "IV"
    return ClassLabel(label=label, c=c, d=d, regime_flag=big_l5 > sqrt_z)


@dataclass(frozen=True)
class ClassSums:
    totals_log: dict
    coverage: int
    lhs_log: float

    def partition_gap(self) -> float:
        """|log of (sum of class sums) - log lhs|; 0 for an exact partition."""
        recombined = log_sum_exp(self.totals_log.values())
        if recombined == NEG_INF and self.lhs_log == NEG_INF:
            return 0.0
        return abs(recombined - self.lhs_log)


def class_sums(
    f: MultiplicativeFunction, spec: IntervalSpec, ctx: SmoothnessContext
) -> ClassSums:
    """Per-class log sums of f over the residue-filtered interval.

    The four classes partition the interval exactly; coverage equals the
    residue count by construction and is re-checked by callers.
    """
    ectx = _eval_ctx(spec.x)
    buckets: dict[str, list[float]] = {"I": [], "II": [], "III": [], "IV": []}
    coverage = 0
    all_logs = []
    interval = factor_interval_cached(spec.x, spec.y)
    for n in spec.residues():
        fac = interval[n - spec.x]
        lv = evaluate_log(f, fac, ectx)
        label = classify(n, fac, ctx, float(spec.x)).label
        buckets[label].append(lv)
        all_logs.append(lv)
        coverage += 1
    totals = {name: log_sum_exp(vals) for name, vals in buckets.items()}
    return ClassSums(totals_log=totals, coverage=coverage, lhs_log=log_sum_exp(all_logs))


@dataclass(frozen=True)
class VSplitSums:
    v1_log: float
    v2_log: float
    v3_log: float
    lhs_log: float
    counts: tuple[int, int, int]

    def split_gap(self) -> float:
        recombined = log_sum_exp((self.v1_log, self.v2_log, self.v3_log))
        if recombined == NEG_INF and self.lhs_log == NEG_INF:
            return 0.0
        return abs(recombined - self.lhs_log)


def _v_bucket(s: int, cap1: float, cap2: float) -> int:
    if s <= cap1:
        return 1
    if s <= cap2:
        return 2
    return 3


def v_split_sums(
    f: MultiplicativeFunction, spec: IntervalSpec, ctx: SmoothnessContext
) -> VSplitSums:
    """Split every n = s*t at the prime threshold j and bucket by the size
    of the smooth head s: s <= (log x)^10, then up to x^alpha, then above.

    The buckets partition the interval, so V1 + V2 + V3 recombines to the
    full sum exactly (up to log-domain rounding)."""
    ectx = _eval_ctx(spec.x)
    cap1 = math.log(spec.x) ** 10.0
    cap2 = float(spec.x) ** spec.alpha
    buckets: dict[int, list[float]] = {1: [], 2: [], 3: []}
    counts = [0, 0, 0]
    all_logs = []
    interval = factor_interval_cached(spec.x, spec.y)
    for n in spec.residues():
        fac = interval[n - spec.x]
        s = 1
        for p, e in fac.factors:
            if p <= ctx.j:
                s *= p**e
        which = _v_bucket(s, cap1, cap2)
        lv = evaluate_log(f, fac, ectx)
        buckets[which].append(lv)
        counts[which - 1] += 1
        all_logs.append(lv)
    return VSplitSums(
        v1_log=log_sum_exp(buckets[1]),
        v2_log=log_sum_exp(buckets[2]),
        v3_log=log_sum_exp(buckets[3]),
        lhs_log=log_sum_exp(all_logs),
        counts=tuple(counts),
    )


@dataclass(frozen=True)
class RankinTail:
    """Truncated tail sum against both Rankin-trick cores.

    lhs_truncated sums f(n)/n over generated n in [sqrt(z), N] supported on
    primes in (j, z^(1/r)] and coprime to k.  tail_bound estimates the mass
    beyond N (may be inf when the crude geometric closure diverges).
    """

    lhs_truncated: float
    terms_used: int
    rhs_core_main_log: float
    rhs_core_shiu_log: float
    tail_bound: float
    flags: tuple[str, ...]


def rankin_tail(
    f: MultiplicativeFunction,
    z: float,
    r: float,
    k: int,
    ctx: SmoothnessContext,
    truncation_n: int,
) -> RankinTail:
    """Evaluate the tail sum and the two displayed exponential cores.

    main core: exp(-(1/2)(1-(5/4)b) r log r + sum_{j<p<=z^(1/r), p∤k} f(p)/p
               + 2 A1 (log log x)^b r^(1-(5/4)b))
    shiu core: exp(-(1/2)(1-(5/4)b) r log r + sum_{p<=z, p∤k} f(p)/p)
    with b and A1 taken from the function's own class parameters.
    """
    if z < 2:
        raise DomainError(f"rankin_tail needs z >= 2, got {z}")
    if r < 1:
        raise DomainError(f"rankin_tail needs r >= 1, got {r}")
    w = math.sqrt(z)
    if truncation_n < w:
        raise DomainError(f"truncation N = {truncation_n} below sqrt(z) = {w}")

    flags = []
    log_z = math.log(z)
    if log_z <= 1.0:
        flags.append("z_admissibility_undefined")
    else:
        r_cap = log_z / (4.0 * math.log(log_z))
        if r > r_cap:
            flags.append("r_beyond_lemma_range")

    v = z ** (1.0 / r)
    primes = [p for p in prime_factors_between(ctx.j, v) if k % p != 0]
    ectx = _eval_ctx(ctx.x)
    terms = []
    for n, factors in iter_products_ascending(primes, truncation_n):
        if n < w or math.gcd(n, k) != 1:
            continue
        terms.append(evaluate(f, Factorization(n, factors), ectx) / n)
    lhs = math.fsum(terms)

    beta = f.params.beta
    a1 = f.params.a1
    llx = math.log(math.log(ctx.x))
    rankin_exponent = -0.5 * (1.0 - 1.25 * beta) * r * math.log(r)
    main_core = (
        rankin_exponent
        + prime_sum(f, v, k, ctx.j, ectx)
        + 2.0 * a1 * llx**beta * r ** (1.0 - 1.25 * beta)
    )
    shiu_core = rankin_exponent + prime_sum(f, z, k, 0.0, ectx)
    tail = _rankin_tail_bound(f, primes, truncation_n, ectx)
    return RankinTail(
        lhs_truncated=lhs,
        terms_used=len(terms),
        rhs_core_main_log=main_core,
        rhs_core_shiu_log=shiu_core,
        tail_bound=tail,
        flags=tuple(flags),
    )


def _rankin_tail_bound(f, primes, n_cut, ectx) -> float:
    """Crude bound on the untruncated mass beyond N: shift by n^(-1/2) and
    close each local factor geometrically.  Reported, never asserted."""
    log_total = -0.5 * math.log(n_cut)
    growth = f.params.a1 * ectx.loglog ** f.params.beta
    for p in primes:
        acc = 0.0
        term = 0.0
        for power in range(1, 121):
            term = f.rule(p, power, ectx) / p ** (power / 2.0)
            acc += term
            if term < 1e-18:
                break
        else:
            return math.inf
        ratio = growth / math.sqrt(p)
        if term >= 1e-18:
            if ratio >= 1.0:
                return math.inf
            acc += term * ratio / (1.0 - ratio)
        log_total += math.log1p(acc)
    return safe_exp(log_total)


@dataclass(frozen=True)
class GHValues:
    g: float
    h: float
    flags: tuple[str, ...]

    def margin(self) -> float:
        return self.g - self.h


def g_h(
    r: float, ctx: SmoothnessContext, a1: float, alpha: float, kappa: float, x: float
) -> GHValues:
    """The decay/growth pair controlling the class-IV sum over r:

    g(r) = (1/2)(1 - (5/4)b) log r
    h(r) = 20 log A1/(alpha kappa) + (20/41) log log log x + 2 log r / r
           + 2 A1 (log log x)^b r^(-(5/4)b)
    """
    if r < 2:
        raise DomainError(f"g_h needs r >= 2, got {r}")
    if x <= math.e:
        raise DomainError(f"g_h needs log log x > 0, got x = {x}")
    beta = ctx.beta
    llx = math.log(math.log(x))
    lllx = math.log(llx) if llx > 0 else NEG_INF
    flags = () if lllx > 0 else ("logloglog_nonpositive",)
    g = 0.5 * (1.0 - 1.25 * beta) * math.log(r)
    h = (
        20.0 * math.log(a1) / (alpha * kappa)
        + (20.0 / 41.0) * lllx
        + 2.0 * math.log(r) / r
        + 2.0 * a1 * llx**beta * r ** (-1.25 * beta)
    )
    return GHValues(g=g, h=h, flags=flags)


def rhs_v3_core(spec: IntervalSpec, ctx: SmoothnessContext) -> float:
    """Core of the oversized-head bound: y / (k x^(alpha/3))."""
    return spec.y / (spec.k * float(spec.x) ** (spec.alpha / 3.0))


@dataclass(frozen=True)
class PsiBoundCores:
    """Log cores of the three smooth-count envelopes, plus pi(j)."""

    psibound_log: float
    smoothbd_log: float
    psizj_log: float
    pi_j: int
    j: float

    @property
    def psibound(self) -> float:
        return safe_exp(self.psibound_log)

    @property
    def smoothbd(self) -> float:
        return safe_exp(self.smoothbd_log)

    @property
    def psizj(self) -> float:
        return safe_exp(self.psizj_log)


def psibound_cores(x: float, z: float, beta: float = 0.0) -> PsiBoundCores:
    """Cores exp(3 log x / sqrt(log log x)),  x exp(-log x (log x - log z)/log z),
    and (log z / j)^pi(j); the (1+o(1)) exponent factor is taken as 1.

    Requires j = (log log x)^(1-beta) <= (log z)^(1-beta), the regime where
    the third identity applies.
    """
    if x < 16:
        raise DomainError(f"need x >= 16, got {x}")
    if z < 2:
        raise DomainError(f"need z >= 2, got {z}")
    lx = math.log(x)
    llx = math.log(lx)
    lz = math.log(z)
    j = llx ** (1.0 - beta)
    if j > lz ** (1.0 - beta):
        raise DomainError(f"j = {j:.4g} exceeds (log z)^(1-beta) = {lz ** (1.0 - beta):.4g}")
    pi_j = prime_count(j)
    return PsiBoundCores(
        psibound_log=3.0 * lx / math.sqrt(llx),
        smoothbd_log=lx - lx * (lx - lz) / lz,
        psizj_log=pi_j * (math.log(lz) - math.log(j)),
        pi_j=pi_j,
        j=j,
    )
