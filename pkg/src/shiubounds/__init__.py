"""Desk-scale numerical verification of short-interval upper bounds for
nonnegative multiplicative functions in arithmetic progressions, with the
smooth-number apparatus (Dickman rho, exact psi counts) and the divisor-power
and smooth-short-interval applications."""

from . import arith, bounds, dickman, harness, multfunc
from .arith import (
    Factorization,
    euler_phi,
    factor_interval,
    greatest_prime_factor,
    least_prime_factor,
    residues_in_interval,
    sieve_primes,
    smooth_rough_split,
)
from .bounds import (
    BoundReport,
    ClassLabel,
    IntervalSpec,
    SmoothnessContext,
    class_sums,
    classify,
    constants_c1_c2,
    derive_context,
    g_h,
    lhs_sum,
    phi_rough,
    psibound_cores,
    rankin_tail,
    rhs_main,
    rhs_shiu,
    rhs_smooth,
    rhs_v3_core,
    v_split_sums,
)
from .dickman import (
    DickmanTable,
    build_table,
    psi_estimate,
    psi_exact,
    psi_short_interval,
    rho,
    rho_asymptotic,
)
from .errors import (
    ConfigurationError,
    ContractViolationError,
    DomainError,
    IntervalRangeError,
    ResourceLimitError,
    TableRangeError,
)
from .multfunc import (
    ConditionSample,
    EvalContext,
    MultiplicativeFunction,
    builtin,
    check_condition_set,
    evaluate,
    evaluate_at,
    prime_sum,
)

__version__ = "0.1.0"
