"""Log-domain accumulation helpers.

Bound cores routinely involve exp(prime sums) and rho(u)^C factors whose
linear values overflow or underflow float64, so sums and cores are carried
as logarithms.  Accumulation shifts by the maximum term and compensates the
mantissa sum with math.fsum, which keeps the result correctly rounded up to
the final log.
"""

from __future__ import annotations

import math

NEG_INF = float("-inf")

# exp() overflows just above this; used to clamp linear readings of log values.
_EXP_MAX = 709.0


def safe_exp(log_value: float) -> float:
    """exp() that saturates to inf / 0.0 instead of raising."""
    if log_value == NEG_INF:
        return 0.0
    if log_value > _EXP_MAX:
        return math.inf
    if log_value < -745.0:
        return 0.0
    return math.exp(log_value)


def log_sum_exp(log_terms) -> float:
    """log(sum(exp(t))) over an iterable of log-domain terms.

    Empty input (or all -inf) gives -inf, the log of an empty sum.
    """
    terms = [t for t in log_terms if t != NEG_INF]
    if not terms:
        return NEG_INF
    m = max(terms)
    if math.isinf(m):  # +inf dominates everything
        return m
    return m + math.log(math.fsum(math.exp(t - m) for t in terms))


def log_add(a: float, b: float) -> float:
    """log(exp(a) + exp(b)) without leaving the log domain."""
    if a == NEG_INF:
        return b
    if b == NEG_INF:
        return a
    if a < b:
        a, b = b, a
    return a + math.log1p(math.exp(b - a))


class LogAccumulator:
    """Collects nonnegative terms and reports their sum in both domains.

    Terms are stored as logs and reduced once at read time, so the result
    does not depend on insertion order beyond fsum's compensation.
    """

    __slots__ = ("_logs", "_count")

    def __init__(self):
        self._logs: list[float] = []
        self._count = 0

    def add(self, value: float) -> None:
        if value < 0.0:
            raise ValueError("LogAccumulator only accepts nonnegative terms")
        self._count += 1
        if value == 0.0:
            return
        self._logs.append(math.log(value))

    def add_log(self, log_value: float) -> None:
        self._count += 1
        if log_value != NEG_INF:
            self._logs.append(log_value)

    @property
    def count(self) -> int:
        return self._count

    def log_value(self) -> float:
        return log_sum_exp(self._logs)

    def linear_value(self) -> float:
        return safe_exp(self.log_value())
