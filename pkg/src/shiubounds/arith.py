"""Prime generation, segmented interval factorization, and elementary helpers.

The whole artifact runs off dense factorizations of short intervals
[x, x+y) near large x: a segmented sieve divides out every prime up to
sqrt(x+y) and whatever survives is a single prime cofactor.  Nothing here
factors arbitrary lone integers (no rho/ECM); ``factorize_small`` is trial
division for small moduli and test samples only.

All interval sums in the package use the half-open convention [x, x+y).
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from heapq import heappop, heappush

import numpy as np

from .errors import DomainError, IntervalRangeError

# All n must fit in uint64 arithmetic done with Python ints; this is the
# range-check bound for x + y.
MAX_SUPPORTED_N = 2**63 - 1

# Numbers per sieve segment.  Chosen for cache residency; results are
# independent of it (tested).
SEGMENT_SIZE = 1 << 16


@dataclass(frozen=True)
class Factorization:
    """An integer with its ascending (prime, exponent) list.

    n == 1 has an empty factor list.  Construction validates ordering,
    positivity of exponents, and that the factors multiply back to n.
    """

    n: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"factorization of nonpositive integer {self.n}")
        prod = 1
        prev = 1
        for p, e in self.factors:
            if p <= prev:
                raise DomainError(f"primes not strictly increasing in {self.factors}")
            if e < 1:
                raise DomainError(f"exponent {e} < 1 for prime {p}")
            prod *= p**e
            prev = p
        if prod != self.n:
            raise DomainError(f"factors {self.factors} do not multiply to {self.n}")

    def value(self) -> int:
        """Recompute n from the factor list (used by invariant tests)."""
        prod = 1
        for p, e in self.factors:
            prod *= p**e
        return prod


def least_prime_factor(f: Factorization) -> float:
    """q(n): least prime factor; +inf for n = 1 (keeps class rules total)."""
    if not f.factors:
        return math.inf
    return float(f.factors[0][0])


def greatest_prime_factor(f: Factorization) -> int:
    """p(n): greatest prime factor; 1 for n = 1."""
    if not f.factors:
        return 1
    return f.factors[-1][0]


class _PrimeCache:
    """Monotone-growing sieve cache shared by the whole package.

    Immutable once grown past a limit: the arrays for primes <= limit never
    change, so cached views are safe to share across threads/workers.
    ``recip_cumsum[i]`` is sum of 1/p over the first i+1 primes, kept for
    O(log) prefix queries of sum_{lo < p <= hi} 1/p.
    """

    def __init__(self):
        self.limit = 0
        self.primes = np.empty(0, dtype=np.int64)
        self.recip_cumsum = np.empty(0, dtype=np.float64)

    def ensure(self, limit: int) -> None:
        if limit <= self.limit:
            return
        limit = max(limit, 2 * self.limit, 1 << 10)
        sieve = np.ones(limit + 1, dtype=bool)
        sieve[:2] = False
        for p in range(2, math.isqrt(limit) + 1):
            if sieve[p]:
                sieve[p * p :: p] = False
        self.primes = np.flatnonzero(sieve).astype(np.int64)
        self.recip_cumsum = np.cumsum(1.0 / self.primes)
        self.limit = limit

    def upto(self, limit: int) -> np.ndarray:
        self.ensure(limit)
        cut = np.searchsorted(self.primes, limit, side="right")
        return self.primes[:cut]

    def count_upto(self, limit: float) -> int:
        if limit < 2:
            return 0
        self.ensure(int(limit))
        return int(np.searchsorted(self.primes, math.floor(limit), side="right"))

    def recip_sum_between(self, lo: float, hi: float) -> float:
        """sum of 1/p over primes with lo < p <= hi."""
        if hi < 2 or hi <= lo:
            return 0.0
        self.ensure(int(hi))
        i_hi = int(np.searchsorted(self.primes, math.floor(hi), side="right"))
        i_lo = int(np.searchsorted(self.primes, math.floor(max(lo, 0.0)), side="right"))
        if i_hi <= i_lo:
            return 0.0
        base = self.recip_cumsum[i_lo - 1] if i_lo > 0 else 0.0
        return float(self.recip_cumsum[i_hi - 1] - base)


PRIME_CACHE = _PrimeCache()


def sieve_primes(limit: int) -> list[int]:
    """All primes <= limit, ascending.

    limit < 2 is an empty domain and raises rather than returning [].
    """
    if limit < 2:
        raise DomainError(f"prime sieve needs limit >= 2, got {limit}")
    return PRIME_CACHE.upto(limit).tolist()


def prime_count(limit: float) -> int:
    """pi(limit), exact by sieve."""
    return PRIME_CACHE.count_upto(limit)


def factor_interval(x: int, y: int) -> list[Factorization]:
    """Factor every n in [x, x+y), in order, by segmented sieving.

    Multiples of each prime p <= sqrt(x+y-1) are divided out across the
    segment; a surviving cofactor > 1 is necessarily prime and is recorded
    with exponent 1.
    """
    if x < 1 or y < 1:
        raise DomainError(f"need x >= 1 and y >= 1, got x={x}, y={y}")
    hi = x + y
    if hi - 1 > MAX_SUPPORTED_N:
        raise IntervalRangeError(f"x + y = {hi} exceeds the supported integer width")

    root = math.isqrt(hi - 1)
    primes = PRIME_CACHE.upto(max(root, 2)).tolist() if hi - 1 >= 4 else []
    out: list[Factorization] = []
    for seg_lo in range(x, hi, SEGMENT_SIZE):
        seg_hi = min(seg_lo + SEGMENT_SIZE, hi)
        out.extend(_factor_segment(seg_lo, seg_hi, primes))
    return out


def _factor_segment(lo: int, hi: int, primes: list[int]) -> list[Factorization]:
    size = hi - lo
    rem = list(range(lo, hi))
    facs: list[list[tuple[int, int]]] = [[] for _ in range(size)]
    cap = math.isqrt(hi - 1)
    for p in primes:
        if p > cap:
            break
        start = lo + (-lo) % p
        for v in range(start, hi, p):
            i = v - lo
            r = rem[i]
            e = 0
            while r % p == 0:
                r //= p
                e += 1
            rem[i] = r
            facs[i].append((p, e))
    result = []
    for i in range(size):
        if rem[i] > 1:
            facs[i].append((rem[i], 1))
        result.append(Factorization(lo + i, tuple(facs[i])))
    return result


_INTERVAL_CACHE: dict[tuple[int, int], list[Factorization]] = {}
_INTERVAL_CACHE_CAP = 8


def factor_interval_cached(x: int, y: int) -> list[Factorization]:
    """factor_interval with a small FIFO cache.

    Grid scans hit the same (x, y) once per residue class and per function;
    callers must treat the returned list as read-only.
    """
    key = (x, y)
    hit = _INTERVAL_CACHE.get(key)
    if hit is not None:
        return hit
    value = factor_interval(x, y)
    if len(_INTERVAL_CACHE) >= _INTERVAL_CACHE_CAP:
        _INTERVAL_CACHE.pop(next(iter(_INTERVAL_CACHE)))
    _INTERVAL_CACHE[key] = value
    return value


def factorize_small(n: int) -> Factorization:
    """Trial-division factorization for small n (moduli, test samples)."""
    if n < 1:
        raise DomainError(f"cannot factor {n}")
    m = n
    factors = []
    d = 2
    while d * d <= m:
        if m % d == 0:
            e = 0
            while m % d == 0:
                m //= d
                e += 1
            factors.append((d, e))
        d += 1 if d == 2 else 2
    if m > 1:
        factors.append((m, 1))
    return Factorization(n, tuple(factors))


def smooth_rough_split(f: Factorization, threshold: float) -> tuple[Factorization, Factorization]:
    """Split n = s * t with every prime of s <= threshold < every prime of t.

    The split is exact and bijective on the factor list; threshold below 2
    simply makes s = 1.
    """
    s_factors = tuple((p, e) for p, e in f.factors if p <= threshold)
    t_factors = tuple((p, e) for p, e in f.factors if p > threshold)
    s = 1
    for p, e in s_factors:
        s *= p**e
    return Factorization(s, s_factors), Factorization(f.n // s, t_factors)


def euler_phi(k: int) -> int:
    """phi(k): count of residues mod k coprime to k."""
    if k < 1:
        raise DomainError(f"euler_phi needs k >= 1, got {k}")
    phi = k
    for p, _ in factorize_small(k).factors:
        phi = phi // p * (p - 1)
    return phi


def residues_in_interval(x: int, y: int, k: int, a: int) -> list[int]:
    """All n in [x, x+y) with n ≡ a (mod k), ascending.

    Coprimality of (a, k) is not enforced here; IntervalSpec owns that.
    """
    if k == 0:
        raise DomainError("modulus k = 0 has no residue classes")
    if k < 0 or not 0 <= a < k:
        raise DomainError(f"need 0 <= a < k, got a={a}, k={k}")
    start = x + (a - x) % k
    return list(range(start, x + y, k))


def iter_products_ascending(primes: list[int], limit: int):
    """Yield (n, factors) for every product of the given primes, ascending.

    Monotone priority expansion: each popped n spawns n*p for allowed p no
    smaller than n's largest prime, so every product appears exactly once
    and in increasing order.  Starts at (1, ()).
    """
    heap: list[tuple[int, int, tuple[tuple[int, int], ...]]] = [(1, 0, ())]
    while heap:
        n, i, factors = heappop(heap)
        yield n, factors
        for j in range(i, len(primes)):
            p = primes[j]
            m = n * p
            if m > limit:
                break
            if factors and factors[-1][0] == p:
                child = factors[:-1] + ((p, factors[-1][1] + 1),)
            else:
                child = factors + ((p, 1),)
            heappush(heap, (m, j, child))


def prime_factors_between(lo: float, hi: float) -> list[int]:
    """Primes p with lo < p <= hi, as plain ints."""
    if hi < 2:
        return []
    arr = PRIME_CACHE.upto(int(hi))
    i_lo = int(np.searchsorted(arr, math.floor(max(lo, 0.0)), side="right"))
    return arr[i_lo:].tolist()
