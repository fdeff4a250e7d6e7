import math
import random

import pytest

from shiubounds import arith
from shiubounds.errors import DomainError, IntervalRangeError


def trial_division(n):
    """Independent factorization oracle (never calls the library sieve)."""
    factors = []
    m = n
    d = 2
    while d * d <= m:
        e = 0
        while m % d == 0:
            m //= d
            e += 1
        if e:
            factors.append((d, e))
        d += 1
    if m > 1:
        factors.append((m, 1))
    return tuple(factors)


class TestSievePrimes:
    def test_small(self):
        assert arith.sieve_primes(10) == [2, 3, 5, 7]

    def test_boundary(self):
        assert arith.sieve_primes(2) == [2]

    def test_count_below_100(self):
        # oracle: trial division primality count
        expected = sum(1 for n in range(2, 101) if trial_division(n) == ((n, 1),))
        assert expected == 25
        assert len(arith.sieve_primes(100)) == expected

    def test_empty_domain(self):
        with pytest.raises(DomainError):
            arith.sieve_primes(1)


class TestFactorInterval:
    def test_documented_window(self):
        facs = arith.factor_interval(100, 5)
        assert [f.n for f in facs] == [100, 101, 102, 103, 104]
        assert facs[0].factors == ((2, 2), (5, 2))
        assert facs[1].factors == ((101, 1),)
        assert facs[2].factors == ((2, 1), (3, 1), (17, 1))
        assert facs[3].factors == ((103, 1),)
        assert facs[4].factors == ((2, 3), (13, 1))

    def test_unit(self):
        (f,) = arith.factor_interval(1, 1)
        assert f.n == 1 and f.factors == ()

    def test_against_trial_division_near_1e6(self):
        for f in arith.factor_interval(10**6, 10):
            assert f.factors == trial_division(f.n)

    def test_roundtrip_random_intervals(self):
        rng = random.Random(20260810)
        for _ in range(40):
            x = rng.randrange(1, 10**7)
            y = rng.randrange(1, 400)
            for f in arith.factor_interval(x, y):
                assert f.value() == f.n

    def test_segment_size_independence(self, monkeypatch):
        x, y = (1 << 16) - 5, 40  # straddles a segment boundary
        baseline = [f.factors for f in arith.factor_interval(x, y)]
        monkeypatch.setattr(arith, "SEGMENT_SIZE", 7)
        assert [f.factors for f in arith.factor_interval(x, y)] == baseline

    def test_range_check(self):
        with pytest.raises(IntervalRangeError):
            arith.factor_interval(2**63 - 10, 100)

    def test_bad_args(self):
        with pytest.raises(DomainError):
            arith.factor_interval(0, 5)
        with pytest.raises(DomainError):
            arith.factor_interval(5, 0)


class TestFactorizationType:
    def test_invariants_enforced(self):
        with pytest.raises(DomainError):
            arith.Factorization(6, ((3, 1), (2, 1)))  # not ascending
        with pytest.raises(DomainError):
            arith.Factorization(6, ((2, 0), (3, 1)))  # exponent < 1
        with pytest.raises(DomainError):
            arith.Factorization(7, ((2, 1), (3, 1)))  # wrong product

    def test_least_greatest(self):
        f60 = arith.factorize_small(60)
        assert arith.least_prime_factor(f60) == 2
        assert arith.greatest_prime_factor(f60) == 5
        f1 = arith.factorize_small(1)
        assert arith.least_prime_factor(f1) == math.inf
        assert arith.greatest_prime_factor(f1) == 1
        f101 = arith.factorize_small(101)
        assert arith.least_prime_factor(f101) == 101
        assert arith.greatest_prime_factor(f101) == 101

    def test_q_at_most_p_and_rough_factor_count(self):
        z = 10.0
        for f in arith.factor_interval(5000, 600):
            if f.n < 2:
                continue
            assert arith.least_prime_factor(f) <= arith.greatest_prime_factor(f)
            if arith.least_prime_factor(f) > z:
                omega = sum(e for _, e in f.factors)
                assert omega <= math.log(f.n) / math.log(z)


class TestSmoothRoughSplit:
    def test_documented(self):
        s, t = arith.smooth_rough_split(arith.factorize_small(60), 3.0)
        assert (s.n, t.n) == (12, 5)
        s, t = arith.smooth_rough_split(arith.factorize_small(101), 3.0)
        assert (s.n, t.n) == (1, 101)
        s, t = arith.smooth_rough_split(arith.factorize_small(8 * 3 * 47), 10.0)
        assert (s.n, t.n) == (24, 47)

    def test_exact_bijective_recombination(self):
        rng = random.Random(7)
        for _ in range(200):
            n = rng.randrange(1, 10**6)
            f = arith.factorize_small(n)
            threshold = rng.choice([2.0, 3.0, 7.5, 50.0])
            s, t = arith.smooth_rough_split(f, threshold)
            assert s.n * t.n == n
            assert s.factors + t.factors == f.factors
            assert all(p <= threshold for p, _ in s.factors)
            assert all(p > threshold for p, _ in t.factors)


class TestEulerPhi:
    def test_documented(self):
        assert arith.euler_phi(12) == 4
        assert arith.euler_phi(1) == 1
        assert arith.euler_phi(97) == 96

    def test_against_gcd_count(self):
        for k in range(1, 120):
            expected = sum(1 for a in range(k) if math.gcd(a, k) == 1)
            assert arith.euler_phi(k) == expected


class TestResidues:
    def test_documented(self):
        assert arith.residues_in_interval(100, 20, 5, 1) == [101, 106, 111, 116]
        assert arith.residues_in_interval(10, 10, 1, 0) == list(range(10, 20))
        # half-open window [100, 103) has no n ≡ 5 (mod 7); 103 is excluded
        assert arith.residues_in_interval(100, 3, 7, 5) == []

    def test_against_bruteforce(self):
        rng = random.Random(99)
        for _ in range(100):
            x = rng.randrange(1, 10**6)
            y = rng.randrange(1, 500)
            k = rng.randrange(1, 30)
            a = rng.randrange(0, k)
            expected = [n for n in range(x, x + y) if n % k == a]
            assert arith.residues_in_interval(x, y, k, a) == expected

    def test_zero_modulus(self):
        with pytest.raises(DomainError):
            arith.residues_in_interval(10, 10, 0, 0)


class TestAscendingProducts:
    def test_matches_bruteforce_3_smooth(self):
        got = [n for n, _ in arith.iter_products_ascending([2, 3], 500)]
        expected = sorted(
            n for n in range(1, 501)
            if all(p in (2, 3) for p, _ in trial_division(n))
        )
        assert got == expected

    def test_factors_are_valid(self):
        for n, factors in arith.iter_products_ascending([3, 5, 7], 2000):
            assert arith.Factorization(n, factors).n == n

    def test_empty_prime_list(self):
        assert list(arith.iter_products_ascending([], 100)) == [(1, ())]
