import random
from fractions import Fraction
from itertools import combinations
from math import factorial, gcd, prod

import pytest
from hypothesis import given, strategies as st

from escurves.arith_core import primes_below, sieve_primes
from escurves.combinatorics import (
    GcdHypothesis,
    erdos_subset,
    find_product_collision,
    gcd_dense_pairs,
    hypothesis_check,
    max_product_distinct,
    primitive_divisor_set,
    product_distinct_check,
)
from escurves.errors import DomainError, PreconditionError, ResourceError
from escurves.lemmas import random_smooth_ap


def brute_products(m):
    for i, j, r, s in ((i, j, r, s) for i, j in combinations(range(len(m)), 2)
                       for r, s in combinations(range(len(m)), 2) if (i, j) < (r, s)):
        if len({i, j, r, s}) == 4 and m[i] * m[j] == m[r] * m[s]:
            return False
    return True


def brute_primitive(eta, k):
    lo = eta * k
    return [m for m in range(1, k + 1) if m > lo and all(m % q or q <= lo for q in range(1, m))]


class TestErdosSubset:
    def test_examples(self):
        assert erdos_subset([1, 2, 3, 4]).indices == (0, 1)
        assert erdos_subset([1, 2, 3, 4, 1]).indices == (0, 1, 4)
        assert erdos_subset([1] * 9).indices == tuple(range(9))

    def test_preconditions(self):
        with pytest.raises(PreconditionError):
            erdos_subset([1, 7, 1])
        with pytest.raises(PreconditionError, match="gcd"):
            erdos_subset([2, 2, 1, 1])

    def test_random_smooth_aps(self):
        rng = random.Random(17)
        for _ in range(200):
            b = random_smooth_ap(rng, 200)
            k = len(b)
            S = erdos_subset(b).indices
            assert len(S) >= k - sieve_primes(max(k, 2)).pi
            assert factorial(k - 1) % prod(b[i] for i in S) == 0


class TestHypothesis:
    def test_theorem_constants(self):
        lhs, ok = hypothesis_check(GcdHypothesis(Fraction(229, 1000), Fraction(1, 17000), 283))
        assert ok and lhs < Fraction(114499, 10**6) < Fraction(1145, 10**4)

    def test_empty_product(self):
        assert tuple(hypothesis_check(GcdHypothesis(Fraction(9, 10), Fraction(1, 2), 1))) == (2, False)

    def test_larger_eta_fails(self):
        assert not hypothesis_check(GcdHypothesis(Fraction(229, 1000), Fraction(1, 1000), 283)).ok

    def test_domain(self):
        with pytest.raises(DomainError):
            GcdHypothesis(0, Fraction(1, 2), 3)


class TestPrimitiveDivisors:
    def test_example(self):
        assert primitive_divisor_set(Fraction(3, 10), 10) == [4, 5, 6, 7, 9]

    def test_eta_near_one(self):
        eta = Fraction(999, 1000)
        assert primitive_divisor_set(eta, 5000) == [m for m in range(1, 5001) if m > eta * 5000]

    @given(st.fractions(Fraction(1, 50), Fraction(49, 50)), st.integers(1, 150))
    def test_against_bruteforce(self, eta, k):
        assert primitive_divisor_set(eta, k) == brute_primitive(eta, k)

    def test_covering_exhaustive(self):
        rng = random.Random(2)
        for k in list(range(1, 400)) + [rng.randint(400, 10**4) for _ in range(15)] + [10**4]:
            eta = Fraction(rng.randint(1, 99), 100)
            D = primitive_divisor_set(eta, k)
            lo = eta * k
            for m in range(lo.numerator // lo.denominator + 1, k + 1):
                assert any(m % d == 0 for d in D)


class TestGcdPairs:
    def test_against_bruteforce(self):
        k = 200
        # (9/10, 1/40, 4) gives 11/24 > 9/20, so eta is lowered
        h = GcdHypothesis(Fraction(9, 10), Fraction(1, 100), 4)
        assert hypothesis_check(h).ok
        res = gcd_dense_pairs(list(range(1, k + 1)), h, k)
        brute = {(x, y) for x in range(1, k + 1) for y in range(1, k + 1) if x != y and gcd(x, y) > k * h.eta}
        assert res.pairs and all(p in brute for p in res.pairs)
        assert len(res.pairs) >= res.lower_bound

    def test_eta_one_fifth_never_admissible(self):
        # eta (A + 1) + prod(1 - 1/p) stays above 1/2 for every A once eta = 1/5
        for A in range(1, 60):
            assert not hypothesis_check(GcdHypothesis(Fraction(999, 1000), Fraction(1, 5), A)).ok
        with pytest.raises(PreconditionError):
            gcd_dense_pairs(list(range(1, 21)), GcdHypothesis(Fraction(9, 10), Fraction(1, 5), 1), 20)

    def test_gcd_exceeds_threshold(self):
        rng = random.Random(8)
        h = GcdHypothesis(Fraction(9, 10), Fraction(1, 100), 4)
        for _ in range(30):
            k = rng.randint(200, 3000)
            b = sorted(rng.sample(range(1, k + 1), -(-9 * k // 10)))
            res = gcd_dense_pairs(b, h, k)
            assert all(x != y and gcd(x, y) > h.eta * k for x, y in res.pairs)
            assert len(res.pairs) >= res.lower_bound

    def test_too_few(self):
        h = GcdHypothesis(Fraction(9, 10), Fraction(1, 100), 4)
        with pytest.raises(PreconditionError, match="fewer"):
            gcd_dense_pairs(list(range(1, 50)), h, 200)


class TestProducts:
    def test_examples(self):
        assert product_distinct_check([1, 2, 3, 5]).ok
        res = product_distinct_check([2, 3, 4, 6])
        i, j, r, s = res.collision
        m = [2, 3, 4, 6]
        assert not res.ok and m[i] * m[j] == m[r] * m[s] == 12
        assert product_distinct_check([1, 2, 3, 4]).ok

    def test_duplicates(self):
        with pytest.raises(PreconditionError):
            product_distinct_check([1, 2, 2])

    def test_against_bruteforce(self):
        rng = random.Random(4)
        for _ in range(150):
            T = rng.randint(2, 60 if _ % 10 == 0 else 14)
            m = sorted(rng.sample(range(1, 5 * T + 5), T))
            assert product_distinct_check(m).ok == brute_products(m)

    def test_primes_never_collide(self):
        p = list(primes_below(1000))
        assert find_product_collision(p, 1000, Fraction(1, 10)).collision is None

    def test_dense_random(self):
        rng = random.Random(9)
        for _ in range(20):
            m = sorted(rng.sample(range(1, 1001), 300))
            res = find_product_collision(m, 1000, Fraction(1, 10))
            i, j, r, s = res.collision
            assert len({i, j, r, s}) == 4 and m[i] * m[j] == m[r] * m[s]

    def test_cross_validation(self):
        rng = random.Random(10)
        for _ in range(100):
            m = sorted(rng.sample(range(1, 61), rng.randint(3, 20)))
            res = find_product_collision(m, 60, Fraction(1, 10))
            assert (res.collision is None) == product_distinct_check(m).ok

    def test_max_distinct(self):
        assert max_product_distinct(1) == 1
        assert max_product_distinct(4) == 4
        vals = [max_product_distinct(x) for x in range(1, 16)]
        assert vals == sorted(vals)

    def test_max_distinct_cap(self):
        with pytest.raises(ResourceError):
            max_product_distinct(31)
