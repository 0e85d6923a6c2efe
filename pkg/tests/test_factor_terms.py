import random
from math import gcd

import pytest
from hypothesis import given, strategies as st

from escurves.errors import DegenerateTermError, DomainError, PreconditionError
from escurves.es_model import ApSolution
from escurves.factor_terms import (
    BULLETS,
    TermFactorization,
    bertrand_prime,
    bertrand_window_contradiction,
    check_term_invariants,
    count_trivial_ti,
    factor_terms,
    large_ai_distinct_check,
    multiplicity_check,
    n_bound_audit,
    square_forcing_index,
    ternary_identity,
)


def ap(n, d, k, l):
    return ApSolution(n, d, None, k, l)


def brute_gcd_gap(values):
    for i in range(len(values)):
        for j in range(i + 1, len(values)):
            if (j - i) % gcd(values[i], values[j]):
                return False
    return True


class TestFactorTerms:
    def test_one_one_five(self):
        terms = factor_terms(ap(1, 1, 5, 3))
        assert [t.a for t in terms] == [1, 2, 3, 4, 1]
        assert [t.rough for t in terms] == [1, 1, 1, 1, 5]
        assert not terms[4].exact_power and terms[4].t is None
        assert all(t.exact_power for t in terms[:4])

    def test_seven_two_three(self):
        terms = factor_terms(ap(7, 2, 3, 3))
        assert [t.value for t in terms] == [7, 15, 23]
        assert [t.a for t in terms] == [1, 1, 1]

    def test_degenerate(self):
        with pytest.raises(DegenerateTermError) as exc:
            factor_terms(ap(-2, 1, 5, 3))
        assert "2" in str(exc.value)


class TestInvariants:
    def test_speculative_product_fails(self):
        rep = check_term_invariants(factor_terms(ap(1, 1, 5, 3)), 5, 1, 3)
        assert rep.bullets["gcd_a_divides_gap"].passed
        assert rep.bullets["gcd_t_coprime"].passed
        assert rep.failed() == ["prod_a_power"]

    def test_gcd_a_d(self):
        rep = check_term_invariants(factor_terms(ap(7, 2, 3, 3)), 3, 2, 3)
        assert rep.bullets["gcd_a_d"].passed
        assert set(rep.bullets) == set(BULLETS)

    def test_tampered_factorization(self):
        terms = factor_terms(ap(1, 1, 5, 3))
        terms[2] = TermFactorization(2, 5, 1, 1, True)
        rep = check_term_invariants(terms, 5, 1, 3, n=1)
        assert not rep.bullets["factorization"].passed
        assert rep.bullets["factorization"].counterexample["i"] == 2

    @given(st.integers(-10**6, 10**6), st.integers(1, 40), st.integers(2, 40), st.sampled_from([2, 3, 5]))
    def test_unconditional_bullets(self, n, d, k, l):
        if gcd(n, d) != 1:
            return
        s = ap(n, d, k, l)
        if any(n + i * d**l == 0 for i in range(k)):
            return
        terms = factor_terms(s)
        rep = check_term_invariants(terms, k, d, l, n=n)
        for name in ("factorization", "a_prime_bound", "t_prime_bound", "gcd_a_divides_gap", "gcd_a_d"):
            assert rep.bullets[name].passed, name
        assert brute_gcd_gap([t.a for t in terms])

    def test_unconditional_bullets_seeded(self):
        rng = random.Random(5)
        done = 0
        while done < 10**4:
            n, d = rng.randint(-10**9, 10**9), rng.randint(1, 50)
            k, l = rng.randint(2, 40), rng.choice([2, 3, 5, 7])
            if gcd(n, d) != 1 or any(n + i * d**l == 0 for i in range(k)):
                continue
            rep = check_term_invariants(factor_terms(ap(n, d, k, l)), k, d, l, n=n)
            assert rep.failed() in ([], ["prod_a_power"], ["gcd_t_coprime"], ["gcd_t_coprime", "prod_a_power"])
            done += 1

    def test_gcd_bullet_matches_bruteforce(self):
        rng = random.Random(3)
        for _ in range(300):
            k = rng.randint(2, 30)
            vals = [rng.choice([1, 2, 3, 4, 6, 8, 9, 12]) for _ in range(k)]
            terms = [TermFactorization(i, v, 1, 1, True) for i, v in enumerate(vals)]
            rep = check_term_invariants(terms, max(k, 13), 1, 3, n=terms[0].value)
            assert rep.bullets["gcd_a_divides_gap"].passed == brute_gcd_gap(vals)


class TestTernary:
    def test_examples(self):
        assert tuple(ternary_identity(factor_terms(ap(1, 1, 5, 3)), 3, 1, 1, 3)) == (2, 2, True)
        assert tuple(ternary_identity(factor_terms(ap(7, 2, 3, 3)), 2, 0, 2, 3)) == (16, 16, True)

    def test_corrupted(self):
        terms = factor_terms(ap(1, 1, 5, 3))
        terms[3] = TermFactorization(3, 5, 1, 1, True)
        assert not ternary_identity(terms, 3, 1, 1, 3).equal

    def test_out_of_range(self):
        with pytest.raises(DomainError):
            ternary_identity(factor_terms(ap(1, 1, 5, 3)), 7, 1, 1, 3)


class TestTrivial:
    def test_examples(self):
        assert tuple(count_trivial_ti(factor_terms(ap(1, 1, 5, 3)), 5)) == (4, [0, 1, 2, 3])
        assert count_trivial_ti(factor_terms(ap(7, 2, 3, 3)), 3).count == 0

    def test_bertrand_steps(self):
        for k in range(4, 3000):
            p = bertrand_prime(k)
            assert p is not None and k / 2 < p < k
        assert bertrand_window_contradiction(20)
        assert not bertrand_window_contradiction(19)

    def test_square_forcing(self):
        terms = [TermFactorization(i, a, 1, 1, True) for i, a in enumerate([1, 49, 1, 1, 1, 1, 1, 1, 7, 1, 1, 1])]
        assert square_forcing_index(terms, 7, 3) == 1
        terms[1] = TermFactorization(1, 7, 1, 1, True)
        assert square_forcing_index(terms, 7, 3) is None

    @given(st.integers(1, 10**6))
    def test_cube_gap_inequality(self, m):
        assert (m + 1) ** 3 - m**3 >= m * m


class TestMultiplicity:
    def test_examples(self):
        terms = factor_terms(ap(1, 1, 5, 3))
        assert tuple(multiplicity_check(terms, 1, 5)) == (2, True)
        assert multiplicity_check(terms, 3, 5).r == 1

    def test_violating(self):
        terms = [TermFactorization(i, 4, 1, 1, True) for i in range(10)]
        assert not multiplicity_check(terms, 4, 10).bound_ok

    def test_random_consistent(self):
        rng = random.Random(11)
        for _ in range(10**4):
            k = rng.randint(3, 60)
            d = rng.randint(1, 30)
            n = rng.randint(-10**6, 10**6)
            if gcd(n, d) != 1 or any(n + i * d**3 == 0 for i in range(k)):
                continue
            terms = factor_terms(ap(n, d, k, 3))
            for alpha in {t.a for t in terms if t.a < k}:
                assert multiplicity_check(terms, alpha, k).bound_ok

    def test_alpha_range(self):
        with pytest.raises(DomainError):
            multiplicity_check(factor_terms(ap(1, 1, 5, 3)), 5, 5)


class TestDistinct:
    def test_vacuous(self):
        assert large_ai_distinct_check(factor_terms(ap(1, 1, 5, 3)), 5).ok
        assert large_ai_distinct_check(factor_terms(ap(7, 2, 3, 3)), 3).ok

    def test_synthetic(self):
        k = 4
        a = [1, 5, 1, 5]
        terms = [TermFactorization(i, v, 1, 1, True) for i, v in enumerate(a)]
        res = large_ai_distinct_check(terms, k)
        assert res == (False, (1, 3))
        # a_1 t_1^l - a_3 t_3^l = 0 but the identity wants -2 d^l
        assert not ternary_identity(terms, 1, 3, 1, 3).equal


class TestNBound:
    def test_examples(self):
        rep = n_bound_audit(ap(1, 1, 2, 3), factor_terms(ap(1, 1, 2, 3)))
        assert rep["cases"][0]["case"] == "a" and rep["cases"][0]["bound_holds"]
        rep = n_bound_audit(ap(1, 1, 5, 3), factor_terms(ap(1, 1, 5, 3)))
        assert rep["cases"][0] == {"case": "a", "pair": [0, 4], "bound_holds": True}

    def test_no_case(self):
        s = ap(7, 2, 3, 3)
        terms = [TermFactorization(i, a, 1, 1, True) for i, a in enumerate([1, 2, 3])]
        assert n_bound_audit(s, terms)["summary"] == "no case fired"

    def test_case_b(self):
        s = ap(10**30, 1, 7, 3)
        terms = [TermFactorization(i, a, 1, 1, True) for i, a in enumerate([2, 3, 4, 6, 5, 7, 11])]
        rep = n_bound_audit(s, terms)
        case = rep["cases"][0]
        assert case["case"] == "b" and not case["bound_holds"]

    def test_requires_cubes(self):
        with pytest.raises(PreconditionError):
            n_bound_audit(ap(1, 1, 5, 5), factor_terms(ap(1, 1, 5, 5)))
