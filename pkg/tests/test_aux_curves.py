import random
from fractions import Fraction
from itertools import product

import mpmath
import pytest
from hypothesis import given, strategies as st

from escurves.aux_curves import (
    AuxCurve,
    enumerate_points,
    enumerate_points_full,
    exponent_within_sqrt_log,
    faltings_ln_ln_closed_form,
    faltings_log_bound,
    normalize,
    pairs_to_points,
    pigeonhole_group_cap,
)
from escurves.errors import DomainError, PreconditionError, ValidationError

F = Fraction


class TestNormalize:
    def test_strip_cubes(self):
        c = normalize(AuxCurve(8, 27, 5, 3))
        assert (c.A, c.B, c.C, c.normalized) == (1, 1, 5, True)
        assert (c.x_scale, c.y_scale) == (2, 3)

    def test_unchanged(self):
        c = normalize(AuxCurve(4, 9, 10, 3))
        assert (c.A, c.B, c.C) == (4, 9, 10)

    def test_gcd(self):
        c = normalize(AuxCurve(2, -2, 4, 5))
        assert (c.A, c.B, c.C) == (1, -1, 2)

    def test_zero(self):
        with pytest.raises(DomainError):
            AuxCurve(0, 1, 1, 3)

    @pytest.mark.parametrize("coeffs", [(8, 27, 35, 3), (16, -1, 81, 3), (-54, 2, 250, 3), (32, 1, 33, 5)])
    def test_point_maps_round_trip(self, coeffs):
        src = AuxCurve(*coeffs)
        dst = normalize(src)
        pts = enumerate_points(src, 6, 30)
        for X, Y in pts:
            mX, mY = dst.map_point(X, Y)
            assert dst.contains(mX, mY)
            assert dst.unmap_point(mX, mY) == (X, Y)


class TestEnumerate:
    def test_examples(self):
        assert (F(1), F(1)) in enumerate_points(AuxCurve(1, 1, 2, 3), 10, 50)
        assert enumerate_points(AuxCurve(1, 1, 1, 5), 10, 50) == [(F(0), F(1)), (F(1), F(0))]
        assert (F(2), F(-1)) in enumerate_points(AuxCurve(1, 1, 7, 3), 3, 10)

    def test_bounds(self):
        with pytest.raises(DomainError):
            enumerate_points(AuxCurve(1, 1, 2, 3), 0, 5)

    def test_against_oracle(self):
        vals = [v for v in range(-5, 6) if v]
        rng = random.Random(1)
        cases = [(a, b, c, l) for a, b, c in product(vals, repeat=3) for l in (3, 5)]
        for a, b, c, l in rng.sample(cases, 60) + [(1, 1, 2, 3), (1, -1, 1, 3), (2, 3, 5, 5)]:
            curve = AuxCurve(a, b, c, l)
            D, N = rng.randint(1, 6), rng.randint(1, 12)
            assert enumerate_points(curve, D, N) == enumerate_points_full(curve, D, N), (a, b, c, l)

    def test_all_on_curve(self):
        curve = AuxCurve(1, 1, 9, 3)
        pts = enumerate_points(curve, 30, 30)
        assert pts and all(curve.contains(*p) for p in pts)


class TestFaltings:
    def test_small_H(self):
        with mpmath.workdps(50):
            fb = faltings_log_bound(5, 1)
            L3 = mpmath.log(3)
            expected = mpmath.mpf(5) ** 625 * L3 * mpmath.log(L3)
            assert abs(fb.ln_bound / expected - 1) < mpmath.mpf(10) ** -40
            assert abs(fb.ln_ln_bound - faltings_ln_ln_closed_form(5, 1)) < mpmath.mpf(10) ** -40
        assert fb.log_base == "natural"

    def test_theorem_value(self):
        fb = faltings_log_bound(5, 17000)
        assert mpmath.nstr(fb.ln_ln_bound, 30) == "1009.15034554626636677268031838"

    def test_monotone(self):
        assert faltings_log_bound(5, 17000).ln_bound > faltings_log_bound(5, 1).ln_bound
        assert faltings_log_bound(7, 10).ln_ln_bound > faltings_log_bound(5, 10).ln_ln_bound

    def test_precision_stable(self):
        a = faltings_log_bound(5, 17000, dps=40).ln_ln_bound
        b = faltings_log_bound(5, 17000, dps=80).ln_ln_bound
        assert mpmath.nstr(a, 30) == mpmath.nstr(b, 30)

    @pytest.mark.parametrize("l", [2, 3, 4, 9])
    def test_precondition(self, l):
        with pytest.raises(PreconditionError):
            faltings_log_bound(l, 10)

    def test_sqrt_log_comparison(self):
        assert exponent_within_sqrt_log(5, 5**1250)
        assert exponent_within_sqrt_log(5, 5**1251)
        assert not exponent_within_sqrt_log(7, 5**1250)
        assert not exponent_within_sqrt_log(5, 5**1250 - 1)
        assert exponent_within_sqrt_log(5, mpmath.mpf(10) ** 1000)

    def test_sqrt_log_undecided(self):
        with mpmath.workprec(200):
            with pytest.raises(ValidationError):
                exponent_within_sqrt_log(5, mpmath.mpf(5) ** 1250)


class TestGrouping:
    def test_two_points(self):
        g = pairs_to_points([(2, 3, 1), (5, 7, 1)], (1, 1, None), 3)
        assert g.all_points == [(F(2), F(3)), (F(5), F(7))]
        assert g.distinct_asserted

    def test_identity_failure(self):
        with pytest.raises(ValidationError, match="pair 0"):
            pairs_to_points([(2, 3, 1, 1)], (1, 1, 5), 3)

    def test_duplicate_with_coprime_ts(self):
        with pytest.raises(AssertionError):
            pairs_to_points([(2, 3, 1), (2, 3, 1)], (1, 1, None), 3)

    def test_pigeonhole_on_synthetic(self):
        rng = random.Random(12)
        B = 17000
        pairs, coeffs = [], []
        for _ in range(400):
            ti, tj, d = rng.randint(2, 99), rng.randint(2, 99), rng.randint(1, 3)
            f, g = rng.randint(1, 3), rng.randint(1, 3)
            lhs = f * ti**3 - g * tj**3
            if lhs == 0:
                continue
            pairs.append((ti, tj, 1))
            coeffs.append((f, g, None))
        res = pairs_to_points(pairs, coeffs, 3)
        assert len(res.groups) <= pigeonhole_group_cap(B)
        assert len(res.largest_points) * pigeonhole_group_cap(B) >= len(pairs)
        assert len(res.largest_points) == max(len(v) for v in res.groups.values())
