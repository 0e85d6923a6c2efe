"""Curves A X^l + B Y^l = C: normalization, point enumeration, point grouping,
and the quantitative Faltings bound evaluated in log space."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import NamedTuple

import mpmath

from .arith_core import as_fraction, is_prime, perfect_power_root, power_free_part
from .errors import DomainError, PreconditionError, ValidationError


@dataclass(frozen=True)
class AuxCurve:
    A: int
    B: int
    C: int
    l: int
    normalized: bool = False
    # (X, Y) on the source curve maps to (x_scale X, y_scale Y) on this one
    x_scale: Fraction = Fraction(1)
    y_scale: Fraction = Fraction(1)

    def __post_init__(self):
        if 0 in (self.A, self.B, self.C):
            raise DomainError("coefficients must be nonzero")
        if self.l < 2:
            raise DomainError("exponent must be at least 2")

    @property
    def H(self) -> int:
        return max(abs(self.A), abs(self.B), abs(self.C))

    def contains(self, X, Y) -> bool:
        X, Y = as_fraction(X), as_fraction(Y)
        return self.A * X**self.l + self.B * Y**self.l == self.C

    def map_point(self, X, Y) -> tuple[Fraction, Fraction]:
        return self.x_scale * as_fraction(X), self.y_scale * as_fraction(Y)

    def unmap_point(self, X, Y) -> tuple[Fraction, Fraction]:
        return as_fraction(X) / self.x_scale, as_fraction(Y) / self.y_scale


def normalize(curve: AuxCurve) -> AuxCurve:
    """Divide out gcd(A, B, C) and strip l-th powers from each coefficient.

    A = A' u^l, B = B' v^l, C = C' w^l turns the equation into
    A' (uX/w)^l + B' (vY/w)^l = C', which fixes the recorded point map.
    """
    A, B, C, l = curve.A, curve.B, curve.C, curve.l
    g = gcd(gcd(A, B), C)
    A, B, C = A // g, B // g, C // g
    A, u = power_free_part(A, l)
    B, v = power_free_part(B, l)
    C, w = power_free_part(C, l)
    return AuxCurve(
        A, B, C, l, True,
        curve.x_scale * Fraction(u, w),
        curve.y_scale * Fraction(v, w),
    )


def _sort_key(pt):
    X, Y = pt
    return (max(X.denominator, Y.denominator), X, Y)


def enumerate_points(curve: AuxCurve, denom_bound: int, numer_bound: int) -> list[tuple]:
    """Affine points (p/q, r/q) with q <= denom_bound and |p|, |r| <= numer_bound.

    For each q and p the value r^l = (C q^l - A p^l) / B is solved exactly.
    Points at infinity are not counted.
    """
    if denom_bound < 1 or numer_bound < 1:
        raise DomainError("bounds must be positive")
    A, B, C, l = curve.A, curve.B, curve.C, curve.l
    found = set()
    for q in range(1, denom_bound + 1):
        cq = C * q**l
        for p in range(-numer_bound, numer_bound + 1):
            rest = cq - A * p**l
            if rest % B:
                continue
            rl = rest // B
            roots = _lth_roots(rl, l)
            for r in roots:
                if abs(r) <= numer_bound and gcd(gcd(p, r), q) == 1:
                    found.add((Fraction(p, q), Fraction(r, q)))
    return sorted(found, key=_sort_key)


def _lth_roots(n: int, l: int) -> list[int]:
    if n < 0 and l % 2 == 0:
        return []
    r = perfect_power_root(n, l)
    if r is None:
        return []
    if l % 2 == 0 and r != 0:
        return [-r, r]
    return [r]


def enumerate_points_full(curve: AuxCurve, denom_bound: int, numer_bound: int) -> list[tuple]:
    """Oracle mode: X = p/q, Y = r/s searched independently, then filtered to
    the same common-denominator box as :func:`enumerate_points`."""
    A, B, C, l = curve.A, curve.B, curve.C, curve.l
    xs = {Fraction(p, q) for q in range(1, denom_bound + 1) for p in range(-numer_bound * q, numer_bound * q + 1)}
    found = set()
    for X in xs:
        Yl = (C - A * X**l) / B
        if Yl < 0 and l % 2 == 0:
            continue
        num = perfect_power_root(Yl.numerator, l)
        den = perfect_power_root(Yl.denominator, l)
        if num is None or den is None:
            continue
        for Y in {Fraction(num, den), Fraction(-num, den)} if l % 2 == 0 else {Fraction(num, den)}:
            q = X.denominator * Y.denominator // gcd(X.denominator, Y.denominator)
            if q <= denom_bound and abs(X * q) <= numer_bound and abs(Y * q) <= numer_bound:
                found.add((X, Y))
    return sorted(found, key=_sort_key)


class FaltingsBound(NamedTuple):
    ln_bound: mpmath.mpf
    ln_ln_bound: mpmath.mpf
    log_base: str


def faltings_log_bound(l: int, H: int, dps: int = 50) -> FaltingsBound:
    """ln of exp(5^{l^4} log(3H) log log(3H)) and its own logarithm.

    Logs are natural. The bound itself is never formed; ln(bound) already
    has about l^4 * 0.7 decimal digits before the point.
    """
    if l < 5:
        raise PreconditionError(f"l = {l} < 5: the curve need not have genus >= 2")
    if not is_prime(l):
        raise PreconditionError(f"l = {l} is not prime")
    if H < 1:
        raise DomainError("H must be positive")
    with mpmath.workdps(dps):
        L3 = mpmath.log(3 * mpmath.mpf(H))
        ln_bound = mpmath.mpf(5) ** (l**4) * L3 * mpmath.log(L3)
        ln_ln = mpmath.log(ln_bound)
        return FaltingsBound(+ln_bound, +ln_ln, "natural")


def faltings_ln_ln_closed_form(l: int, H: int, dps: int = 50):
    """l^4 ln 5 + ln(ln 3H * ln ln 3H), for cross-checking."""
    with mpmath.workdps(dps):
        L3 = mpmath.log(3 * mpmath.mpf(H))
        return +(l**4 * mpmath.log(5) + mpmath.log(L3 * mpmath.log(L3)))


def exponent_within_sqrt_log(l: int, log_k) -> bool:
    """Decide 5^{l^4} <= sqrt(log k), i.e. l^4 ln 5 <= (1/2) ln(log k).

    ``log_k`` may be an exact integer or rational (possibly enormous, such
    as 5**1250) or an mpmath number. The comparison runs on interval
    enclosures of both logarithms. When they overlap and ``log_k`` is exact,
    it falls back to the integer comparison 25^{l^4} <= log_k.
    """
    exact = not isinstance(log_k, (mpmath.mpf, float))
    if exact:
        log_k = as_fraction(log_k)
        if log_k <= 0:
            raise DomainError("log k must be positive")
    prec = 128
    with mpmath.workprec(prec):
        iv = mpmath.iv
        old = iv.prec
        iv.prec = prec
        try:
            left = iv.mpf(l**4) * iv.log(iv.mpf(5))
            if exact:
                inner = iv.log(iv.mpf(log_k.numerator)) - iv.log(iv.mpf(log_k.denominator))
            else:
                inner = iv.log(iv.mpf(log_k))
            right = inner / 2
            if left.b < right.a:
                return True
            if left.a > right.b:
                return False
        finally:
            iv.prec = old
    if not exact:
        raise ValidationError("interval comparison undecided for an inexact log k")
    return Fraction(25) ** (l**4) <= log_k


class PointGrouping(NamedTuple):
    groups: dict  # (A, B, C) -> list of points
    largest: tuple | None
    largest_points: list
    all_points: list
    distinct_asserted: bool


def pigeonhole_group_cap(coeff_bound: int) -> int:
    """Number of sign/coefficient classes (f, -g, +-h) with entries in [1, coeff_bound]."""
    return 2 * coeff_bound**3


def pairs_to_points(pairs, coeffs, l: int) -> PointGrouping:
    """Group points (t_i/d, t_j/d) by the curve f X^l - g Y^l = +-h they lie on.

    ``pairs`` holds tuples (t_i, t_j, d) or (t_i, t_j, d, sign). ``coeffs``
    is one triple (f, g, h) for all pairs or a list with one per pair; a
    ``None`` entry for h is solved from the identity. Distinctness within a
    group is asserted whenever the t-values are pairwise coprime with
    |t| != 1.
    """
    pairs = list(pairs)
    if isinstance(coeffs, tuple) and len(coeffs) == 3 and not isinstance(coeffs[0], tuple):
        coeffs = [coeffs] * len(pairs)
    coeffs = list(coeffs)
    if len(coeffs) != len(pairs):
        raise DomainError("need one coefficient triple per pair")
    groups: dict = defaultdict(list)
    ts = []
    for n, (pair, (f, g, h)) in enumerate(zip(pairs, coeffs)):
        ti, tj, d = pair[:3]
        lhs = f * ti**l - g * tj**l
        dl = d**l
        if h is None:
            if lhs == 0 or lhs % dl:
                raise ValidationError(f"pair {n} {pair[:3]}: f t_i^l - g t_j^l = {lhs} is not a nonzero multiple of d^l")
            h = abs(lhs) // dl
        sign = pair[3] if len(pair) > 3 else (1 if lhs > 0 else -1)
        if lhs != sign * h * dl:
            raise ValidationError(f"pair {n} {pair[:3]}: {lhs} != {sign} * {h} * {d}^{l}")
        key = (f, -g, sign * h)
        groups[key].append((Fraction(ti, d), Fraction(tj, d)))
        ts.extend((ti, tj))
    distinct_pre = all(abs(t) != 1 for t in ts) and _pairwise_coprime_multiset(ts)
    if distinct_pre:
        for key, pts in groups.items():
            if len(set(pts)) != len(pts):
                raise AssertionError(f"duplicate point on curve {key} despite coprime t-values")
    groups = dict(sorted(groups.items()))
    all_points = sorted({p for pts in groups.values() for p in pts})
    if not groups:
        return PointGrouping({}, None, [], [], distinct_pre)
    largest = min(groups, key=lambda key: (-len(groups[key]), key))
    return PointGrouping(groups, largest, groups[largest], all_points, distinct_pre)


def _pairwise_coprime_multiset(ts) -> bool:
    # the same t may appear in several pairs; distinct values must be coprime
    vals = sorted({abs(t) for t in ts})
    running = 1
    for v in vals:
        if gcd(v, running) != 1:
            return False
        running *= v
    return True
