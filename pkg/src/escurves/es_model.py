"""The curves y^l = x(x+1)...(x+k-1) and their rational points.

Covers exact membership, the known families of nontrivial points, bounded
search, and the passage between a nontrivial rational point and an integer
solution of prod_{i<k} (n + i d^l) = t^l.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, prod
from typing import NamedTuple

from .arith_core import as_fraction, is_prime, perfect_power_root
from .errors import (
    DomainError,
    PreconditionError,
    StructureError,
    ValidationError,
)


@dataclass(frozen=True)
class EsCurve:
    k: int
    l: int

    def __post_init__(self):
        if self.k < 2 or self.l < 2:
            raise DomainError(f"need k, l >= 2, got k={self.k}, l={self.l}")

    def rhs(self, x) -> Fraction:
        x = as_fraction(x)
        return prod((x + i for i in range(self.k)), start=Fraction(1))

    def __str__(self):
        return f"y^{self.l} = x(x+1)...(x+{self.k - 1})"


@dataclass(frozen=True, order=True)
class RationalPoint:
    x: Fraction
    y: Fraction

    @classmethod
    def of(cls, x, y) -> "RationalPoint":
        return cls(as_fraction(x), as_fraction(y))

    @property
    def is_trivial(self) -> bool:
        return self.y == 0

    def sort_key(self):
        return (self.x.denominator, self.x.numerator, self.y)


@dataclass(frozen=True)
class ApSolution:
    """Integers (n, d, t) for a progression of k terms with step d^l.

    ``validated`` is only ever set by :func:`validate_ap` or the
    transforms below, after the product equation was checked exactly.
    Unvalidated instances are speculative candidates.
    """

    n: int
    d: int
    t: int | None
    k: int
    l: int
    validated: bool = False

    @property
    def step(self) -> int:
        return self.d**self.l

    def terms(self) -> list[int]:
        return [self.n + i * self.step for i in range(self.k)]

    def product(self) -> int:
        return prod(self.terms())


def genus(curve: EsCurve) -> int:
    k, l = curve.k, curve.l
    twice = 2 + k * l - l - k - gcd(l, k)
    # the numerator is always even; keep the arithmetic exact anyway
    if twice % 2:
        raise AssertionError(f"odd genus numerator for {curve}")
    return twice // 2


def is_on_curve(curve: EsCurve, p: RationalPoint) -> bool:
    return p.y**curve.l == curve.rhs(p.x)


def trivial_points(curve: EsCurve) -> list[RationalPoint]:
    return [RationalPoint(Fraction(-i), Fraction(0)) for i in range(curve.k)]


class Catalog(NamedTuple):
    points: list
    diagnostic: str | None = None


def _odd_double_factorial_over_power(j: int) -> Fraction:
    return Fraction(prod(range(1, 2 * j, 2)), 2**j)


def sander_catalog(curve: EsCurve, param_bound: int = 10) -> Catalog:
    """Known nontrivial points of the curve, every one checked exactly.

    (2,2) is parametrized by integers a, b with 0 < |a|, |b| <= param_bound and
    a != +-b.  (2j, 2) contributes two points when j is even; when j is odd the
    same candidate pair lands on -y^2 = prod instead, which is reported in the
    diagnostic.
    """
    k, l = curve.k, curve.l
    found: set[RationalPoint] = set()
    diagnostic = None
    if (k, l) == (2, 2):
        rng = [v for v in range(-param_bound, param_bound + 1) if v]
        for a in rng:
            for b in rng:
                if a in (b, -b):
                    continue
                den = b * b - a * a
                found.add(RationalPoint(Fraction(a * a, den), Fraction(a * b, den)))
    elif l == 2 and k % 2 == 0:
        j = k // 2
        x = Fraction(1 - 2 * j, 2)
        y = _odd_double_factorial_over_power(j)
        if j % 2 == 0:
            found.update({RationalPoint(x, y), RationalPoint(x, -y)})
        elif -(y**2) == curve.rhs(x):
            diagnostic = (
                f"j={j} is odd: ({x}, +-{y}) satisfies -y^2 = x(x+1)...(x+{k - 1}), "
                "not the curve itself"
            )
        else:  # pragma: no cover - would contradict the algebra
            diagnostic = f"j={j}: candidate pair matches neither sign"
    elif (k, l) == (3, 3):
        found.update(
            {
                RationalPoint(Fraction(-4, 3), Fraction(2, 3)),
                RationalPoint(Fraction(-2, 3), Fraction(-2, 3)),
            }
        )
    bad = [p for p in found if not is_on_curve(curve, p)]
    if bad:
        raise AssertionError(f"catalog point off the curve: {bad[0]}")
    return Catalog(sorted(found, key=RationalPoint.sort_key), diagnostic)


def admissible_denominators(curve: EsCurve, denom_bound: int) -> list[int]:
    """Denominators q = m^(l/gcd(k,l)) <= denom_bound of nontrivial x-coordinates.

    Writing x = n/b and y = t/u in lowest terms forces b^k = u^l, hence
    v_p(b) is divisible by l/gcd(k,l) for every prime p.
    """
    e = curve.l // gcd(curve.k, curve.l)
    out = []
    m = 1
    while m**e <= denom_bound:
        out.append(m**e)
        m += 1
    return out


def _points_with_x(curve: EsCurve, x: Fraction) -> list[RationalPoint]:
    return _points_from_parts(curve, x, prod(x.numerator + i * x.denominator for i in range(curve.k)),
                              perfect_power_root(x.denominator**curve.k, curve.l))


def _points_from_parts(curve: EsCurve, x: Fraction, num: int, den_root) -> list[RationalPoint]:
    # num / q^k is already reduced because gcd(p + iq, q) = gcd(p, q) = 1
    if num == 0:
        return [RationalPoint(x, Fraction(0))]
    l = curve.l
    if den_root is None or (num < 0 and l % 2 == 0):
        return []
    root = perfect_power_root(num, l)
    if root is None:
        return []
    y = Fraction(root, den_root)
    if l % 2 == 0:
        return [RationalPoint(x, -y), RationalPoint(x, y)]
    return [RationalPoint(x, y)]


def search_shard(curve: EsCurve, denominators, numer_bound: int) -> list[RationalPoint]:
    """Scan x = p/q for the given denominators q and |p| <= numer_bound."""
    out = []
    k, l = curve.k, curve.l
    for q in denominators:
        den_root = perfect_power_root(q**k, l)
        for p in range(-numer_bound, numer_bound + 1):
            if gcd(p, q) != 1:
                continue
            num = 1
            for i in range(k):
                num *= p + i * q
            if num != 0 and den_root is None:
                continue
            out.extend(_points_from_parts(curve, Fraction(p, q), num, den_root))
    return out


def merge_points(parts) -> list[RationalPoint]:
    merged = {p for part in parts for p in part}
    return sorted(merged, key=RationalPoint.sort_key)


def search_points(curve: EsCurve, denom_bound: int, numer_bound: int) -> list[RationalPoint]:
    """All points with x = p/q, |p| <= numer_bound, q <= denom_bound.

    Only admissible denominators are scanned (see
    :func:`admissible_denominators`), which loses no points.  The result is
    complete within the bounds and nothing more.
    """
    if denom_bound < 1 or numer_bound < 1:
        raise DomainError("search bounds must be positive")
    qs = admissible_denominators(curve, denom_bound)
    return merge_points([search_shard(curve, qs, numer_bound)])


def _require_transform_curve(curve: EsCurve):
    if curve.l < 3 or not is_prime(curve.l):
        raise PreconditionError(f"l must be a prime >= 3, got {curve.l}")
    if gcd(curve.k, curve.l) != 1:
        raise PreconditionError(f"gcd(k, l) = gcd({curve.k}, {curve.l}) must be 1")


def point_from_triple(n: int, d: int, t: int, k: int, l: int) -> RationalPoint:
    """The algebraic map (n, d, t) -> (n/d^l, t/d^k), no membership check."""
    return RationalPoint(Fraction(n, d**l), Fraction(t, d**k))


def triple_from_point(p: RationalPoint, k: int, l: int) -> tuple[int, int, int]:
    """Inverse of :func:`point_from_triple` on points whose denominators fit.

    Raises :class:`StructureError` when the x-denominator is not an l-th power
    or the y-denominator is not the matching k-th power.
    """
    b, u = p.x.denominator, p.y.denominator
    d = perfect_power_root(b, l)
    if d is None:
        raise StructureError(f"denominator {b} of x is not a perfect {l}-th power")
    if u != d**k:
        raise StructureError(f"denominator {u} of y is not {d}^{k}")
    return p.x.numerator, d, p.y.numerator


def validate_ap(n: int, d: int, t: int, k: int, l: int) -> ApSolution:
    """Check prod (n + i d^l) = t^l exactly and return a validated solution."""
    cand = ApSolution(n, d, t, k, l)
    if d < 1:
        raise ValidationError(f"d must be positive, got {d}")
    if gcd(n, d) != 1:
        raise ValidationError(f"gcd(n, d) = {gcd(n, d)} != 1")
    value = cand.product()
    if t is None or t == 0 or value != t**l:
        raise ValidationError(
            f"product {value} of the progression is not {t}^{l}",
        )
    return ApSolution(n, d, t, k, l, validated=True)


def to_ap_solution(curve: EsCurve, p: RationalPoint) -> ApSolution:
    _require_transform_curve(curve)
    if p.y == 0:
        raise PreconditionError(f"({p.x}, 0) is a trivial point")
    if not is_on_curve(curve, p):
        raise ValidationError(f"({p.x}, {p.y}) is not on {curve}")
    n, d, t = triple_from_point(p, curve.k, curve.l)
    return validate_ap(n, d, t, curve.k, curve.l)


def from_ap_solution(s: ApSolution) -> tuple[EsCurve, RationalPoint]:
    curve = EsCurve(s.k, s.l)
    if not s.validated:
        s = validate_ap(s.n, s.d, s.t, s.k, s.l)
    point = point_from_triple(s.n, s.d, s.t, s.k, s.l)
    if not is_on_curve(curve, point):  # pragma: no cover - algebraic identity
        raise AssertionError("validated solution maps off the curve")
    return curve, point
