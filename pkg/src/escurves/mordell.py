"""Elliptic curves y^2 = x^3 + a x + b over Q.

Exact group law, naive and canonical heights, Nagell-Lutz torsion,
height-ball counts and the two substitutions that turn ternary cubic
equations into Mordell curves.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import ceil, gcd, isqrt, log
from typing import NamedTuple

import mpmath
import numpy as np

from .arith_core import as_fraction, factorize, power_free_part
from .errors import DomainError, PreconditionError, ResourceError

MAZUR_CAP = 16
MAX_TORSION_ORDER = 12


@dataclass(frozen=True)
class WeierstrassCurve:
    a: int
    b: int

    def __post_init__(self):
        if 4 * self.a**3 + 27 * self.b**2 == 0:
            raise DomainError(f"y^2 = x^3 + {self.a}x + {self.b} is singular")

    @property
    def disc(self) -> int:
        return -16 * (4 * self.a**3 + 27 * self.b**2)

    def rhs(self, x: Fraction) -> Fraction:
        return x**3 + self.a * x + self.b

    def __str__(self):
        parts = ["y^2 = x^3"]
        if self.a:
            parts.append(f"{'+' if self.a > 0 else '-'} {abs(self.a)}x")
        if self.b:
            parts.append(f"{'+' if self.b > 0 else '-'} {abs(self.b)}")
        return " ".join(parts)


@dataclass(frozen=True)
class CurvePoint:
    x: Fraction | None = None
    y: Fraction | None = None

    @classmethod
    def of(cls, x, y) -> "CurvePoint":
        return cls(as_fraction(x), as_fraction(y))

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def sort_key(self):
        if self.x is None:
            return (0, 0, 0, 0)
        return (1, self.x.denominator, self.x.numerator, self.y)

    def __str__(self):
        return "O" if self.x is None else f"({self.x}, {self.y})"


INFINITY = CurvePoint()


def mordell_curve(gamma: int) -> WeierstrassCurve:
    """y^2 = x^3 + gamma."""
    return WeierstrassCurve(0, gamma)


def quasi_minimal(curve: WeierstrassCurve) -> tuple[WeierstrassCurve, int]:
    """Remove every u with u^4 | a and u^6 | b; (x, y) -> (x/u^2, y/u^3)."""
    a, b = curve.a, curve.b
    u = 1
    primes = set()
    for n in (a, b):
        if n:
            primes.update(factorize(n))
    for p in sorted(primes):
        while (a % p**4 == 0) and (b % p**6 == 0):
            a //= p**4
            b //= p**6
            u *= p
    return WeierstrassCurve(a, b), u


def on_curve(curve: WeierstrassCurve, P: CurvePoint) -> bool:
    return P.is_infinity or P.y**2 == curve.rhs(P.x)


def _require(curve, *points):
    for P in points:
        if not on_curve(curve, P):
            raise DomainError(f"{P} is not on {curve}")


def negate(P: CurvePoint) -> CurvePoint:
    return P if P.is_infinity else CurvePoint(P.x, -P.y)


def _add(curve, P, Q):
    if P.is_infinity:
        return Q
    if Q.is_infinity:
        return P
    if P.x == Q.x:
        if P.y == -Q.y:
            return INFINITY
        lam = (3 * P.x**2 + curve.a) / (2 * P.y)
    else:
        lam = (Q.y - P.y) / (Q.x - P.x)
    x = lam * lam - P.x - Q.x
    return CurvePoint(x, lam * (P.x - x) - P.y)


def add(curve: WeierstrassCurve, P: CurvePoint, Q: CurvePoint) -> CurvePoint:
    _require(curve, P, Q)
    return _add(curve, P, Q)


def double(curve: WeierstrassCurve, P: CurvePoint) -> CurvePoint:
    _require(curve, P)
    return _add(curve, P, P)


def multiply(curve: WeierstrassCurve, n: int, P: CurvePoint) -> CurvePoint:
    _require(curve, P)
    if n < 0:
        n, P = -n, negate(P)
    R, S = INFINITY, P
    while n:
        if n & 1:
            R = _add(curve, R, S)
        S = _add(curve, S, S)
        n >>= 1
    return R


def naive_height(P: CurvePoint) -> int:
    # the point at infinity gets H = 1 by convention
    if P.is_infinity:
        return 1
    return max(abs(P.x.numerator), P.x.denominator)


def weil_height(P: CurvePoint) -> float:
    return log(naive_height(P))


def point_order(curve: WeierstrassCurve, P: CurvePoint, cap: int = MAX_TORSION_ORDER) -> int | None:
    """Exact order of P when it is at most ``cap``, otherwise None."""
    _require(curve, P)
    R = P
    for n in range(1, cap + 1):
        if R.is_infinity:
            return n
        R = _add(curve, R, P)
    return None


def is_torsion(curve: WeierstrassCurve, P: CurvePoint) -> bool:
    # Mazur: rational torsion has order at most 12
    return point_order(curve, P) is not None


# -- canonical height --------------------------------------------------------
#
# With F = X^4 - 2aX^2Z^2 - 8bXZ^3 + a^2Z^4 and G = 4Z(X^3 + aXZ^2 + bZ^3),
# x(2P) = F/G.  For D = 4a^3 + 27b^2 one has
#   f1 F - g1 G = 4D Z^7,   f2 F + g2 G = 4D X^7
# with the cubic forms below, so gcd(F, G) divides 4D at coprime (X, Z) and
# every term of the height series lies in [-log S, log Mx].


def _forms(a, b):
    F = (1, 0, -2 * a, -8 * b, a * a)
    G = (0, 4, 0, 4 * a, 4 * b)
    f1 = (0, 12, 0, 16 * a)
    g1 = (3, 0, -5 * a, -27 * b)
    f2 = (16 * a**3 + 108 * b**2, -4 * a * a * b, 12 * a**4 + 88 * a * b * b, 12 * a**3 * b + 96 * b**3)
    g2 = (a * a * b, 5 * a**4 + 32 * a * b * b, 26 * a**3 * b + 192 * b**3, -3 * a**5 - 24 * a * a * b * b)
    return F, G, (f1, g1), (f2, g2)


def _eval(coeffs, X, Z):
    n = len(coeffs) - 1
    return sum(c * X ** (n - i) * Z**i for i, c in enumerate(coeffs) if c)


def _l1(coeffs) -> int:
    return sum(abs(c) for c in coeffs)


def height_series_bound(curve: WeierstrassCurve) -> float:
    """K with |log mu_n - log c_n| <= K for every term of the series."""
    F, G, (f1, g1), (f2, g2) = _forms(curve.a, curve.b)
    S = max(_l1(f1) + _l1(g1), _l1(f2) + _l1(g2))
    Mx = max(_l1(F), _l1(G))
    return max(log(S), log(Mx), 1.0)


def canonical_height(curve: WeierstrassCurve, P: CurvePoint, tol: float = 1e-12,
                     max_terms: int = 400) -> float:
    """h(P) plus the telescoped corrections sum_n 4^-(n+1) (log mu_n - log c_n).

    Here (X_n, Z_n) are coprime with x(2^n P) = X_n / Z_n, mu_n is
    max(|F|, |G|) at the max-normalized real pair, and c_n = gcd(F, G) at
    (X_n, Z_n). Since c_n | 4D the exact pair is only needed modulo a power
    of 4D, so numbers never grow. Truncation after N terms costs at most
    K 4^-N / 3, which fixes N from ``tol``.
    """
    _require(curve, P)
    if tol <= 0:
        raise DomainError("tol must be positive")
    if is_torsion(curve, P):
        return 0.0
    K = height_series_bound(curve)
    N = max(1, ceil(log(3 * tol / K) / log(0.25))) if K * 0.25 / 3 >= tol else 1
    if N > max_terms:
        raise ResourceError(f"{N} terms needed for tol {tol}")
    F, G, _, _ = _forms(curve.a, curve.b)
    D4 = abs(4 * (4 * curve.a**3 + 27 * curve.b**2))
    M = D4 ** (N + 1)
    X, Z = P.x.numerator, P.x.denominator
    Xm, Zm = X % M, Z % M
    dps = 30 + int(-log(tol, 10)) + 2
    total = mpmath.mpf(0)
    with mpmath.workdps(dps):
        x = mpmath.mpf(X)
        z = mpmath.mpf(Z)
        s = max(abs(x), abs(z))
        x, z = x / s, z / s
        for n in range(N):
            fv, gv = _eval(F, x, z), _eval(G, x, z)
            mu = max(abs(fv), abs(gv))
            Fm, Gm = _eval(F, Xm, Zm) % M, _eval(G, Xm, Zm) % M
            c = gcd(gcd(Fm, Gm), D4)
            total += (mpmath.log(mu) - mpmath.log(c)) / mpmath.mpf(4) ** (n + 1)
            M //= c
            Xm, Zm = (Fm // c) % M, (Gm // c) % M
            s = max(abs(fv), abs(gv))
            x, z = fv / s, gv / s
        return float(mpmath.log(naive_height(P)) + total)


def canonical_height_by_doubling(curve: WeierstrassCurve, P: CurvePoint, n: int = 5) -> float:
    """h(2^n P) / 4^n with exact doubling; an independent but coarse estimate."""
    Q = P
    for _ in range(n):
        Q = _add(curve, Q, Q)
    if Q.is_infinity:
        return 0.0
    return float(mpmath.log(naive_height(Q)) / 4**n)


def height_pairing(curve: WeierstrassCurve, P: CurvePoint, Q: CurvePoint, tol: float = 1e-12) -> float:
    s = canonical_height(curve, add(curve, P, Q), tol)
    return (s - canonical_height(curve, P, tol) - canonical_height(curve, Q, tol)) / 2


# -- torsion -----------------------------------------------------------------


def _integer_roots_of_cubic(a: int, c: int) -> list[int]:
    """Integer roots of x^3 + a x + c by bisection on monotone segments."""
    def f(x):
        return x**3 + a * x + c

    R = 1 + max(abs(a), abs(c))
    cuts = [-R, R]
    if a < 0:
        # critical points at +-sqrt(-a/3)
        s = isqrt(-a // 3)
        cuts += [-s - 1, -s, s, s + 1]
    cuts = sorted(set(x for x in cuts if -R <= x <= R))
    roots = set()
    for lo, hi in zip(cuts, cuts[1:]):
        for x in (lo, hi):
            if f(x) == 0:
                roots.add(x)
        flo, fhi = f(lo), f(hi)
        if flo == fhi or (flo > 0) == (fhi > 0):
            continue
        up = fhi > flo
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if (f(mid) < 0) == up:
                lo = mid
            else:
                hi = mid
        for x in (lo, hi):
            if f(x) == 0:
                roots.add(x)
    return sorted(roots)


def _square_divisors(n: int) -> list[int]:
    """Positive y with y^2 | n."""
    ys = [1]
    for p, e in factorize(n).items():
        ys = [y * p**i for y in ys for i in range(e // 2 + 1)]
    return sorted(ys)


def torsion_points(curve: WeierstrassCurve) -> list[CurvePoint]:
    """The rational torsion subgroup via Nagell-Lutz candidates.

    Candidates are integral points with y = 0 or y^2 | 4a^3 + 27b^2. Each is
    kept only if its order is at most 12, and the set is checked to be
    closed under addition.
    """
    a, b = curve.a, curve.b
    D = abs(4 * a**3 + 27 * b**2)
    cands = [INFINITY]
    for y in [0] + _square_divisors(D):
        for x in _integer_roots_of_cubic(a, b - y * y):
            for yy in {y, -y}:
                cands.append(CurvePoint(Fraction(x), Fraction(yy)))
    tors = sorted({P for P in cands if is_torsion(curve, P)}, key=CurvePoint.sort_key)
    group = set(tors)
    for P, Q in itertools.product(tors, repeat=2):
        if _add(curve, P, Q) not in group:
            raise AssertionError(f"torsion set not closed: {P} + {Q}")
    if len(tors) > MAZUR_CAP:
        raise AssertionError(f"{len(tors)} torsion points exceeds the Mazur cap")
    return tors


# -- point search ------------------------------------------------------------


def search_points_naive(curve: WeierstrassCurve, H_bound: int) -> list[CurvePoint]:
    """All points with H(x) <= H_bound, plus the point at infinity.

    Rational points have x = m/e^2, y = n/e^3 in lowest terms, so it is
    enough to test m^3 + a m e^4 + b e^6 for squares with e^2 <= H_bound and
    |m| <= H_bound.
    """
    if H_bound < 1:
        raise DomainError("H_bound must be at least 1")
    a, b = curve.a, curve.b
    found = {INFINITY}
    ms = np.arange(-H_bound, H_bound + 1, dtype=np.int64)
    for e in range(1, isqrt(H_bound) + 1):
        e2, e4, e6 = e * e, e**4, e**6
        worst = H_bound**3 + abs(a) * H_bound * e4 + abs(b) * e6
        if worst < 2**62:
            vals = ms**3 + a * ms * e4 + b * e6
            ok = vals >= 0
            roots = np.floor(np.sqrt(np.where(ok, vals, 0).astype(np.float64))).astype(np.int64)
            hit = np.zeros_like(ok)
            for shift in (-1, 0, 1):
                r = roots + shift
                hit |= ok & (r >= 0) & (r * r == vals)
            cand = [int(m) for m in ms[hit]]
        else:
            cand = []
            for m in range(-H_bound, H_bound + 1):
                v = m**3 + a * m * e4 + b * e6
                if v >= 0 and isqrt(v) ** 2 == v:
                    cand.append(m)
        for m in cand:
            if gcd(m, e) != 1:
                continue
            n = isqrt(m**3 + a * m * e4 + b * e6)
            x = Fraction(m, e2)
            for y in {Fraction(n, e**3), Fraction(-n, e**3)}:
                found.add(CurvePoint(x, y))
    out = sorted(found, key=CurvePoint.sort_key)
    assert all(on_curve(curve, P) for P in out)
    return out


def height_gap(curve: WeierstrassCurve, points, tol: float = 1e-10) -> float:
    """max |h(P) - h^(P)| over the given affine points."""
    gap = 0.0
    for P in points:
        if not P.is_infinity:
            gap = max(gap, abs(weil_height(P) - canonical_height(curve, P, tol)))
    return gap


# -- rank and height balls ---------------------------------------------------


def _gram(curve, pts, heights, tol):
    n = len(pts)
    G = mpmath.matrix(n, n)
    for i in range(n):
        G[i, i] = heights[i]
        for j in range(i):
            s = canonical_height(curve, _add(curve, pts[i], pts[j]), tol)
            G[i, j] = G[j, i] = (s - heights[i] - heights[j]) / 2
    return G


def independent_points(curve: WeierstrassCurve, points, tol: float = 1e-6,
                       height_tol: float = 1e-12) -> list[CurvePoint]:
    """Greedy basis: add points in height order while det(Gram) stays > tol."""
    _require(curve, *points)
    cands = []
    for P in sorted(set(points), key=CurvePoint.sort_key):
        if P.is_infinity or is_torsion(curve, P):
            continue
        cands.append((canonical_height(curve, P, height_tol), P))
    cands.sort(key=lambda hp: (hp[0], hp[1].sort_key()))
    basis: list = []
    hs: list = []
    for h, P in cands:
        trial = basis + [P]
        if mpmath.det(_gram(curve, trial, hs + [h], height_tol)) > tol:
            basis, hs = trial, hs + [h]
    return basis


def rank_lower_bound(curve: WeierstrassCurve, points, tol: float = 1e-6) -> int:
    return len(independent_points(curve, points, tol))


@dataclass(frozen=True)
class HeightBallQuery:
    H: float
    L: float
    r: int

    def __post_init__(self):
        if self.H <= 0 or self.L <= 0:
            raise DomainError("H and L must be positive")
        if self.r < 0:
            raise DomainError("rank must be nonnegative")
        if self.r >= 1 and self.H < self.L:
            raise PreconditionError(f"H = {self.H} < L = {self.L} with rank {self.r}")


class BallCount(NamedTuple):
    count: int
    bound_nac: float
    bound_prop: float
    nac_ok: bool
    prop_ok: bool


def ball_bounds(q: HeightBallQuery) -> tuple[float, float]:
    ratio = mpmath.mpf(q.H) / q.L
    nac = 16 * (1 + 2 * mpmath.sqrt(ratio)) ** q.r
    prop = 16 * (9 * ratio) ** (mpmath.mpf(q.r) / 2)
    return float(nac), float(prop)


def count_height_ball(curve: WeierstrassCurve, q: HeightBallQuery, points,
                      tol: float = 1e-10) -> BallCount:
    """Count the given points with h^ <= H and test both ball bounds.

    ``points`` must already be exhaustive for the ball; see
    :func:`height_ball_points`.
    """
    pts = set(points)
    _require(curve, *pts)
    # small slack so that H = h^(P) counts P despite rounding
    slack = 10 * tol
    count = sum(1 for P in pts if P.is_infinity or canonical_height(curve, P, tol) <= q.H + slack)
    nac, prop = ball_bounds(q)
    return BallCount(count, nac, prop, count <= nac, count <= prop)


def height_ball_points(curve: WeierstrassCurve, basis, H: float, H_bound: int = 2000,
                       tol: float = 1e-10) -> list[CurvePoint]:
    """Naive-search points, torsion, and T + sum n_i B_i with n^T G n <= H."""
    pts = set(search_points_naive(curve, H_bound)) | set(torsion_points(curve))
    tors = torsion_points(curve)
    if basis:
        hs = [canonical_height(curve, B, tol) for B in basis]
        G = _gram(curve, list(basis), hs, tol)
        lam_min = float(min(np.linalg.eigvalsh(np.array(G.tolist(), dtype=float))))
        reach = int(mpmath.floor(mpmath.sqrt(H / lam_min))) + 1
        for ns in itertools.product(range(-reach, reach + 1), repeat=len(basis)):
            v = mpmath.matrix(ns)
            if (v.T * G * v)[0] > H * (1 + 1e-9):
                continue
            S = INFINITY
            for n_i, B in zip(ns, basis):
                S = _add(curve, S, multiply(curve, n_i, B))
            for T in tors:
                pts.add(_add(curve, S, T))
    return sorted(pts, key=CurvePoint.sort_key)


class BallReport(NamedTuple):
    curve: WeierstrassCurve
    r: int
    L: float
    rows: list  # (multiple of L, BallCount)


def ball_census(curve: WeierstrassCurve, multiples=(1, 2, 5), H_bound: int = 2000,
                L: float | None = None, tol: float = 1e-10) -> BallReport:
    """Height-ball counts at H = m L for a curve, with r and L found empirically.

    L defaults to the least positive canonical height among the searched
    points, or 1 when none is found.
    """
    found = search_points_naive(curve, H_bound)
    basis = independent_points(curve, found)
    r = len(basis)
    if L is None:
        positive = [canonical_height(curve, P, tol) for P in found
                    if not P.is_infinity and not is_torsion(curve, P)]
        L = min(positive) if positive else 1.0
    rows = []
    top = max(multiples) * L
    pts = height_ball_points(curve, basis, top, H_bound, tol)
    for m in multiples:
        q = HeightBallQuery(m * L, L, r)
        rows.append((m, count_height_ball(curve, q, pts, tol)))
    return BallReport(curve, r, L, rows)


# -- substitutions -----------------------------------------------------------


class MordellMap(NamedTuple):
    U: Fraction
    V: Fraction
    X: Fraction
    Y: Fraction
    curve: WeierstrassCurve
    A0: int
    d: int
    scale: int  # (X, Y) = (U / scale^2, V / scale^3)
    injective: bool


def cubes_to_mordell(t_i: int, t_j: int, d: int, A0: int) -> MordellMap:
    """Send t_i^3 - t_j^3 = A0 d^3 to V^2 = U^3 - 432 A0^2, then strip 2^6 and 3^6.

    Cubes in A0 are folded into d first so A0 is cubefree. The map
    (t_i, t_j) -> (U, V) is injective for fixed A0 and d, and
    :func:`mordell_to_cubes` inverts it.
    """
    if t_i == t_j:
        raise PreconditionError("t_i = t_j")
    if d < 1 or A0 == 0:
        raise PreconditionError("need d >= 1 and A0 != 0")
    if t_i**3 - t_j**3 != A0 * d**3:
        raise PreconditionError(f"{t_i}^3 - {t_j}^3 != {A0} * {d}^3")
    A0, s = power_free_part(A0, 3)
    d *= s
    U = Fraction(12 * A0 * d, t_i - t_j)
    V = Fraction(36 * A0 * (t_i + t_j), t_i - t_j)
    D = 432 * A0 * A0
    if V * V != U**3 - D:
        raise PreconditionError("substitution identity failed")
    scale = 1
    for p in (2, 3):
        while D % p**6 == 0:
            D //= p**6
            scale *= p
    X, Y = U / scale**2, V / scale**3
    curve = WeierstrassCurve(0, -D)
    if Y * Y != curve.rhs(X):  # pragma: no cover - algebra
        raise AssertionError("rescaled point off the curve")
    back = mordell_to_cubes(U, V, A0)
    injective = back == (Fraction(t_i, d), Fraction(t_j, d))
    return MordellMap(U, V, X, Y, curve, A0, d, scale, injective)


def mordell_to_cubes(U, V, A0: int) -> tuple[Fraction, Fraction]:
    """(t_i/d, t_j/d) = ((36 A0 + V) / 6U, (V - 36 A0) / 6U)."""
    U, V = as_fraction(U), as_fraction(V)
    return (36 * A0 + V) / (6 * U), (V - 36 * A0) / (6 * U)


class WeierstrassMap(NamedTuple):
    U: Fraction
    V: Fraction
    X: Fraction
    Y: Fraction
    gamma: int
    curve: WeierstrassCurve
    kappa: int
    divided: bool


def _cubefree(n: int) -> bool:
    return power_free_part(n, 3)[1] == 1


def ternary_to_weierstrass(A: int, B: int, C: int, t_i: int, t_j: int, d: int) -> WeierstrassMap:
    """Send A t_i^3 - B t_j^3 = C d^3 to V^2 = U^3 + 2^(6k-2) (ABC)^2.

    k = 0 when C is even and 1 otherwise. When k = 1 and 2^6 divides the
    constant, (U, V) -> (U/4, V/8) removes it.
    """
    if d < 1:
        raise PreconditionError("d must be positive")
    if 0 in (A, B, C):
        raise PreconditionError("coefficients must be nonzero")
    if A * t_i**3 - B * t_j**3 != C * d**3:
        raise PreconditionError(f"{A}*{t_i}^3 - {B}*{t_j}^3 != {C}*{d}^3")
    if gcd(A, B) != 1 or gcd(B, C) != 1 or gcd(A, C) != 1:
        raise PreconditionError("A, B, C must be pairwise coprime")
    if not (_cubefree(A) and _cubefree(B) and _cubefree(C)):
        raise PreconditionError("A, B, C must be cubefree")
    kappa = 0 if C % 2 == 0 else 1
    two = Fraction(2)
    x = Fraction(t_i, d)
    V = two ** (2 * kappa) * A * B * (two**kappa * A * x**3 - two ** (kappa - 1) * C)
    U = two ** (2 * kappa) * A * B * Fraction(t_i * t_j, d * d)
    g = two ** (6 * kappa - 2) * (A * B * C) ** 2
    if V * V != U**3 + g:
        raise PreconditionError("substitution identity failed")
    gamma = int(g)
    X, Y, divided = U, V, False
    if kappa == 1 and gamma % 64 == 0:
        X, Y, gamma, divided = U / 4, V / 8, gamma // 64, True
    if power_free_part(gamma, 6)[1] != 1:
        raise AssertionError(f"gamma = {gamma} has a sixth-power factor")
    return WeierstrassMap(U, V, X, Y, gamma, mordell_curve(gamma), kappa, divided)

