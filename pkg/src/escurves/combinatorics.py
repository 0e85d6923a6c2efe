"""Erdos-style combinatorial constructions.

Subsets whose product divides (k-1)!, pairs with large gcd in dense sets,
and sets whose pairwise products are all distinct.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import NamedTuple

from .arith_core import as_fraction, mertens_product
from .errors import AuditError, DomainError, PreconditionError, ResourceError
from .factor_terms import gcd_gap_violation, smooth_factorization


# -- subsets dividing (k-1)! ------------------------------------------------


class ErdosSubset(NamedTuple):
    indices: tuple
    removed: dict  # prime -> removed index


def erdos_subset(b) -> ErdosSubset:
    """Indices S with prod_{i in S} b_i | (k-1)!, where k = len(b).

    For every prime p < k that divides some b_i, drop the smallest index
    among those maximizing v_p(b_i).
    """
    k = len(b)
    if k < 2:
        raise DomainError("need at least two integers")
    best: dict[int, tuple] = {}
    for i, v in enumerate(b):
        if v < 1:
            raise PreconditionError(f"b_{i} = {v} is not positive")
        try:
            fac = smooth_factorization(v, k)
        except AuditError as exc:
            raise PreconditionError(f"b_{i} = {v}: {exc}") from None
        for p, e in fac.items():
            if p not in best or e > best[p][0]:
                best[p] = (e, i)
    pair = gcd_gap_violation(b, k)
    if pair is not None:
        i, j = pair
        raise PreconditionError(
            f"gcd(b_{i}, b_{j}) = {gcd(b[i], b[j])} does not divide {j - i}"
        )
    removed = {p: best[p][1] for p in sorted(best)}
    drop = set(removed.values())
    return ErdosSubset(tuple(i for i in range(k) if i not in drop), removed)


# -- gcd density ------------------------------------------------------------


@dataclass(frozen=True)
class GcdHypothesis:
    c: Fraction
    eta: Fraction
    A: Fraction

    def __post_init__(self):
        for name in ("c", "eta", "A"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        if not (0 < self.c < 1 and 0 < self.eta < 1):
            raise DomainError("c and eta must lie in (0, 1)")
        if self.A < 1:
            raise DomainError("A must be at least 1")


class HypothesisValue(NamedTuple):
    lhs: Fraction
    ok: bool


def hypothesis_check(h: GcdHypothesis) -> HypothesisValue:
    """Exact value of eta(A+1) + prod_{p<=A}(1-1/p) and whether it is <= c/2."""
    prod_ = mertens_product(h.A) if h.A >= 2 else Fraction(1)
    lhs = h.eta * (h.A + 1) + prod_
    return HypothesisValue(lhs, lhs <= h.c / 2)


def _smallest_prime_factors(k: int) -> list[int]:
    spf = list(range(k + 1))
    i = 2
    while i * i <= k:
        if spf[i] == i:
            for m in range(i * i, k + 1, i):
                if spf[m] == m:
                    spf[m] = i
        i += 1
    return spf


def primitive_divisor_set(eta, k: int) -> list[int]:
    """Integers in (eta k, k] all of whose proper divisors are <= eta k."""
    eta = as_fraction(eta)
    if not 0 < eta < 1:
        raise DomainError(f"eta must lie in (0, 1), got {eta}")
    if k < 1:
        raise DomainError("k must be positive")
    lo = eta * k
    spf = _smallest_prime_factors(k)
    out = []
    for m in range(lo.numerator // lo.denominator + 1, k + 1):
        # the largest proper divisor of m is m / spf(m); 1 has none
        if m == 1 or m // spf[m] <= lo:
            out.append(m)
    return out


def largest_divisor_map(D, k: int) -> dict[int, int]:
    """m -> largest element of D dividing m, for every multiple m <= k."""
    f: dict[int, int] = {}
    for d in sorted(D, reverse=True):
        for m in range(d, k + 1, d):
            f.setdefault(m, d)
    return f


class GcdPairs(NamedTuple):
    pairs: list
    lower_bound: Fraction  # r - eta k - s
    s: int
    small_k: bool


def gcd_dense_pairs(b, h: GcdHypothesis, k: int) -> GcdPairs:
    """Ordered pairs (b_i, b_j) of distinct elements with gcd > eta k.

    Each b in (eta k, k] is sent to the largest element of the primitive
    divisor set dividing it. Every b whose image is shared is paired with
    the smallest other b having the same image. ``small_k`` is set when
    fewer than (c/3)k pairs came out, as can happen below the unspecified
    threshold on k.
    """
    lhs, ok = hypothesis_check(h)
    if not ok:
        raise PreconditionError(f"hypothesis fails: {lhs} > c/2 = {h.c / 2}")
    vals = sorted(set(b))
    if len(vals) != len(b):
        raise PreconditionError("the integers must be distinct")
    if vals and (vals[0] < 1 or vals[-1] > k):
        raise PreconditionError(f"integers must lie in [1, {k}]")
    r = len(vals)
    if r < h.c * k:
        raise PreconditionError(f"only {r} integers, fewer than c k = {h.c * k}")
    D = primitive_divisor_set(h.eta, k)
    f = largest_divisor_map(D, k)
    lo = h.eta * k
    groups: dict[int, list] = {}
    for v in vals:
        if v > lo:
            groups.setdefault(f[v], []).append(v)
    pairs = []
    for v in vals:
        if v <= lo:
            continue
        g = groups[f[v]]
        if len(g) < 2:
            continue
        partner = g[0] if g[0] != v else g[1]
        pairs.append((v, partner))
    bound = r - lo - len(D)
    return GcdPairs(pairs, bound, len(D), len(pairs) < h.c * k / 3)


# -- distinct products ------------------------------------------------------


def _require_increasing(m):
    for x, y in zip(m, m[1:]):
        if x == y:
            raise PreconditionError(f"duplicate value {x}")
        if x > y:
            raise PreconditionError("values must be strictly increasing")
    if m and m[0] < 1:
        raise PreconditionError("values must be positive")


class ProductCheck(NamedTuple):
    ok: bool
    collision: tuple | None  # indices (i, j, r, s) with m_i m_j = m_r m_s


def product_distinct_check(m) -> ProductCheck:
    """Whether m_i m_j (i < j) are pairwise distinct over unordered pairs.

    On failure returns the lexicographically first pair (i, j) whose product
    is shared, together with the smallest other pair (r, s) sharing it.
    """
    m = list(m)
    _require_increasing(m)
    seen: dict[int, tuple] = {}
    best = None
    for i in range(len(m)):
        for j in range(i + 1, len(m)):
            p = m[i] * m[j]
            other = seen.get(p)
            if other is None:
                seen[p] = (i, j)
            elif best is None or other < best[0]:
                best = (other, (i, j))
    if best is None:
        return ProductCheck(True, None)
    return ProductCheck(False, best[0] + best[1])


def _is_collision(m, c) -> bool:
    i, j, r, s = c
    return len({i, j, r, s}) == 4 and m[i] * m[j] == m[r] * m[s]


class CollisionSearch(NamedTuple):
    collision: tuple | None
    method: str  # "pipeline", "checker" or "none"
    diagnostics: dict


def _pipeline_attempt(m, x: int, eta: Fraction, index: dict):
    D = primitive_divisor_set(eta, x)
    f = largest_divisor_map(D, x)
    lo = eta * x
    groups: dict[int, list] = {}
    for v in m:
        if v > lo:
            groups.setdefault(f[v], []).append(v)
    # disjoint pairs sharing a primitive divisor, so gcd > eta x
    used: set = set()
    S = []
    for g in groups.values():
        free = [v for v in g if v not in used]
        for u, v in zip(free[::2], free[1::2]):
            S.append((u, v))
            used.update((u, v))
    S.sort()
    quotients: dict[tuple, tuple] = {}
    for u, v in S:
        g = gcd(u, v)
        key = (u // g, v // g)
        if key in quotients:
            u2, v2 = quotients[key]
            # u/g = u2/g2 and v/g = v2/g2 give u v2 = u2 v
            return (index[u2], index[v], index[u], index[v2]), len(D), len(S)
        quotients[key] = (u, v)
    return None, len(D), len(S)


def find_product_collision(m, x: int, delta, eta=Fraction(1, 10)) -> CollisionSearch:
    """Look for m_i m_j = m_r m_s through large-gcd pairs and a quotient pigeonhole.

    Disjoint pairs (u, v) with gcd(u, v) > eta x have quotient pairs
    (u/g, v/g) below 1/eta, so enough of them force two pairs with equal
    quotients. When that fails, eta is halved until eta x drops below 1.
    The answer is always checked against :func:`product_distinct_check`,
    which supplies the collision if the pipeline found none.
    """
    m = list(m)
    _require_increasing(m)
    if m and m[-1] > x:
        raise PreconditionError(f"values must be <= x = {x}")
    delta = as_fraction(delta)
    eta = as_fraction(eta)
    index = {v: i for i, v in enumerate(m)}
    diag: dict = {"size": len(m), "dense": len(m) > delta * x, "attempts": []}
    found = None
    while eta * x >= 1 and found is None:
        found, s, npairs = _pipeline_attempt(m, x, eta, index)
        diag["attempts"].append({"eta": str(eta), "D_size": s, "disjoint_pairs": npairs})
        eta /= 2
    check = product_distinct_check(m)
    if found is not None:
        if not _is_collision(m, found) or check.ok:
            raise AssertionError(f"pipeline produced a false collision {found}")
        return CollisionSearch(found, "pipeline", diag)
    if not check.ok:
        diag["note"] = "pipeline found nothing; collision taken from the checker"
        return CollisionSearch(check.collision, "checker", diag)
    return CollisionSearch(None, "none", diag)


MAX_EXHAUSTIVE_X = 30


def max_product_distinct(x: int) -> int:
    """Largest T with {m_1 < ... < m_T} in [1, x] product-distinct, by branch and bound."""
    if x < 1:
        raise DomainError("x must be positive")
    if x > MAX_EXHAUSTIVE_X:
        raise ResourceError(f"exhaustive search is capped at x = {MAX_EXHAUSTIVE_X}")
    best = 0
    chosen: list[int] = []
    products: set[int] = set()

    def extend(start: int):
        nonlocal best
        if len(chosen) > best:
            best = len(chosen)
        for v in range(start, x + 1):
            if len(chosen) + (x - v + 1) <= best:
                return
            new = [v * c for c in chosen]
            if any(p in products for p in new):
                continue
            chosen.append(v)
            products.update(new)
            extend(v + 1)
            products.difference_update(new)
            chosen.pop()

    extend(1)
    return best
