"""Seeded property suites behind ``escurves lemmas``.

Each suite draws its inputs from ``random.Random(seed)``, checks a lemma
against an independent computation and returns a :class:`SuiteReport`.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import ceil, factorial, floor, gcd, prod

import numpy as np

from .arith_core import mertens_product, power_free_part, primes_below, smooth_rough_split
from .combinatorics import (
    GcdHypothesis,
    erdos_subset,
    find_product_collision,
    gcd_dense_pairs,
    hypothesis_check,
    product_distinct_check,
)
from .errors import PreconditionError
from .mordell import (
    add,
    canonical_height,
    cubes_to_mordell,
    is_torsion,
    mordell_curve,
    mordell_to_cubes,
    negate,
    search_points_naive,
    ternary_to_weierstrass,
    weil_height,
)

SELECTORS = ("erdos_subset", "gcd_pairs", "products", "heights", "substitutions")

THEOREM_HYPOTHESIS = GcdHypothesis(Fraction(229, 1000), Fraction(1, 17000), 283)


@dataclass
class SuiteReport:
    name: str
    trials: int = 0
    failures: int = 0
    lines: list = field(default_factory=list)
    examples: list = field(default_factory=list)  # first few failing inputs

    def fail(self, what):
        self.failures += 1
        if len(self.examples) < 5:
            self.examples.append(what)

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "trials": self.trials,
            "failures": self.failures,
            "lines": self.lines,
            "examples": [str(e) for e in self.examples],
        }


# -- erdos subset ------------------------------------------------------------


def random_smooth_ap(rng: random.Random, k_max: int = 500) -> list[int]:
    """Smooth parts (primes < k) of k consecutive terms of a random AP."""
    k = rng.randint(2, k_max)
    d = rng.randint(1, 50)
    n = rng.randint(1, 10**6)
    while gcd(n, d) != 1:
        n += 1
    return [smooth_rough_split(n + i * d, k)[0] for i in range(k)]


def check_erdos_subset(b) -> str | None:
    k = len(b)
    S = erdos_subset(b).indices
    if len(S) < k - len(primes_below(k)):
        return f"|S| = {len(S)} < k - pi(k) for k = {k}"
    if factorial(k - 1) % prod(b[i] for i in S):
        return f"product does not divide ({k}-1)!"
    return None


def suite_erdos_subset(trials: int, seed: int) -> SuiteReport:
    rng = random.Random(seed)
    rep = SuiteReport("erdos_subset")
    for _ in range(trials):
        b = random_smooth_ap(rng)
        err = check_erdos_subset(b)
        rep.trials += 1
        if err:
            rep.fail(err)
    rep.lines.append(f"|S| >= k - pi(k) and prod | (k-1)!: {rep.trials - rep.failures}/{rep.trials}")
    return rep


# -- gcd pairs ---------------------------------------------------------------


def theorem_constant_line() -> tuple[str, bool]:
    h = THEOREM_HYPOTHESIS
    lhs = h.eta * (h.A + 1) + mertens_product(h.A)
    ok = lhs < Fraction(114499, 10**6) < Fraction(1145, 10**4)
    approx = f"{float(lhs):.9f}"
    return (f"284/17000 + prod_(p<=283)(1-1/p) = {approx} < 0.114499 < 0.1145: "
            f"{'ok' if ok else 'FAIL'}"), ok


def random_hypothesis_instance(rng: random.Random, k_max: int = 5000):
    """A hypothesis (c, eta, A) that holds, k and a set of r >= ck integers."""
    while True:
        A = rng.choice([3, 4, 5, 6, 7, 10, 12])
        eta = Fraction(1, rng.randint(20, 400))
        lhs = hypothesis_check(GcdHypothesis(Fraction(1, 2), eta, A)).lhs
        if 2 * lhs < Fraction(99, 100):
            break
    c = 2 * lhs + (Fraction(99, 100) - 2 * lhs) * Fraction(rng.randint(0, 100), 100)
    h = GcdHypothesis(c, eta, A)
    k = rng.randint(100, k_max)
    r = rng.randint(ceil(c * k), k)
    b = sorted(rng.sample(range(1, k + 1), r))
    return h, k, b


def gcd_census(b, threshold) -> int:
    """Number of elements having some other element with gcd > threshold."""
    arr = np.asarray(b, dtype=np.int32)
    threshold = floor(threshold)  # gcds are integers
    hit = np.zeros(len(arr), dtype=bool)
    step = 512
    for lo in range(0, len(arr), step):
        g = np.gcd.outer(arr[lo:lo + step], arr)
        idx = np.arange(lo, min(lo + step, len(arr)))
        g[idx - lo, idx] = 0
        hit[lo:lo + step] = (g > threshold).any(axis=1)
    return int(hit.sum())


def check_gcd_pairs(h, k, b) -> str | None:
    res = gcd_dense_pairs(b, h, k)
    lo = h.eta * k
    members = set(b)
    for u, v in res.pairs:
        if u == v or u not in members or v not in members:
            return f"bad pair ({u}, {v})"
        if gcd(u, v) <= lo:
            return f"gcd({u}, {v}) <= eta k = {lo}"
    census = gcd_census(b, lo)
    if len(res.pairs) > census:
        return f"{len(res.pairs)} pairs exceed census {census}"
    if len(res.pairs) < res.lower_bound:
        return f"{len(res.pairs)} pairs below r - eta k - s = {res.lower_bound}"
    return None


def suite_gcd_pairs(trials: int, seed: int) -> SuiteReport:
    rng = random.Random(seed)
    rep = SuiteReport("gcd_pairs")
    line, ok = theorem_constant_line()
    rep.lines.append(line)
    if not ok:
        rep.fail("theorem constant")
    for _ in range(trials):
        h, k, b = random_hypothesis_instance(rng)
        rep.trials += 1
        err = check_gcd_pairs(h, k, b)
        if err:
            rep.fail((str(h.c), str(h.eta), h.A, k, err))
    rep.lines.append(f"pairs gcd > eta k, census >= pairs >= r - eta k - s: {rep.trials - rep.failures}/{rep.trials}")
    return rep


# -- products ----------------------------------------------------------------


def brute_product_collision_quartic(m) -> bool:
    T = len(m)
    for i, j, r, s in combinations(range(T), 4):
        if m[i] * m[j] == m[r] * m[s] or m[i] * m[r] == m[j] * m[s] or m[i] * m[s] == m[j] * m[r]:
            return True
    return False


def suite_products(trials: int, seed: int) -> SuiteReport:
    rng = random.Random(seed)
    rep = SuiteReport("products")
    for _ in range(trials):
        x = rng.randint(4, 200)
        T = rng.randint(1, min(x, 24))
        m = sorted(rng.sample(range(1, x + 1), T))
        rep.trials += 1
        chk = product_distinct_check(m)
        if chk.ok == brute_product_collision_quartic(m):
            rep.fail(("checker disagrees with brute force", m))
            continue
        found = find_product_collision(m, x, Fraction(1, 2))
        if found.collision is not None:
            i, j, r, s = found.collision
            if len({i, j, r, s}) != 4 or m[i] * m[j] != m[r] * m[s]:
                rep.fail(("false collision", m, found.collision))
        elif not chk.ok:
            rep.fail(("missed collision", m))
    rep.lines.append(f"collision search and checker agree with brute force: {rep.trials - rep.failures}/{rep.trials}")
    return rep


# -- heights -----------------------------------------------------------------


@lru_cache(maxsize=None)
def _curve_points(gamma: int, H: int):
    return tuple(search_points_naive(mordell_curve(gamma), H))


def suite_heights(trials: int, seed: int, tol: float = 1e-10) -> SuiteReport:
    rng = random.Random(seed)
    rep = SuiteReport("heights")
    worst_par = worst_quad = 0.0
    gammas = [g for g in range(-100, 101) if g]
    for _ in range(trials):
        gamma = rng.choice(gammas)
        E = mordell_curve(gamma)
        pts = [P for P in _curve_points(gamma, 300) if not P.is_infinity]
        rep.trials += 1
        if not pts:
            continue
        P, Q, R = (rng.choice(pts) for _ in range(3))
        if add(E, add(E, P, Q), R) != add(E, P, add(E, Q, R)):
            rep.fail(("associativity", gamma, P, Q, R))
        hP, hQ = canonical_height(E, P, tol), canonical_height(E, Q, tol)
        par = abs(canonical_height(E, add(E, P, Q), tol) + canonical_height(E, add(E, P, negate(Q)), tol)
                  - 2 * hP - 2 * hQ)
        worst_par = max(worst_par, par)
        if par > 100 * tol:
            rep.fail(("parallelogram", gamma, P, Q, par))
        if is_torsion(E, P):
            if hP != 0:
                rep.fail(("torsion height", gamma, P))
        else:
            quad = abs(canonical_height(E, add(E, P, P), tol) - 4 * hP)
            worst_quad = max(worst_quad, quad)
            if quad > 1e-8:
                rep.fail(("quadraticity", gamma, P, quad))
            if abs(weil_height(P) - hP) > 2 * (1 + abs(gamma)).bit_length():
                rep.fail(("height gap", gamma, P))
    rep.lines.append(f"associativity, parallelogram, torsion, quadraticity: {rep.trials - rep.failures}/{rep.trials}")
    rep.lines.append(f"max parallelogram defect {worst_par:.2e}, max quadraticity defect {worst_quad:.2e}")
    return rep


# -- substitutions -----------------------------------------------------------


@lru_cache(maxsize=None)
def _cube_roots_of_unity(m: int) -> tuple:
    return tuple(r for r in range(m) if (r**3 - 1) % m == 0)


def random_cube_difference(rng: random.Random):
    """(t_i, t_j, d, A0) with t_i^3 - t_j^3 = A0 d^3 and A0 != 0."""
    while True:
        d = rng.randint(1, 30)
        m = d**3
        tj = rng.randint(-1000, 1000)
        zeta = rng.choice(_cube_roots_of_unity(m))
        ti = (zeta * tj) % m + rng.randint(-3, 3) * m
        diff = ti**3 - tj**3
        if ti != tj and diff:
            return ti, tj, d, diff // m


@lru_cache(maxsize=None)
def _cubefree_upto(n: int) -> tuple:
    return tuple(v for v in range(1, n + 1) if power_free_part(v, 3)[1] == 1)


@lru_cache(maxsize=None)
def _cube_classes(A: int, m: int) -> dict:
    # residue r -> all x mod m with A x^3 = r (mod m)
    out: dict = {}
    for x in range(m):
        out.setdefault((A * x**3) % m, []).append(x)
    return out


def random_ternary(rng: random.Random):
    """(A, B, C, t_i, t_j, d) with A t_i^3 - B t_j^3 = C d^3, normalized."""
    cf = _cubefree_upto(60)
    while True:
        A, B = rng.choice(cf), rng.choice(cf)
        if gcd(A, B) != 1:
            continue
        d = rng.randint(1, 6)
        m = d**3
        tj = rng.randint(-300, 300)
        sols = _cube_classes(A, m).get((B * tj**3) % m)
        if not sols:
            continue
        ti = rng.choice(sols) + rng.randint(-2, 2) * m
        C = (A * ti**3 - B * tj**3) // m
        if C == 0:
            continue
        C, s = power_free_part(C, 3)
        d *= s
        if gcd(A, C) != 1 or gcd(B, C) != 1:
            continue
        return A, B, C, ti, tj, d


def check_cubes(ti, tj, d, A0) -> str | None:
    res = cubes_to_mordell(ti, tj, d, A0)
    A1, D = res.A0, -res.curve.b
    if res.V**2 != res.U**3 - 432 * A1**2:
        return "V^2 != U^3 - 432 A0^2"
    if res.Y**2 != res.X**3 - D:
        return "rescaled point off Y^2 = X^3 - D"
    if 432 * A1**2 != D * res.scale**6:
        return "scale bookkeeping"
    if mordell_to_cubes(res.U, res.V, A1) != (Fraction(ti, res.d), Fraction(tj, res.d)):
        return "inverse map"
    return None


def check_ternary(A, B, C, ti, tj, d) -> str | None:
    res = ternary_to_weierstrass(A, B, C, ti, tj, d)
    k = 0 if C % 2 == 0 else 1
    gamma = Fraction(2) ** (6 * k - 2) * (A * B * C) ** 2
    if res.kappa != k:
        return "kappa"
    if res.V**2 != res.U**3 + gamma:
        return "V^2 != U^3 + 2^(6k-2) (ABC)^2"
    if res.Y**2 != res.X**3 + res.gamma:
        return "rescaled point off the curve"
    return None


def suite_substitutions(trials: int, seed: int) -> SuiteReport:
    rng = random.Random(seed)
    rep = SuiteReport("substitutions")
    worked = [
        cubes_to_mordell(2, 1, 1, 7)[:2] == (84, 756),
        ternary_to_weierstrass(1, 1, 2, 1, -1, 1)[:2] == (-1, 0),
    ]
    if not all(worked):
        rep.fail("worked instances")
    rep.lines.append(f"worked instances (2,1,1,7) -> (84,756), (1,1,2)/(1,-1,1) -> (-1,0): {'ok' if all(worked) else 'FAIL'}")
    for _ in range(trials):
        rep.trials += 1
        tup = random_cube_difference(rng)
        try:
            err = check_cubes(*tup)
        except PreconditionError as exc:
            err = str(exc)
        if err:
            rep.fail((tup, err))
        tup = random_ternary(rng)
        try:
            err = check_ternary(*tup)
        except PreconditionError as exc:
            err = str(exc)
        if err:
            rep.fail((tup, err))
    rep.lines.append(f"both substitution identities on {rep.trials} tuples each: {rep.trials - rep.failures}/{rep.trials}")
    return rep


SUITES = {
    "erdos_subset": suite_erdos_subset,
    "gcd_pairs": suite_gcd_pairs,
    "products": suite_products,
    "heights": suite_heights,
    "substitutions": suite_substitutions,
}


def run_suites(selector: str, trials: int, seed: int) -> list[SuiteReport]:
    if selector == "all":
        names = SELECTORS
    elif selector in SUITES:
        names = (selector,)
    else:
        raise KeyError(selector)
    return [SUITES[n](trials, seed) for n in names]
