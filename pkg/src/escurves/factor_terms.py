"""Factorizations n + i d^l = a_i t_i^l and the per-term audits built on them.

Everything here runs on speculative data too: a candidate progression need
not have an l-th power product, in which case some rough parts are not
l-th powers and the corresponding t_i stay unset.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import NamedTuple

from .arith_core import (
    _primorial_below,
    factorize,
    perfect_power_root,
    prime_in_interval,
    primes_below,
    smooth_rough_split,
)
from .errors import AuditError, DegenerateTermError, DomainError, PreconditionError


@dataclass(frozen=True)
class TermFactorization:
    index: int
    a: int
    rough: int
    t: int | None
    exact_power: bool

    @property
    def value(self) -> int:
        return self.a * self.rough


BULLETS = (
    "factorization",
    "a_prime_bound",
    "t_prime_bound",
    "gcd_a_divides_gap",
    "gcd_a_d",
    "gcd_t_coprime",
    "prod_a_power",
)


@dataclass
class BulletResult:
    passed: bool
    counterexample: dict | None = None
    note: str | None = None


@dataclass
class InvariantReport:
    bullets: dict = field(default_factory=dict)

    @property
    def all_passed(self) -> bool:
        return all(b.passed for b in self.bullets.values())

    def failed(self) -> list[str]:
        return [name for name in BULLETS if not self.bullets[name].passed]

    def as_dict(self) -> dict:
        return {
            name: {
                "passed": b.passed,
                "counterexample": b.counterexample,
                "note": b.note,
            }
            for name, b in self.bullets.items()
        }


def _factor_one(i: int, value: int, k: int, l: int) -> TermFactorization:
    if value == 0:
        raise DegenerateTermError(i)
    a, z = smooth_rough_split(value, k) if k >= 2 else (1, value)
    root = None
    if z > 0 or l % 2:
        root = perfect_power_root(z, l)
    return TermFactorization(i, a, z, root, root is not None)


def factor_terms(s) -> list[TermFactorization]:
    """Split every term of the progression at k into smooth and rough parts.

    ``s`` is anything with ``n, d, k, l`` attributes, typically an
    :class:`~escurves.es_model.ApSolution`, validated or not.
    """
    step = s.d**s.l
    return [_factor_one(i, s.n + i * step, s.k, s.l) for i in range(s.k)]


def smooth_factorization(a: int, k: int) -> dict[int, int]:
    """Factor a positive integer whose primes are all below k."""
    out: dict[int, int] = {}
    if a == 1:
        return out
    for p in primes_below(k):
        if a % p == 0:
            e = 0
            while a % p == 0:
                a //= p
                e += 1
            out[p] = e
            if a == 1:
                return out
    raise AuditError(f"{a} has a prime factor >= {k}")


def gcd_gap_violation(values, k: int):
    """First pair (i, j) with gcd(b_i, b_j) not dividing j - i, or None.

    gcd(b_i, b_j) | (j - i) for every pair exactly when, for every prime
    power p^e, the indices i with p^e | b_i are all congruent mod p^e.
    That turns the pair scan into one pass over the factorizations.
    """
    first: dict[int, int] = {}
    found = None
    for i, b in enumerate(values):
        for p, e in smooth_factorization(b, k).items():
            q = 1
            for _ in range(e):
                q *= p
                j0 = first.setdefault(q, i)
                if (i - j0) % q:
                    cand = (j0, i)
                    if found is None or cand < found:
                        found = cand
    return found


def _infer_n(terms, d: int, l: int) -> int:
    t0 = terms[0]
    return t0.value - t0.index * d**l


def check_term_invariants(terms, k: int, d: int, l: int, n: int | None = None) -> InvariantReport:
    """Evaluate the seven factorization bullets and report each separately.

    ``n`` defaults to the first term's value. The pairwise bullets are
    checked in linear passes that find a counterexample exactly when the
    exhaustive pair scan would.
    """
    report = InvariantReport()
    b = report.bullets
    if n is None:
        n = _infer_n(terms, d, l)
    step = d**l

    bad = next((t for t in terms if t.value != n + t.index * step), None)
    if bad is None:
        bad = next(
            (t for t in terms if t.exact_power != (t.t is not None and t.t**l == t.rough)),
            None,
        )
    b["factorization"] = BulletResult(
        bad is None,
        None if bad is None else {"i": bad.index, "a": bad.a, "rough": bad.rough, "expected": n + bad.index * step},
    )

    primorial = _primorial_below(k) if k > 2 else 1
    bad = None
    for t in terms:
        try:
            smooth_factorization(t.a, k)
        except AuditError:
            bad = t
            break
    b["a_prime_bound"] = BulletResult(bad is None, None if bad is None else {"i": bad.index, "a": bad.a})

    bad = next((t for t in terms if gcd(t.rough, primorial) != 1), None)
    b["t_prime_bound"] = BulletResult(
        bad is None, None if bad is None else {"i": bad.index, "rough": bad.rough}
    )

    if b["a_prime_bound"].passed:
        pair = gcd_gap_violation([t.a for t in terms], k)
        b["gcd_a_divides_gap"] = BulletResult(
            pair is None,
            None if pair is None else {
                "i": pair[0], "j": pair[1],
                "gcd": gcd(terms[pair[0]].a, terms[pair[1]].a),
            },
        )
    else:
        pair = _gcd_gap_bruteforce([t.a for t in terms])
        b["gcd_a_divides_gap"] = BulletResult(
            pair is None,
            None if pair is None else {"i": pair[0], "j": pair[1]},
            note="quadratic scan: some a_i has a prime factor >= k",
        )

    bad = next((t for t in terms if gcd(t.a, d) != 1), None)
    b["gcd_a_d"] = BulletResult(bad is None, None if bad is None else {"i": bad.index, "gcd": gcd(bad.a, d)})

    pair = coprime_violation([(t.index, t.t) for t in terms if t.exact_power])
    missing = sum(1 for t in terms if not t.exact_power)
    b["gcd_t_coprime"] = BulletResult(
        pair is None,
        None if pair is None else {"i": pair[0], "j": pair[1]},
        note=f"{missing} term(s) without t_i skipped" if missing else None,
    )

    totals: Counter = Counter()
    for t in terms:
        try:
            totals.update(smooth_factorization(t.a, k))
        except AuditError:
            totals.update(_any_factorization(t.a))
    bad_p = next((p for p in sorted(totals) if totals[p] % l), None)
    b["prod_a_power"] = BulletResult(
        bad_p is None,
        None if bad_p is None else {"p": bad_p, "exponent": totals[bad_p]},
    )
    return report


def _any_factorization(a: int) -> dict[int, int]:
    return factorize(a) if a > 1 else {}


def _gcd_gap_bruteforce(values):
    for i in range(len(values)):
        for j in range(i + 1, len(values)):
            if (j - i) % gcd(values[i], values[j]):
                return (i, j)
    return None


def coprime_violation(indexed):
    """First (i, j) whose values share a factor, scanning with a running product."""
    running = 1
    seen = []
    for j, v in indexed:
        v = abs(v)
        if gcd(v, running) != 1:
            i = next(i for i, w in seen if gcd(v, w) != 1)
            return (i, j)
        running *= v
        seen.append((j, v))
    return None


class TernaryCheck(NamedTuple):
    lhs: int
    rhs: int
    equal: bool


def _lookup(terms, i: int) -> TermFactorization:
    if not 0 <= i < len(terms) or terms[i].index != i:
        raise DomainError(f"index {i} is out of range for {len(terms)} terms")
    return terms[i]


def ternary_identity(terms, i: int, j: int, d: int, l: int) -> TernaryCheck:
    """a_i t_i^l - a_j t_j^l against (i - j) d^l using the stored factorizations.

    Where t is unset the rough part stands in for t^l.
    """
    if i == j:
        raise DomainError("the identity needs two distinct indices")
    ti, tj = _lookup(terms, i), _lookup(terms, j)
    lhs = ti.a * _power_part(ti, l) - tj.a * _power_part(tj, l)
    rhs = (i - j) * d**l
    return TernaryCheck(lhs, rhs, lhs == rhs)


def _power_part(t: TermFactorization, l: int) -> int:
    return t.t**l if t.exact_power else t.rough


class TrivialCount(NamedTuple):
    count: int
    indices: list


def count_trivial_ti(terms, k: int, validated: bool = False) -> TrivialCount:
    """Indices with a_i < k and |t_i| = 1.

    With ``validated=True`` the count is asserted to be at most 20 once
    k >= 21, and an :class:`AuditError` is raised otherwise.
    """
    idx = [t.index for t in terms if t.a < k and t.exact_power and abs(t.t) == 1]
    if validated and k >= 21 and len(idx) > 20:
        raise AuditError(f"{len(idx)} trivial t_i on a validated solution with k={k}")
    return TrivialCount(len(idx), idx)


def bertrand_prime(k: int):
    """Smallest prime in the open interval (k/2, k)."""
    return prime_in_interval(Fraction(k, 2), k)


def square_forcing_index(terms, p: int, l: int):
    """An index i with p^2 | a_i, as forced when prod a_i is an l-th power.

    A prime p in (k/2, k) divides at most two terms. Returns None when no
    such a_i exists, which signals that the product is not an l-th power.
    """
    hits = [t for t in terms if t.a % p == 0]
    if len(hits) > 2 and 2 * p > len(terms):
        raise AuditError(f"prime {p} divides {len(hits)} terms")
    for t in hits:
        if t.a % (p * p) == 0:
            return t.index
    return None


def bertrand_window_contradiction(k: int) -> bool:
    """True when k^2/4 >= k + k^2/5, so p^2 > k^2/4 exceeds the term bound."""
    return Fraction(k * k, 4) >= k + Fraction(k * k, 5)


class MultiplicityResult(NamedTuple):
    r: int
    bound_ok: bool


def multiplicity_check(terms, alpha: int, k: int) -> MultiplicityResult:
    """r = #{i : a_i = alpha} against r <= k/alpha + 1."""
    if not 1 <= alpha < k:
        raise DomainError(f"need 1 <= alpha < k, got alpha={alpha}, k={k}")
    r = sum(1 for t in terms if t.a == alpha)
    return MultiplicityResult(r, r <= Fraction(k, alpha) + 1)


class DistinctResult(NamedTuple):
    ok: bool
    collision: tuple | None


def large_ai_distinct_check(terms, k: int) -> DistinctResult:
    seen: dict[int, int] = {}
    for t in terms:
        if t.a < k:
            continue
        if t.a in seen:
            return DistinctResult(False, (seen[t.a], t.index))
        seen[t.a] = t.index
    return DistinctResult(True, None)


def product_collision_indices(terms, cap: int):
    """First (i, j, r, s) with a_i a_j = a_r a_s over distinct values a < cap, or None."""
    firsts: dict[int, int] = {}
    for t in terms:
        if t.a < cap:
            firsts.setdefault(t.a, t.index)
    vals = sorted(firsts)
    seen: dict[int, tuple] = {}
    best = None
    for x in range(len(vals)):
        for y in range(x + 1, len(vals)):
            prod_ = vals[x] * vals[y]
            pair = (firsts[vals[x]], firsts[vals[y]])
            other = seen.get(prod_)
            if other is None:
                seen[prod_] = pair
            else:
                cand = other + pair
                if best is None or cand < best:
                    best = cand
    return best


N_BOUND_PAIR_LIMIT = 4000


def n_bound_audit(s, terms) -> dict:
    """Check the two |n| bounds that hold when the a_i repeat (l = 3).

    Case (a): some a_i = a_j, then |n| <= 2 k^{3/2} d^{9/2}.
    Case (b): some a_i a_j = a_r a_s with i not in {r, s}, then
    |n| <= 432 k^6 d^18. Both comparisons are exact (the first is squared).
    """
    if s.l != 3:
        raise PreconditionError(f"the |n| bounds are stated for l = 3, got l = {s.l}")
    k, d, n = s.k, s.d, abs(s.n)
    report: dict = {"cases": [], "n": n}
    firsts: dict[int, int] = {}
    equal = None
    for t in terms:
        if t.a in firsts:
            equal = (firsts[t.a], t.index)
            break
        firsts[t.a] = t.index
    if equal is not None:
        ok = n * n <= 4 * k**3 * d**9
        report["cases"].append({"case": "a", "pair": list(equal), "bound_holds": ok})
    distinct_small = sum(1 for a in firsts if a < k * k)
    if distinct_small > N_BOUND_PAIR_LIMIT:
        report["case_b_scan"] = f"skipped: {distinct_small} distinct a_i < k^2"
    else:
        coll = product_collision_indices(terms, k * k)
        report["case_b_scan"] = "done"
        if coll is not None:
            ok = n <= 432 * k**6 * d**18
            report["cases"].append({"case": "b", "indices": list(coll), "bound_holds": ok})
    if not report["cases"]:
        report["summary"] = "no case fired"
    else:
        report["summary"] = ", ".join(
            f"case {c['case']} {'holds' if c['bound_holds'] else 'FAILS'}" for c in report["cases"]
        )
    return report
