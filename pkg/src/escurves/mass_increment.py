"""Auditor for the mass increment argument on a list of term factorizations.

Given terms n + i d^l = a_i t_i^l (possibly hypothetical), the auditor fixes
the index set I, then replays the chain

    spark:        #{i in I : a_i < k} >= 0.3 k / log k
    accumulation: |A| >= (delta0 + 1/2000) k / log k
    increment:    #{i in I : a_i < k} >= (delta0 + 1/1000) k / log k

for delta0 = 0.29, 0.29 + 1/2000, ... up to 0.23 log k. Here A is the set of
values alpha < k taken by exactly one a_i with i in I. When accumulation
fails the collision pipeline runs and produces pairs with
t_i^l - t_j^l = A_0 d^l.

Comparisons against k / log k are certified with interval arithmetic.
"""
from __future__ import annotations

from collections import Counter
from contextlib import contextmanager
from functools import lru_cache
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

import mpmath

from .arith_core import _primorial_below
from .combinatorics import erdos_subset
from .errors import AuditError, PreconditionError
from .factor_terms import count_trivial_ti, smooth_factorization

SPARK = Fraction(3, 10)
DELTA_START = Fraction(29, 100)
DELTA_STEP = Fraction(1, 2000)
INCREMENT_GAIN = Fraction(1, 1000)
DENSITY_FACTOR = Fraction(23, 100)
ETA_FLOOR = Fraction(131, 100)
TRIVIAL_CAP = 20
TRIVIAL_CONTRIBUTION_CAP = 420


@contextmanager
def iv_precision(prec: int):
    """Temporarily set the working precision (bits) of mpmath's interval context."""
    old = mpmath.iv.prec
    mpmath.iv.prec = prec
    try:
        yield mpmath.iv
    finally:
        mpmath.iv.prec = old


def _raw_fraction(raw) -> Fraction:
    # raw mpf tuple (sign, mantissa, exponent, bitcount), read without rounding
    sign, man, exp, _ = raw
    value = Fraction(man) * Fraction(2) ** exp
    return -value if sign else value


@lru_cache(maxsize=256)
def log_enclosure(k: int, prec: int = 120) -> tuple[Fraction, Fraction]:
    """Rationals lo <= log k <= hi from an outward-rounded interval."""
    with iv_precision(prec):
        lg = mpmath.iv.log(mpmath.iv.mpf(k))
        lo, hi = lg._mpi_
        return _raw_fraction(lo), _raw_fraction(hi)


def _decide(holds_lo: bool, holds_hi: bool):
    # the same inequality evaluated at both ends of the enclosure
    if holds_lo == holds_hi:
        return holds_lo
    return None


def compare_scaled(count, coeff: Fraction, k: int) -> bool:
    """Certified test of count >= coeff * k / log k, i.e. count log k >= coeff k."""
    prec = 120
    while prec <= 8000:
        lo, hi = log_enclosure(k, prec)
        verdict = _decide(count * lo >= coeff * k, count * hi >= coeff * k)
        if verdict is not None:
            return verdict
        prec *= 2
    raise AuditError(f"could not separate {count} log {k} from {coeff} {k}")


def _le_log_bound(coeff: Fraction, k: int) -> bool:
    """Certified test of coeff <= 0.23 log k."""
    prec = 120
    while prec <= 8000:
        lo, hi = log_enclosure(k, prec)
        verdict = _decide(coeff <= DENSITY_FACTOR * lo, coeff <= DENSITY_FACTOR * hi)
        if verdict is not None:
            return verdict
        prec *= 2
    raise AuditError("could not decide the delta0 range")


def numeric_constant_checks(places: int = 12) -> dict:
    """The two numeric facts behind the spark and increment steps.

    Values are enclosed in intervals at well over ``places`` digits and
    the comparisons are decided on the enclosures.
    """
    with iv_precision(4 * places + 80):
        two_log_two = 2 * mpmath.iv.log(2)
        x = mpmath.iv.mpf("1.77")
        inc = x * mpmath.iv.log(x)
        lim1 = mpmath.iv.mpf("1.31")
        lim2 = mpmath.iv.mpf("1.01")
        ok1 = two_log_two.a > lim1.b
        ok2 = inc.a >= lim2.b
    fmt = f"{{:.{places}f}}"
    return {
        "two_log_two": {"value": fmt.format(float(two_log_two.mid)), "bound": "1.31", "ok": bool(ok1)},
        "increment_constant": {"value": fmt.format(float(inc.mid)), "bound": "1.01", "ok": bool(ok2)},
    }


@dataclass
class Round:
    delta0: Fraction
    small: int
    distinct: int
    A_size: int
    R: int
    accumulation_ok: bool
    increment_ok: bool | None
    factorial_chain_ok: bool | None


@dataclass
class MassIncrementTrace:
    k: int
    l: int
    I: tuple
    small: int
    distinct: int
    A_size: int
    R: int
    R_bound: dict
    spark_ok: bool
    rounds: list = field(default_factory=list)
    broken: str | None = None
    collision: dict | None = None
    density: dict | None = None
    notes: list = field(default_factory=list)

    def consistent(self) -> bool:
        return self.small + self.R == len(self.I) and self.A_size <= self.distinct <= self.small

    def as_dict(self, max_rounds: int = 6) -> dict:
        rounds = self.rounds
        if len(rounds) > max_rounds:
            rounds = rounds[: max_rounds // 2] + rounds[-(max_rounds // 2):]
        return {
            "k": self.k,
            "l": self.l,
            "I_size": len(self.I),
            "I_excluded": [i for i in range(self.k) if i not in set(self.I)],
            "small": self.small,
            "distinct": self.distinct,
            "A_size": self.A_size,
            "R": self.R,
            "R_bound": self.R_bound,
            "spark_ok": self.spark_ok,
            "rounds_run": len(self.rounds),
            "rounds": [
                {
                    "delta0": str(r.delta0),
                    "small": r.small,
                    "distinct": r.distinct,
                    "A_size": r.A_size,
                    "R": r.R,
                    "accumulation_ok": r.accumulation_ok,
                    "increment_ok": r.increment_ok,
                    "factorial_chain_ok": r.factorial_chain_ok,
                }
                for r in rounds
            ],
            "broken": self.broken,
            "collision": self.collision,
            "density": self.density,
            "consistent_counts": self.consistent(),
            "notes": self.notes,
        }


def validate_terms(terms, k: int, l: int):
    """Per-term consistency the auditor relies on; raises AuditError."""
    primorial = _primorial_below(k) if k > 2 else 1
    for pos, t in enumerate(terms):
        if t.index != pos:
            raise AuditError(f"term at position {pos} carries index {t.index}")
        if t.a < 1:
            raise AuditError(f"a_{t.index} = {t.a} is not positive")
        if t.exact_power and t.t**l != t.rough:
            raise AuditError(f"t_{t.index}^{l} != rough part at index {t.index}")
        try:
            smooth_factorization(t.a, k)
        except AuditError:
            raise AuditError(f"a_{t.index} = {t.a} has a prime factor >= {k}") from None
        if gcd(t.rough, primorial) != 1:
            raise AuditError(f"rough part at index {t.index} has a prime factor < {k}")


def _rising_vs_factorial(k: int, R: int, small_floor: int = 0) -> bool:
    """floor! * k (k+1) ... (k+R-1) <= k!, compared through log-gamma."""
    with mpmath.workdps(40):
        lhs = mpmath.loggamma(k + R) - mpmath.loggamma(k) + mpmath.loggamma(small_floor + 1)
        rhs = mpmath.loggamma(k + 1)
        return bool(lhs <= rhs + mpmath.mpf(10) ** -25)


def _floor_scaled(coeff: Fraction, k: int) -> int:
    with mpmath.workdps(40):
        return int(mpmath.floor(coeff.numerator * mpmath.mpf(k) / (coeff.denominator * mpmath.log(k))))


def mass_increment_audit(terms, k: int, l: int, d: int) -> MassIncrementTrace:
    """Replay the mass increment chain on ``terms`` and record every count.

    Raises :class:`AuditError` when the terms are internally inconsistent
    (a t_i that does not match its rough part, a_i with a prime >= k, a
    rough part with a prime < k, or a_i violating the gcd condition that
    the index set I needs).
    """
    if k < 3:
        raise PreconditionError("the audit needs k >= 3")
    if len(terms) != k:
        raise AuditError(f"expected {k} terms, got {len(terms)}")
    validate_terms(terms, k, l)
    try:
        I = erdos_subset([t.a for t in terms]).indices
    except PreconditionError as exc:
        raise AuditError(f"index set I cannot be built: {exc}") from None

    a = [t.a for t in terms]
    small_idx = [i for i in I if a[i] < k]
    small = len(small_idx)
    R = len(I) - small
    mult = Counter(a[i] for i in small_idx)
    distinct = len(mult)
    A_size = sum(1 for c in mult.values() if c == 1)

    with mpmath.workdps(30):
        logk = mpmath.log(k)
        eta_R = (1 - mpmath.mpf(R) / k) * logk
    R_bound = {
        "eta": mpmath.nstr(eta_R, 15),
        "eta_at_least_1.31": bool(eta_R >= mpmath.mpf("1.31")),
        "rising_factorial_le_k_factorial": _rising_vs_factorial(k, R),
    }
    trace = MassIncrementTrace(
        k, l, tuple(I), small, distinct, A_size, R, R_bound,
        spark_ok=compare_scaled(small, SPARK, k),
    )
    if not R_bound["rising_factorial_le_k_factorial"]:
        trace.notes.append("prod_{j<R}(k+j) exceeds k!: the a_i >= k cannot be distinct with product dividing (k-1)!")
    if not trace.spark_ok:
        trace.broken = "spark"
        return trace

    delta0 = DELTA_START
    while True:
        acc_ok = compare_scaled(A_size, delta0 + DELTA_STEP, k)
        rnd = Round(delta0, small, distinct, A_size, R, acc_ok, None, None)
        trace.rounds.append(rnd)
        if not acc_ok:
            trace.broken = "accumulation"
            trace.collision = collision_pipeline(terms, I, k, l, d)
            return trace
        delta0 += DELTA_STEP
        if not _le_log_bound(delta0, k):
            break
        # increment: distinct >= delta0 k/log k forces more small indices
        rnd.factorial_chain_ok = _rising_vs_factorial(k, R, _floor_scaled(delta0, k))
        rnd.increment_ok = compare_scaled(small, delta0 + INCREMENT_GAIN, k)
        if not rnd.increment_ok:
            trace.broken = "increment"
            return trace
    ok = Fraction(distinct) >= DENSITY_FACTOR * k
    trace.density = {"distinct": distinct, "required": str(DENSITY_FACTOR * k), "ok": ok}
    if not ok:
        trace.broken = "density"
    return trace


def collision_pipeline(terms, I, k: int, l: int, d: int) -> dict:
    """Pairs (i, j) in a common T(alpha) with t_i^l - t_j^l = A_0 d^l.

    Builds T'(alpha) over I, removes indices with |t_i| = 1, picks the dyadic
    range (N/2, N] holding the most indices, cuts [0, k-1] into intervals of
    length floor(N (log k)^3) and takes the two smallest indices of T(alpha)
    in each interval. A_{i,j} = (i - j)/alpha; A_0 is the most common value
    among pairs whose identity checks out exactly.
    """
    out: dict = {}
    T_prime: dict[int, list] = {}
    for i in I:
        if terms[i].a < k:
            T_prime.setdefault(terms[i].a, []).append(i)
    trivial = count_trivial_ti(terms, k)
    out["trivial_t"] = {"count": trivial.count, "indices": trivial.indices[:50]}
    if trivial.count > TRIVIAL_CAP:
        out["trivial_t"]["cap_exceeded"] = True
    bad = set(trivial.indices)
    touched = {terms[i].a for i in bad if terms[i].a in T_prime}
    contribution = sum(len(T_prime[al]) for al in touched if 2 <= len(T_prime[al]) <= TRIVIAL_CAP + 1)
    out["trivial_contribution"] = {"value": contribution, "ok": contribution <= TRIVIAL_CONTRIBUTION_CAP}
    missing = [i for i in I if terms[i].a < k and not terms[i].exact_power]
    if missing:
        out["no_t_skipped"] = len(missing)
    skip = bad | set(missing)
    T = {al: [i for i in idx if i not in skip] for al, idx in T_prime.items()}
    T = {al: idx for al, idx in T.items() if len(idx) >= 2}
    if not T:
        out["A0"] = None
        out["pairs"] = []
        out["note"] = "no alpha keeps two usable indices"
        return out

    sums: Counter = Counter()
    for al, idx in T.items():
        N = 1 << (al - 1).bit_length()  # alpha in (N/2, N]
        sums[N] += len(idx)
    N = min(sums, key=lambda n: (-sums[n], n))
    with mpmath.workdps(40):
        length = max(1, int(mpmath.floor(N * mpmath.log(k) ** 3)))
    out["N"] = N
    out["dyadic_sums"] = {str(n): sums[n] for n in sorted(sums)}
    out["interval_length"] = length

    pairs = []
    rejected = []
    dl = d**l
    for al in sorted(T):
        if not N // 2 < al <= N:
            continue
        buckets: dict[int, list] = {}
        for i in T[al]:
            buckets.setdefault(i // length, []).append(i)
        for b in sorted(buckets):
            idx = sorted(buckets[b])
            if len(idx) < 2:
                continue
            j, i = idx[0], idx[1]
            entry = {"i": i, "j": j, "alpha": al}
            if (i - j) % al:
                entry["reason"] = "alpha does not divide i - j"
                rejected.append(entry)
                continue
            A = (i - j) // al
            entry["A"] = A
            ti, tj = terms[i].t, terms[j].t
            if ti**l - tj**l == A * dl:
                pairs.append(entry)
            else:
                entry["reason"] = "t_i^l - t_j^l != A d^l"
                rejected.append(entry)
    votes = Counter(p["A"] for p in pairs)
    A0 = min(votes, key=lambda v: (-votes[v], abs(v), -v)) if votes else None
    out["A0"] = A0
    out["pairs"] = [p for p in pairs if p["A"] == A0]
    out["other_verified"] = [p for p in pairs if p["A"] != A0][:20]
    out["rejected_count"] = len(rejected)
    out["rejected_sample"] = rejected[:5]
    return out
