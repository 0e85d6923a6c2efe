"""Hand-built term data for exercising the auditors.

None of these come from a genuine progression; they are shaped to trip
specific branches of the audit.
"""
from __future__ import annotations

from .arith_core import is_prime
from .factor_terms import TermFactorization

# t_28^3 - t_0^3 = 28 * 6813^3, both primes above 10^4
TAMPERED_K = 10_000
TAMPERED_D = 6813
TAMPERED_PAIR = {28: -17333, 0: -24137}


def _primes_from(start: int):
    p = start
    while True:
        if is_prime(p):
            yield p
        p += 1


def tampered_terms(k: int = TAMPERED_K) -> tuple[list, int]:
    """Terms with half of the a_i equal to 1 and one genuine cube relation.

    Returns (terms, d). The a_i are 1 on index 0, 28, every even index from
    30 on and the odd indices near the end; 2 on the other odd indices; p^2
    for thirteen distinct primes p >= 101 on the even indices 2..26. Every
    t_i is a distinct prime >= 10^4 except the two that satisfy
    t_28^3 - t_0^3 = 28 d^3.
    """
    if k != TAMPERED_K:
        raise ValueError("the fixture is tuned for k = 10^4")
    l = 3
    a = [0] * k
    big = _primes_from(101)
    for i in range(k):
        if i in (0, 28) or (i >= 30 and i % 2 == 0) or (i % 2 == 1 and i >= 9975):
            a[i] = 1
        elif i % 2 == 0:
            a[i] = next(big) ** 2
        else:
            a[i] = 2
    reserved = {abs(v) for v in TAMPERED_PAIR.values()}
    tp = (p for p in _primes_from(10_007) if p not in reserved)
    terms = []
    for i in range(k):
        t = TAMPERED_PAIR.get(i)
        if t is None:
            t = next(tp)
        terms.append(TermFactorization(i, a[i], t**l, t, True))
    return terms, TAMPERED_D
