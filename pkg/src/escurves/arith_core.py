"""Exact integer and rational primitives.

Every other module builds on these: prime tables, p-adic valuations,
smooth/rough splitting, integer roots and exact Mertens products.
Rationals are plain :class:`fractions.Fraction` values, which are always
stored in lowest terms with a positive denominator.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt

from .errors import DomainError

__all__ = [
    "ExactRational",
    "PrimeTable",
    "as_fraction",
    "rational_height",
    "sieve_primes",
    "primes_below",
    "is_prime",
    "p_valuation",
    "factorial_valuation",
    "smooth_rough_split",
    "iroot",
    "perfect_power_root",
    "power_free_part",
    "factorize",
    "mertens_product",
    "prime_in_interval",
    "omega",
]

ExactRational = Fraction


def as_fraction(value) -> Fraction:
    """Coerce ints, strings like ``"3/4"`` or ``"0.3"``, and floats to an exact rational.

    Floats go through their shortest ``repr`` so ``0.3`` means 3/10 rather
    than the binary double nearest to it.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as a rational")


def rational_height(q) -> int:
    """Naive height max(|a|, b) of a reduced fraction a/b."""
    q = as_fraction(q)
    return max(abs(q.numerator), q.denominator)


@dataclass(frozen=True)
class PrimeTable:
    limit: int
    primes: tuple

    @property
    def pi(self) -> int:
        return len(self.primes)

    def __contains__(self, n) -> bool:
        j = bisect.bisect_left(self.primes, n)
        return j < len(self.primes) and self.primes[j] == n

    def below(self, bound) -> tuple:
        """Primes strictly less than ``bound``."""
        return self.primes[: bisect.bisect_left(self.primes, bound)]

    def upto(self, bound) -> tuple:
        """Primes less than or equal to ``bound``."""
        return self.primes[: bisect.bisect_right(self.primes, bound)]


@lru_cache(maxsize=32)
def _sieve(limit: int) -> tuple:
    flags = bytearray([1]) * (limit + 1)
    flags[0:2] = b"\x00\x00"
    for p in range(2, isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = bytes(len(range(p * p, limit + 1, p)))
    return tuple(i for i, f in enumerate(flags) if f)


def sieve_primes(limit: int) -> PrimeTable:
    if limit < 2:
        raise DomainError(f"sieve limit must be at least 2, got {limit}")
    return PrimeTable(limit, _sieve(int(limit)))


_TABLE_FLOOR = 1 << 16


def _table_covering(n: int) -> PrimeTable:
    # round the limit up to a power of two so the lru cache stays small
    limit = max(_TABLE_FLOOR, 1 << (max(int(n), 2) - 1).bit_length())
    return sieve_primes(limit)


def primes_below(bound) -> tuple:
    """Ascending primes p < bound (bound may be rational)."""
    b = as_fraction(bound)
    top = -((-b.numerator) // b.denominator)  # ceil
    if top <= 2:
        return ()
    return _table_covering(top).below(top)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n <= _TABLE_FLOOR or n < (1 << 22):
        return n in _table_covering(n)
    for p in _table_covering(isqrt(n) + 1).upto(isqrt(n)):
        if n % p == 0:
            return False
    return True


def p_valuation(n: int, p: int) -> int:
    """Largest r with p**r dividing n."""
    if n == 0:
        raise DomainError("valuation of 0 is infinite")
    if p < 2:
        raise DomainError(f"{p} is not a prime")
    n = abs(n)
    r = 0
    while n % p == 0:
        n //= p
        r += 1
    return r


def factorial_valuation(m: int, p: int) -> int:
    """v_p(m!) by Legendre's formula."""
    total, q = 0, p
    while q <= m:
        total += m // q
        q *= p
    return total


@lru_cache(maxsize=64)
def _primorial_below(bound: int) -> int:
    prod = 1
    for p in primes_below(bound):
        prod *= p
    return prod


def smooth_rough_split(n: int, bound: int) -> tuple[int, int]:
    """Split ``n = smooth * rough`` at ``bound``.

    ``smooth`` is positive with every prime factor < bound; ``rough`` keeps the
    sign of ``n`` and has every prime factor >= bound.
    """
    if n == 0:
        raise DomainError("cannot split 0 into smooth and rough parts")
    if bound < 2:
        raise DomainError(f"smoothness bound must be at least 2, got {bound}")
    sign = -1 if n < 0 else 1
    rest = abs(n)
    smooth = 1
    # repeated gcd against the primorial strips every prime power below bound
    g = gcd(rest, _primorial_below(bound))
    while g > 1:
        smooth *= g
        rest //= g
        g = gcd(rest, g)
    return smooth, sign * rest


def iroot(n: int, k: int) -> int:
    """Floor of the k-th root of a nonnegative integer (integer Newton)."""
    if n < 0:
        raise DomainError("iroot needs a nonnegative radicand")
    if k < 1:
        raise DomainError("root index must be positive")
    if n < 2 or k == 1:
        return n
    if k == 2:
        return isqrt(n)
    x = 1 << -(-n.bit_length() // k)  # overestimate
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            return x
        x = y


def perfect_power_root(n: int, l: int):
    """Integer r with r**l == n, or None if n is not an exact l-th power.

    For odd ``l`` the root carries the sign of ``n``.
    """
    if l < 2:
        raise DomainError(f"exponent must be at least 2, got {l}")
    if n < 0 and l % 2 == 0:
        raise DomainError("negative numbers have no even roots")
    r = iroot(abs(n), l)
    if r**l != abs(n):
        return None
    return -r if n < 0 else r


def power_free_part(n: int, l: int) -> tuple[int, int]:
    """Write ``n = core * root**l`` with ``core`` l-th-power-free and root > 0."""
    if n == 0:
        raise DomainError("0 has no power-free part")
    m = abs(n)
    root = 1
    # any p with p**l | n satisfies p <= n**(1/l)
    for p in primes_below(iroot(m, l) + 1):
        if p**l > m:
            break
        v = 0
        while m % p == 0:
            m //= p
            v += 1
        root *= p ** (v // l)
    return n // root**l, root


def factorize(n: int) -> dict[int, int]:
    """Prime factorization of |n| by trial division. Desk scale only."""
    if n == 0:
        raise DomainError("cannot factor 0")
    m = abs(n)
    out: dict[int, int] = {}
    for p in primes_below(isqrt(m) + 1):
        if p * p > m:
            break
        if m % p == 0:
            v = 0
            while m % p == 0:
                m //= p
                v += 1
            out[p] = v
    if m > 1:
        out[m] = out.get(m, 0) + 1
    return out


def mertens_product(A) -> Fraction:
    """Exact value of prod_{p <= A} (1 - 1/p)."""
    A = as_fraction(A)
    if A < 2:
        raise DomainError(f"Mertens product needs A >= 2, got {A}")
    top = A.numerator // A.denominator
    value = Fraction(1)
    for p in primes_below(top + 1):
        value *= Fraction(p - 1, p)
    return value


def prime_in_interval(lo, hi):
    """Smallest prime p with lo < p < hi, or None."""
    lo, hi = as_fraction(lo), as_fraction(hi)
    if lo < 1:
        raise DomainError("interval must start at 1 or above")
    start = lo.numerator // lo.denominator + 1
    if hi <= start:
        return None
    primes = _table_covering(-((-hi.numerator) // hi.denominator)).primes
    j = bisect.bisect_left(primes, start)
    if j < len(primes) and primes[j] < hi:
        return primes[j]
    return None


def omega(n: int) -> int:
    """Number of distinct primes dividing n."""
    if n == 0:
        raise DomainError("omega(0) is undefined")
    return len(factorize(n)) if abs(n) > 1 else 0
