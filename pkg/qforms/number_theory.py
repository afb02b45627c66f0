import threading
from fractions import Fraction
from functools import lru_cache
from math import comb, isqrt
from typing import List, Tuple

import numpy as np
import sympy

_bernoulli_lock = threading.Lock()
_bernoulli_table: List[Fraction] = [Fraction(1)]


@lru_cache(maxsize=65536)
def _divisors(n: int) -> Tuple[int, ...]:
    return tuple(int(d) for d in sympy.divisors(n))


def divisors(n: int) -> List[int]:
    """Positive divisors of n in ascending order."""
    if n < 1:
        raise ValueError(f"divisors are defined for n >= 1, got {n}")
    return list(_divisors(n))


def sigma(nu: int, n: int) -> int:
    """Divisor power sum sigma_nu(n) = sum_{d | n} d^nu."""
    if nu < 0:
        raise ValueError(f"sigma needs a non-negative power, got {nu}")
    if n < 1:
        raise ValueError(f"sigma is defined for n >= 1, got {n}")
    return sum(d**nu for d in _divisors(n))


def bernoulli(m: int) -> Fraction:
    """Bernoulli number B_m with B_1 = -1/2.

    Uses sum_{j=0}^{m} C(m+1, j) B_j = 0; the table only grows and is
    extended under a lock so concurrent readers see a consistent prefix.
    """
    if m < 0:
        raise ValueError(f"Bernoulli numbers are indexed by m >= 0, got {m}")
    if m < len(_bernoulli_table):
        return _bernoulli_table[m]
    with _bernoulli_lock:
        while len(_bernoulli_table) <= m:
            k = len(_bernoulli_table)
            total = sum(comb(k + 1, j) * _bernoulli_table[j] for j in range(k))
            _bernoulli_table.append(-total / (k + 1))
    return _bernoulli_table[m]


def is_prime(n: int) -> bool:
    """Deterministic trial division up to sqrt(n)."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    for d in range(3, isqrt(n) + 1, 2):
        if n % d == 0:
            return False
    return True


def prime_sieve(limit: int) -> np.ndarray:
    """Boolean array `flags` with flags[n] true iff n is prime, for 0 <= n <= limit."""
    if limit < 0:
        raise ValueError(f"sieve limit must be non-negative, got {limit}")
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return flags


def primes_up_to(limit: int) -> List[int]:
    return [int(p) for p in np.flatnonzero(prime_sieve(limit))]
