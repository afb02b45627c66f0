import random
from fractions import Fraction
from math import gcd

import pytest

from qforms.number_theory import (
    bernoulli,
    divisors,
    is_prime,
    prime_sieve,
    primes_up_to,
    sigma,
)
from qforms.quasimodular import eisenstein_series


def test_divisors_and_sigma():
    assert divisors(1) == [1]
    assert divisors(12) == [1, 2, 3, 4, 6, 12]
    assert divisors(49) == [1, 7, 49]
    assert sigma(1, 4) == 7
    assert sigma(3, 2) == 9
    assert sigma(5, 2) == 33
    assert sigma(0, 12) == 6
    with pytest.raises(ValueError, match="n >= 1"):
        sigma(1, 0)
    with pytest.raises(ValueError):
        divisors(-3)


def test_sigma_matches_divisor_sum():
    for n in range(1, 1001):
        ds = divisors(n)
        assert all(n % d == 0 for d in ds)
        for nu in range(8):
            assert sigma(nu, n) == sum(d**nu for d in ds)


def test_sigma_is_multiplicative():
    rng = random.Random(29)
    checked = 0
    while checked < 200:
        m, n = rng.randint(1, 3000), rng.randint(1, 3000)
        if gcd(m, n) != 1:
            continue
        nu = rng.randint(0, 7)
        assert sigma(nu, m * n) == sigma(nu, m) * sigma(nu, n)
        checked += 1


def test_bernoulli():
    assert bernoulli(0) == 1
    assert bernoulli(1) == Fraction(-1, 2)
    assert bernoulli(2) == Fraction(1, 6)
    assert bernoulli(4) == Fraction(-1, 30)
    assert bernoulli(12) == Fraction(-691, 2730)
    assert all(bernoulli(m) == 0 for m in range(3, 40, 2))
    with pytest.raises(ValueError):
        bernoulli(-1)


@pytest.mark.parametrize("weight", list(range(2, 32, 2)))
def test_bernoulli_gives_eisenstein_constant(weight):
    assert eisenstein_series(weight, 3)[0] == -bernoulli(weight) / (2 * weight)


def test_primality_agrees_with_sieve():
    limit = 10**6
    flags = prime_sieve(limit)
    assert all(is_prime(n) == bool(flags[n]) for n in range(limit + 1))
    assert primes_up_to(30) == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert primes_up_to(1) == []
    assert not is_prime(1) and not is_prime(0) and not is_prime(-7)
    assert is_prime(7919)
