from fractions import Fraction
from typing import Callable, List, Optional, Sequence

from qforms.number_theory import is_prime

Policy = Callable[[int, Fraction], Optional[str]]


def nonnegative(n: int, value: Fraction) -> Optional[str]:
    if n >= 1 and value < 0:
        return "negative"
    return None


def vanishes_at_primes(n: int, value: Fraction) -> Optional[str]:
    if value != 0 and is_prime(n):
        return "nonzero_at_prime"
    return None


def nonzero_at_composites(n: int, value: Fraction) -> Optional[str]:
    # 0, 1 and primes are exempt; 4 is the first composite.
    if value == 0 and n >= 4 and not is_prime(n):
        return "zero_at_composite"
    return None


PRIME_DETECTING: List[Policy] = [nonnegative, vanishes_at_primes, nonzero_at_composites]


def first_violation(n: int, value: Fraction, policies: Sequence[Policy]) -> Optional[str]:
    for policy in policies:
        reason = policy(n, value)
        if reason is not None:
            return reason
    return None
