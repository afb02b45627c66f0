"""MacMahon and MacMahonesque partition functions.

M_v(n) sums m_1^v_1 ... m_a^v_a over n = m_1 s_1 + ... + m_a s_a with
0 < s_1 < ... < s_a and every m_i >= 1. The exponent v_i is paired with
the i-th smallest part size. With v = (1, ..., 1) this is MacMahon's M_a.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from qforms.linalg import nullspace, primitive
from qforms.number_theory import primes_up_to, sigma
from qforms.omega import omega_check
from qforms.policies.coefficient_policy import PRIME_DETECTING
from qforms.pool import Witness, parallel_map, scan_range
from qforms.quasimodular import required_truncation
from qforms.series import QSeries, Scalar, format_fraction, parse_fraction

logger = logging.getLogger(__name__)

DEFAULT_SEARCH_COMBINATIONS = 200
NORM_NAME = "sum(v_i + 1)"


@dataclass(frozen=True, order=True)
class PartVector:
    entries: Tuple[int, ...]

    def __post_init__(self):
        entries = tuple(self.entries)
        if not entries:
            raise ValueError("a part vector needs at least one entry")
        if any(not isinstance(v, (int, np.integer)) or v < 0 for v in entries):
            raise ValueError(f"part vector entries must be integers >= 0, got {entries}")
        object.__setattr__(self, "entries", tuple(int(v) for v in entries))

    @classmethod
    def parse(cls, text: str) -> "PartVector":
        try:
            entries = tuple(int(v) for v in text.split(","))
        except ValueError:
            raise ValueError(f"cannot parse part vector {text!r}; expected e.g. 2,1,1")
        return cls(entries)

    @property
    def length(self) -> int:
        return len(self.entries)

    @property
    def norm(self) -> int:
        return sum(v + 1 for v in self.entries)

    def reversed(self) -> "PartVector":
        return PartVector(self.entries[::-1])

    def to_json(self) -> List[int]:
        return list(self.entries)

    def __str__(self) -> str:
        return "(" + ",".join(str(v) for v in self.entries) + ")"


def _minimal_sum(count: int, above: int) -> int:
    # Smallest total of `count` distinct sizes all > above, each used once.
    return count * above + count * (count + 1) // 2


@lru_cache(maxsize=1 << 16)
def _representations(entries: Tuple[int, ...], n: int, min_size: int) -> int:
    v, rest = entries[0], entries[1:]
    if not rest:
        total = 0
        for s in range(min_size, n + 1):
            if n % s == 0:
                total += (n // s) ** v
        return total
    total = 0
    s = min_size
    while s + _minimal_sum(len(rest), s) <= n:
        m = 1
        while m * s + _minimal_sum(len(rest), s) <= n:
            total += m**v * _representations(rest, n - m * s, s + 1)
            m += 1
        s += 1
    return total


def macmahonesque_M(vec: PartVector, n: int) -> int:
    """M_vec(n) by direct enumeration of size tuples and multiplicities."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    if n == 0:
        return 0
    return _representations(vec.entries, n, 1)


def macmahon_M(a: int, n: int) -> int:
    if a < 1:
        raise ValueError(f"MacMahon's M_a needs a >= 1, got {a}")
    return macmahonesque_M(PartVector((1,) * a), n)


def macmahon_table(vec: PartVector, truncation: int) -> np.ndarray:
    """M_vec(0..N) as an object array, from the product side of the generating series.

    After processing sizes 1..s, tables[j] holds the generating series over
    size tuples s_1 < ... < s_j <= s, each size weighted by sum_m m^v_j q^(m s_j).
    """
    if truncation < 0:
        raise ValueError(f"truncation must be non-negative, got {truncation}")
    a = vec.length
    tables = [np.zeros(truncation + 1, dtype=object) for _ in range(a + 1)]
    tables[0][0] = 1
    for s in range(1, truncation + 1):
        for j in range(min(a, s), 0, -1):
            prev = tables[j - 1]
            if _minimal_sum(j - 1, 0) + s > truncation:
                continue
            v = vec.entries[j - 1]
            for m in range(1, truncation // s + 1):
                ms = m * s
                tables[j][ms:] += prev[: truncation + 1 - ms] * m**v
    return tables[a]


def U_vec_series(vec: PartVector, truncation: int) -> QSeries:
    return QSeries(int(x) for x in macmahon_table(vec, truncation))


def U_series(a: int, truncation: int) -> QSeries:
    """MacMahon's generating function U_a(q) = sum_n M_a(n) q^n."""
    if a < 1:
        raise ValueError(f"MacMahon's U_a needs a >= 1, got {a}")
    return U_vec_series(PartVector((1,) * a), truncation)


def macmahon_M2_closed(n: int) -> Fraction:
    """8 M_2(n) = sigma_3(n) - (2n - 1) sigma_1(n)."""
    return Fraction(sigma(3, n) - (2 * n - 1) * sigma(1, n), 8)


def macmahon_M3_closed(n: int) -> Fraction:
    """1920 M_3(n) = (40n^2 - 100n + 37) sigma_1 - 10(3n - 5) sigma_3 + 3 sigma_5."""
    value = (
        (40 * n * n - 100 * n + 37) * sigma(1, n)
        - 10 * (3 * n - 5) * sigma(3, n)
        + 3 * sigma(5, n)
    )
    return Fraction(value, 1920)


Polynomial = Tuple[Fraction, ...]


def eval_polynomial(poly: Polynomial, n: int) -> Fraction:
    total = Fraction(0)
    for c in reversed(poly):
        total = total * n + c
    return total


class MMExpression:
    """sum_i poly_i(n) M_{vec_i}(n); polynomials are coefficient tuples, lowest degree first."""

    def __init__(self, terms: Sequence[Tuple[Sequence[Scalar], PartVector]], name: str = ""):
        clean = []
        for poly, vec in terms:
            poly = tuple(Fraction(c) for c in poly)
            if not any(poly):
                continue
            clean.append((poly, vec))
        vectors = [vec for _, vec in clean]
        if len(set(vectors)) != len(vectors):
            raise ValueError("vectors must be distinct within an expression")
        self.terms: Tuple[Tuple[Polynomial, PartVector], ...] = tuple(clean)
        self.name = name

    @classmethod
    def from_coefficients(
        cls, vectors: Sequence[PartVector], coefficients: Sequence[Scalar], name: str = ""
    ) -> "MMExpression":
        return cls([((c,), vec) for vec, c in zip(vectors, coefficients)], name)

    @property
    def vectors(self) -> List[PartVector]:
        return [vec for _, vec in self.terms]

    def to_json(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "terms": [
                {"poly": [format_fraction(c) for c in poly], "vec": vec.to_json()}
                for poly, vec in self.terms
            ],
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "MMExpression":
        terms = [
            ([parse_fraction(c) for c in t["poly"]], PartVector(tuple(t["vec"])))
            for t in data["terms"]
        ]
        return cls(terms, data.get("name", ""))

    def __repr__(self) -> str:
        return f"MMExpression({self.name or len(self.terms)})"


def eval_expression(e: MMExpression, n: int) -> Fraction:
    return sum(
        (eval_polynomial(poly, n) * macmahonesque_M(vec, n) for poly, vec in e.terms),
        Fraction(0),
    )


def expression_values(
    e: MMExpression, truncation: int, num_workers: Optional[int] = None
) -> List[Fraction]:
    """Values of e at n = 0..N, from the generating-series tables."""
    tables = parallel_map(
        macmahon_table, [(vec, truncation) for vec in e.vectors], num_workers=num_workers
    )
    values = [Fraction(0)] * (truncation + 1)
    for (poly, _), table in zip(e.terms, tables):
        for n in range(truncation + 1):
            if table[n]:
                values[n] += eval_polynomial(poly, n) * int(table[n])
    return values


def expression_series(e: MMExpression, truncation: int) -> QSeries:
    """sum_i poly_i(D) U_{vec_i}(q), whose q^n coefficient is the value at n."""
    return QSeries(expression_values(e, truncation))


def builtin_expressions() -> List[MMExpression]:
    degree_two = MMExpression(
        [((2, -3, 1), PartVector((1,))), ((-8,), PartVector((1, 1)))],
        name="builtin:1",
    )
    degree_three = MMExpression(
        [
            ((-8, 18, -13, 3), PartVector((1,))),
            ((212, -120, 12), PartVector((1, 1))),
            ((-960,), PartVector((1, 1, 1))),
        ],
        name="builtin:2",
    )
    # Written with v_1 on the largest part size; stored in increasing-size order.
    eight_term = [
        (63, (2, 2)),
        (-12, (3, 0)),
        (-39, (3, 1)),
        (-12, (1, 3)),
        (80, (1, 1, 1)),
        (-12, (2, 0, 1)),
        (12, (2, 1, 0)),
        (12, (3, 0, 0)),
    ]
    macmahonesque = MMExpression(
        [((c,), PartVector(v).reversed()) for c, v in eight_term], name="builtin:3"
    )
    return [degree_two, degree_three, macmahonesque]


def builtin_expression(name: str) -> MMExpression:
    for e in builtin_expressions():
        if e.name == name or e.name == f"builtin:{name}":
            return e
    raise ValueError(f"unknown expression {name!r}; choose builtin:1, builtin:2 or builtin:3")


@dataclass(frozen=True)
class DetectionReport:
    bound: int
    zeros: Tuple[int, ...]
    negatives: Tuple[int, ...]
    primes: Tuple[int, ...]

    @property
    def detects_primes(self) -> bool:
        return self.zeros == self.primes and not self.negatives

    def to_json(self) -> Dict[str, Any]:
        return {
            "bound": self.bound,
            "zeros": list(self.zeros),
            "negatives": list(self.negatives),
            "detects_primes": self.detects_primes,
        }


def detect_primes(e: MMExpression, truncation: int, num_workers: Optional[int] = None) -> DetectionReport:
    """Zero set on [2, N] and negative set on [1, N] of e, against the primes up to N."""
    values = expression_values(e, truncation, num_workers=num_workers)
    zeros = tuple(n for n in range(2, truncation + 1) if values[n] == 0)
    negatives = tuple(n for n in range(1, truncation + 1) if values[n] < 0)
    return DetectionReport(truncation, zeros, negatives, tuple(primes_up_to(truncation)))


def enumerate_part_vectors(d: int) -> List[PartVector]:
    """All vectors with sum(v_i + 1) <= d, ordered by norm, then length, then entries."""
    out = []

    def extend(prefix: Tuple[int, ...], budget: int):
        if prefix:
            out.append(PartVector(prefix))
        for v in range(budget):
            extend(prefix + (v,), budget - v - 1)

    extend((), d)
    return sorted(out, key=lambda vec: (vec.norm, vec.length, vec.entries))


def _tables(vectors: Sequence[PartVector], truncation: int, num_workers: Optional[int]):
    return parallel_map(
        macmahon_table, [(vec, truncation) for vec in vectors], num_workers=num_workers
    )


def prime_constraint_matrix(
    vectors: Sequence[PartVector], prime_bound: int, num_workers: Optional[int] = None
) -> List[List[int]]:
    """Rows indexed by primes p <= P, columns by vectors, entries M_vec(p)."""
    tables = _tables(vectors, prime_bound, num_workers)
    return [[int(table[p]) for table in tables] for p in primes_up_to(prime_bound)]


@dataclass(frozen=True)
class SearchResult:
    coefficients: Tuple[int, ...]
    witness: Optional[Witness]
    verdict: Optional[Dict[str, Any]] = None

    @property
    def passed(self) -> bool:
        return self.witness is None

    def to_json(self) -> Dict[str, Any]:
        out = {
            "coefficients": [str(c) for c in self.coefficients],
            "passed": self.passed,
            "witness": self.witness.to_json() if self.witness else None,
        }
        if self.verdict is not None:
            out["omega"] = self.verdict
        return out


@dataclass(frozen=True)
class SearchOutcome:
    vectors: Tuple[PartVector, ...]
    d: int
    bound: int
    prime_bound: int
    nullity: int
    candidates: int
    results: Tuple[SearchResult, ...]

    def to_json(self) -> Dict[str, Any]:
        return {
            "norm": NORM_NAME,
            "d": self.d,
            "bound": self.bound,
            "prime_bound": self.prime_bound,
            "vectors": [vec.to_json() for vec in self.vectors],
            "nullity": self.nullity,
            "candidates": self.candidates,
            "results": [r.to_json() for r in self.results],
        }


def _candidates(basis: List[List[int]], max_combinations: int) -> List[Tuple[int, ...]]:
    seen = set()
    out = []

    def add(vector: Sequence[int]):
        vector = tuple(primitive(vector))
        if any(vector) and vector not in seen:
            seen.add(vector)
            out.append(vector)

    for vector in basis:
        add(vector)
        add([-x for x in vector])
    for u, w in combinations(basis, 2):
        if len(out) >= max_combinations:
            break
        for sign in (1, -1):
            add([x + sign * y for x, y in zip(u, w)])
            add([-(x + sign * y) for x, y in zip(u, w)])
    return out[: max(max_combinations, 2 * len(basis))]


def _cross_certify(values: Sequence[int], d: int, bound: int) -> Dict[str, Any]:
    weight_bound = d + d % 2
    needed = required_truncation(weight_bound)
    if bound < needed:
        return {"status": "SKIPPED", "note": f"recognition needs bound >= {needed}"}
    return omega_check(QSeries(values), bound, weight_bound).to_json()


def search_prime_detecting(
    d: int,
    bound: int,
    prime_bound: int,
    max_combinations: int = DEFAULT_SEARCH_COMBINATIONS,
    cross_certify: bool = False,
    num_workers: Optional[int] = None,
) -> SearchOutcome:
    """Look for combinations sum c_v M_v with |v| <= d that vanish at primes.

    Candidates come from the rational nullspace of the prime constraint
    matrix; a candidate is kept when it is nonnegative on [1, N], zero at
    every prime <= N and nonzero at every composite in [4, N].
    """
    if prime_bound > bound:
        raise ValueError(f"prime bound {prime_bound} exceeds verification bound {bound}")
    vectors = enumerate_part_vectors(d)
    if not vectors:
        return SearchOutcome((), d, bound, prime_bound, 0, 0, ())
    tables = _tables(vectors, bound, num_workers)
    primes = primes_up_to(prime_bound)
    rows = [[int(table[p]) for table in tables] for p in primes]
    if rows:
        basis = [primitive(v) for v in nullspace(rows)]
    else:
        basis = [[int(i == j) for j in range(len(vectors))] for i in range(len(vectors))]
    candidates = _candidates(basis, max_combinations)
    logger.info(
        "search d=%d: %d vectors, nullity %d, %d candidates", d, len(vectors), len(basis), len(candidates)
    )
    results = []
    for coefficients in candidates:
        values = np.zeros(bound + 1, dtype=object)
        for c, table in zip(coefficients, tables):
            if c:
                values = values + table * c
        witness = scan_range(lambda n: int(values[n]), range(1, bound + 1), PRIME_DETECTING)
        if witness is not None:
            continue
        verdict = _cross_certify([int(x) for x in values], d, bound) if cross_certify else None
        results.append(SearchResult(coefficients, None, verdict))
    return SearchOutcome(
        tuple(vectors), d, bound, prime_bound, len(basis), len(candidates), tuple(results)
    )
