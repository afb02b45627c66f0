"""The ring Q[G2, G4, G6] of level one quasimodular forms.

Polynomials are kept symbolically (`QMPoly`) and expanded on demand into
`QSeries`. Every exact solve here is certified by full column rank through
`qforms.linalg.certify`, so a match at the certified truncation is an
identity of forms, not just of truncated series.
"""
import logging
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple, Union

import sympy

from qforms.linalg import certify, from_sympy, to_sympy
from qforms.number_theory import bernoulli, sigma
from qforms.series import (
    InsufficientTruncation,
    QSeries,
    Scalar,
    format_fraction,
    parse_fraction,
)

logger = logging.getLogger(__name__)

Monomial = Tuple[int, int, int]

# Normalized series E4 = 240 G4 and E6 = -504 G6.
E4_SCALE = Fraction(240)
E6_SCALE = Fraction(-504)


def monomial_weight(monomial: Monomial) -> int:
    a, b, c = monomial
    return 2 * a + 4 * b + 6 * c


def monomial_key(monomial: Monomial) -> Tuple[int, int, int, int]:
    """Sort key: weight first, then descending lexicographic order on (a, b, c)."""
    a, b, c = monomial
    return (monomial_weight(monomial), -a, -b, -c)


def _check_weight(weight: int, minimum: int = 0):
    if weight < minimum or weight % 2:
        raise ValueError(f"weight must be an even integer >= {minimum}, got {weight}")


class QMPoly:
    """Polynomial in G2, G4, G6 with rational coefficients.

    Terms map exponent triples (a, b, c), meaning G2^a G4^b G6^c, to
    nonzero coefficients.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Optional[Mapping[Monomial, Scalar]] = None):
        clean: Dict[Monomial, Fraction] = {}
        for monomial, coeff in (terms or {}).items():
            monomial = tuple(int(e) for e in monomial)
            if len(monomial) != 3 or min(monomial) < 0:
                raise ValueError(f"invalid monomial exponents {monomial}")
            coeff = Fraction(coeff)
            if coeff:
                clean[monomial] = coeff
        self._terms = clean

    @classmethod
    def constant(cls, value: Scalar) -> "QMPoly":
        return cls({(0, 0, 0): value})

    @classmethod
    def monomial(cls, monomial: Monomial, coeff: Scalar = 1) -> "QMPoly":
        return cls({monomial: coeff})

    @classmethod
    def generator(cls, two_k: int) -> "QMPoly":
        exponents = {2: (1, 0, 0), 4: (0, 1, 0), 6: (0, 0, 1)}
        if two_k not in exponents:
            raise ValueError(f"generators are G2, G4, G6; got weight {two_k}")
        return cls({exponents[two_k]: 1})

    @property
    def terms(self) -> Dict[Monomial, Fraction]:
        return dict(self._terms)

    def items(self) -> List[Tuple[Monomial, Fraction]]:
        return sorted(self._terms.items(), key=lambda item: monomial_key(item[0]))

    def is_zero(self) -> bool:
        return not self._terms

    def weights(self) -> List[int]:
        return sorted({monomial_weight(m) for m in self._terms})

    def max_weight(self) -> int:
        return max(self.weights(), default=0)

    def graded_piece(self, weight: int) -> "QMPoly":
        return QMPoly({m: c for m, c in self._terms.items() if monomial_weight(m) == weight})

    def __add__(self, other: Union["QMPoly", Scalar]) -> "QMPoly":
        if isinstance(other, (int, Fraction)):
            other = QMPoly.constant(other)
        if not isinstance(other, QMPoly):
            return NotImplemented
        out = defaultdict(Fraction, self._terms)
        for m, c in other._terms.items():
            out[m] += c
        return QMPoly(out)

    __radd__ = __add__

    def __neg__(self) -> "QMPoly":
        return QMPoly({m: -c for m, c in self._terms.items()})

    def __sub__(self, other: Union["QMPoly", Scalar]) -> "QMPoly":
        if isinstance(other, (int, Fraction)):
            other = QMPoly.constant(other)
        if not isinstance(other, QMPoly):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: Scalar) -> "QMPoly":
        return (-self) + other

    def __mul__(self, other: Union["QMPoly", Scalar]) -> "QMPoly":
        if isinstance(other, (int, Fraction)):
            factor = Fraction(other)
            return QMPoly({m: c * factor for m, c in self._terms.items()})
        if not isinstance(other, QMPoly):
            return NotImplemented
        out: Dict[Monomial, Fraction] = defaultdict(Fraction)
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                out[(m1[0] + m2[0], m1[1] + m2[1], m1[2] + m2[2])] += c1 * c2
        return QMPoly(out)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "QMPoly":
        assert isinstance(exponent, int) and exponent >= 0
        result = QMPoly.constant(1)
        for _ in range(exponent):
            result = result * self
        return result

    def __eq__(self, other: Any) -> bool:
        if isinstance(other, (int, Fraction)):
            other = QMPoly.constant(other)
        if not isinstance(other, QMPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def D(self, m: int = 1) -> "QMPoly":
        result = self
        for _ in range(m):
            result = qm_D(result)
        return result

    def expand(self, truncation: int) -> QSeries:
        return qm_expand(self, truncation)

    def to_json(self) -> Dict[str, Any]:
        return {
            "terms": [
                {"monomial": list(m), "coeff": format_fraction(c)} for m, c in self.items()
            ]
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "QMPoly":
        if "terms" not in data:
            raise ValueError("polynomial document needs 'terms'")
        terms: Dict[Monomial, Fraction] = defaultdict(Fraction)
        try:
            for term in data["terms"]:
                monomial = tuple(int(e) for e in term["monomial"])
                if len(monomial) != 3:
                    raise ValueError(f"monomial must have three exponents, got {monomial}")
                terms[monomial] += parse_fraction(term["coeff"])
        except KeyError as e:
            raise ValueError(f"polynomial term is missing {e}") from e
        except TypeError as e:
            raise ValueError(f"malformed polynomial term: {e}") from e
        return cls(terms)

    def __repr__(self) -> str:
        if not self._terms:
            return "QMPoly(0)"
        parts = []
        for (a, b, c), coeff in self.items():
            factors = [
                f"G{2 * (i + 1)}" + (f"^{e}" if e > 1 else "")
                for i, e in enumerate((a, b, c))
                if e
            ]
            parts.append("*".join([format_fraction(coeff)] + factors))
        return "QMPoly(" + " + ".join(parts) + ")"


G2 = QMPoly.generator(2)
G4 = QMPoly.generator(4)
G6 = QMPoly.generator(6)

# Delta = (E4^3 - E6^2) / 1728 written in G4, G6.
DELTA = (E4_SCALE**3 * G4**3 - E6_SCALE**2 * G6**2) * Fraction(1, 1728)

# Ramanujan's identities for D applied to each generator.
_GENERATOR_DERIVATIVES: Tuple[QMPoly, ...] = (
    QMPoly({(2, 0, 0): -2, (0, 1, 0): Fraction(5, 6)}),
    QMPoly({(1, 1, 0): -8, (0, 0, 1): Fraction(7, 10)}),
    QMPoly({(1, 0, 1): -12, (0, 2, 0): Fraction(400, 7)}),
)


def qm_D(p: QMPoly) -> QMPoly:
    """The derivation D = q d/dq on symbols, via Ramanujan's rules and Leibniz."""
    out: Dict[Monomial, Fraction] = defaultdict(Fraction)
    for monomial, coeff in p._terms.items():
        for index, exponent in enumerate(monomial):
            if exponent == 0:
                continue
            lowered = list(monomial)
            lowered[index] -= 1
            for m2, c2 in _GENERATOR_DERIVATIVES[index]._terms.items():
                target = (lowered[0] + m2[0], lowered[1] + m2[1], lowered[2] + m2[2])
                out[target] += coeff * exponent * c2
    return QMPoly(out)


@lru_cache(maxsize=256)
def eisenstein_series(two_k: int, truncation: int) -> QSeries:
    """G_{2k} = -B_{2k}/(4k) + sum_{n >= 1} sigma_{2k-1}(n) q^n."""
    _check_weight(two_k, minimum=2)
    constant = -bernoulli(two_k) / (2 * two_k)
    return QSeries(
        [constant] + [sigma(two_k - 1, n) for n in range(1, truncation + 1)]
    )


def monomials(weight: int) -> List[Monomial]:
    """Exponent triples of the given weight in descending lexicographic order."""
    _check_weight(weight)
    out = []
    for a in range(weight // 2, -1, -1):
        for b in range((weight - 2 * a) // 4, -1, -1):
            rest = weight - 2 * a - 4 * b
            if rest % 6 == 0:
                out.append((a, b, rest // 6))
    return out


def monomial_basis(weight: int) -> List[QMPoly]:
    return [QMPoly.monomial(m) for m in monomials(weight)]


def basis_up_to(weight_bound: int) -> List[QMPoly]:
    """Monomial basis of mixed weight <= weight_bound, graded pieces in order."""
    _check_weight(weight_bound)
    return [p for w in range(0, weight_bound + 1, 2) for p in monomial_basis(w)]


def modular_monomials(weight: int) -> List[Monomial]:
    """Monomials G4^b G6^c of the given weight (pure modular forms)."""
    return [m for m in monomials(weight) if m[0] == 0]


class _Expander:
    """Expands many polynomials at one truncation, sharing generator powers."""

    def __init__(self, truncation: int):
        self.truncation = truncation
        self._powers: Dict[Tuple[int, int], QSeries] = {}

    def power(self, index: int, exponent: int) -> QSeries:
        key = (index, exponent)
        if key not in self._powers:
            if exponent == 0:
                self._powers[key] = QSeries.one(self.truncation)
            elif exponent == 1:
                self._powers[key] = eisenstein_series(2 * (index + 1), self.truncation)
            else:
                self._powers[key] = self.power(index, exponent - 1) * self.power(index, 1)
        return self._powers[key]

    def monomial(self, monomial: Monomial) -> QSeries:
        result = None
        for index, exponent in enumerate(monomial):
            if exponent:
                factor = self.power(index, exponent)
                result = factor if result is None else result * factor
        return result if result is not None else QSeries.one(self.truncation)

    def expand(self, p: QMPoly) -> QSeries:
        total = QSeries.zero(self.truncation)
        for monomial, coeff in p.items():
            total = total + self.monomial(monomial).scale(coeff)
        return total


def qm_expand(p: QMPoly, truncation: int) -> QSeries:
    return _Expander(truncation).expand(p)


@dataclass(frozen=True)
class Residual:
    """Report for a series that is not in the span it was tested against."""

    index: int
    value: Fraction
    truncation: int
    candidate: Any = None

    def to_json(self) -> Dict[str, Any]:
        candidate = self.candidate.to_json() if hasattr(self.candidate, "to_json") else None
        return {
            "residual": {"index": self.index, "value": format_fraction(self.value)},
            "truncation": self.truncation,
            "candidate": candidate,
        }


@lru_cache(maxsize=None)
def _recognition_solver(weight_bound: int):
    basis = basis_up_to(weight_bound)

    def build(truncation: int):
        expander = _Expander(truncation)
        return [expander.expand(p).coeffs for p in basis]

    truncation, solver = certify(build, len(basis) + 10)
    return truncation, solver, basis


def required_truncation(weight_bound: int) -> int:
    """Smallest doubling of dim + 10 at which the monomial basis of M~_{<=K} has full rank."""
    return _recognition_solver(weight_bound)[0]


def recognize(s: QSeries, weight_bound: int) -> Union[QMPoly, Residual]:
    """Express s as a polynomial of mixed weight <= weight_bound, or report the residual."""
    _check_weight(weight_bound)
    truncation, solver, basis = _recognition_solver(weight_bound)
    if s.truncation < truncation:
        raise InsufficientTruncation(
            f"recognition in weight <= {weight_bound} needs truncation {truncation}, "
            f"series has {s.truncation}",
            required=truncation,
        )
    solution = solver.solve(s.coeffs[: truncation + 1])
    candidate = QMPoly()
    for p, x in zip(basis, solution.coords):
        candidate = candidate + p * x
    if solution.mismatch is not None:
        index, value = solution.mismatch
        return Residual(index, value, s.truncation, candidate)
    if s.truncation > truncation:
        expanded = qm_expand(candidate, s.truncation)
        index = expanded.first_mismatch(s)
        if index is not None:
            return Residual(index, s[index] - expanded[index], s.truncation, candidate)
    return candidate


@lru_cache(maxsize=None)
def eisenstein_poly(two_k: int) -> QMPoly:
    """G_{2k} as a polynomial in G4, G6 (the generators themselves for 2k <= 6)."""
    _check_weight(two_k, minimum=2)
    if two_k <= 6:
        return QMPoly.generator(two_k)
    basis = modular_monomials(two_k)

    def build(truncation: int):
        expander = _Expander(truncation)
        return [expander.monomial(m).coeffs for m in basis]

    truncation, solver = certify(build, len(basis) + 10)
    solution = solver.solve(eisenstein_series(two_k, truncation).coeffs)
    assert solution.consistent, f"G{two_k} is not modular of weight {two_k}"
    return QMPoly(dict(zip(basis, solution.coords)))


def delta(truncation: int) -> QSeries:
    """The discriminant q - 24 q^2 + 252 q^3 - ..., computed as (E4^3 - E6^2)/1728."""
    return qm_expand(DELTA, truncation)


@lru_cache(maxsize=None)
def cusp_basis_polys(weight: int) -> Tuple[QMPoly, ...]:
    """Echelon basis of S_weight as polynomials: element i is q^(i+1) + O(q^(dim+1))."""
    _check_weight(weight)
    if weight < 12:
        return ()
    e4, e6 = G4 * E4_SCALE, G6 * E6_SCALE
    generators = [DELTA * e4**b * e6**c for (_, b, c) in modular_monomials(weight - 12)]
    dim = len(generators)
    if dim == 0:
        return ()
    truncation = dim + 10
    while True:
        expander = _Expander(truncation)
        rows = [expander.expand(g).coeffs[1:] for g in generators]
        matrix = sympy.Matrix(dim, truncation, lambda i, j: to_sympy(rows[i][j]))
        reduced, pivots = matrix.row_join(sympy.eye(dim)).rref()
        if len(pivots) >= dim and tuple(pivots[:dim]) == tuple(range(dim)):
            break
        if truncation > 1 << 12:
            raise InsufficientTruncation(f"cannot echelonize cusp forms of weight {weight}")
        truncation *= 2
    basis = []
    for i in range(dim):
        poly = QMPoly()
        for j, g in enumerate(generators):
            x = from_sympy(reduced[i, truncation + j])
            if x:
                poly = poly + g * x
        basis.append(poly)
    return tuple(basis)


@lru_cache(maxsize=256)
def _cusp_basis(weight: int, truncation: int) -> Tuple[QSeries, ...]:
    expander = _Expander(truncation)
    return tuple(expander.expand(p) for p in cusp_basis_polys(weight))


def cusp_basis(weight: int, truncation: int) -> List[QSeries]:
    return list(_cusp_basis(weight, truncation))


class EisensteinCombination:
    """sum c_{r,w} D^r G_w plus a constant; keys are (r, w) with w even >= 2.

    Coefficients are evaluated directly as c * n^r * sigma_{w-1}(n), so
    scanning far out never multiplies series.
    """

    __slots__ = ("_terms", "constant")

    def __init__(self, terms: Optional[Mapping[Tuple[int, int], Scalar]] = None, constant: Scalar = 0):
        clean = {}
        for (r, w), coeff in (terms or {}).items():
            _check_weight(w, minimum=2)
            if r < 0:
                raise ValueError(f"derivative order must be non-negative, got {r}")
            coeff = Fraction(coeff)
            if coeff:
                clean[(int(r), int(w))] = coeff
        self._terms: Dict[Tuple[int, int], Fraction] = clean
        self.constant = Fraction(constant)

    @property
    def terms(self) -> Dict[Tuple[int, int], Fraction]:
        return dict(self._terms)

    def items(self) -> List[Tuple[Tuple[int, int], Fraction]]:
        return sorted(self._terms.items(), key=lambda item: (item[0][0] + item[0][1] // 2, item[0]))

    def is_zero(self) -> bool:
        return not self._terms and not self.constant

    def max_weight(self) -> int:
        return max((w + 2 * r for (r, w) in self._terms), default=0)

    def coefficient(self, n: int) -> Fraction:
        if n < 0:
            raise ValueError(f"index must be non-negative, got {n}")
        if n == 0:
            total = self.constant
            for (r, w), coeff in self._terms.items():
                if r == 0:
                    total += coeff * eisenstein_series(w, 0).coefficient(0)
            return total
        return sum(
            (coeff * n**r * sigma(w - 1, n) for (r, w), coeff in self._terms.items()),
            Fraction(0),
        )

    def expand(self, truncation: int) -> QSeries:
        total = QSeries.constant(self.constant, truncation)
        for (r, w), coeff in self._terms.items():
            total = total + eisenstein_series(w, truncation).D(r).scale(coeff)
        return total

    def to_poly(self) -> QMPoly:
        total = QMPoly.constant(self.constant)
        for (r, w), coeff in self._terms.items():
            total = total + eisenstein_poly(w).D(r) * coeff
        return total

    def __add__(self, other: "EisensteinCombination") -> "EisensteinCombination":
        terms = defaultdict(Fraction, self._terms)
        for key, coeff in other._terms.items():
            terms[key] += coeff
        return EisensteinCombination(terms, self.constant + other.constant)

    def scale(self, factor: Scalar) -> "EisensteinCombination":
        factor = Fraction(factor)
        return EisensteinCombination(
            {key: c * factor for key, c in self._terms.items()}, self.constant * factor
        )

    def __sub__(self, other: "EisensteinCombination") -> "EisensteinCombination":
        return self + other.scale(-1)

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, EisensteinCombination):
            return NotImplemented
        return self._terms == other._terms and self.constant == other.constant

    __hash__ = None

    def to_json(self) -> Dict[str, Any]:
        return {
            "constant": format_fraction(self.constant),
            "terms": [
                {"derivative_order": r, "weight": w, "coeff": format_fraction(c)}
                for (r, w), c in self.items()
            ],
        }

    def __repr__(self) -> str:
        parts = [format_fraction(self.constant)] if self.constant else []
        parts += [f"{format_fraction(c)}*D^{r}G{w}" for (r, w), c in self.items()]
        return "EisensteinCombination(" + (" + ".join(parts) or "0") + ")"


@dataclass(frozen=True)
class CuspComponent:
    """D^r applied to a weight-w cusp form given by coordinates in the echelon basis."""

    derivative_order: int
    weight: int
    coords: Tuple[Fraction, ...]

    def series(self, truncation: int) -> QSeries:
        total = QSeries.zero(truncation)
        for x, basis_series in zip(self.coords, _cusp_basis(self.weight, truncation)):
            if x:
                total = total + basis_series.D(self.derivative_order).scale(x)
        return total

    def first_nonzero(self) -> Optional[Tuple[int, Fraction]]:
        for index, x in enumerate(self.coords):
            if x:
                return index, x
        return None

    def to_json(self, truncation: Optional[int] = None) -> Dict[str, Any]:
        out = {
            "derivative_order": self.derivative_order,
            "weight": self.weight,
            "coords": [format_fraction(x) for x in self.coords],
        }
        if truncation is not None:
            out["series"] = self.series(truncation).to_json()
        return out


@dataclass(frozen=True)
class Decomposition:
    eisenstein: EisensteinCombination
    cusp_part: Tuple[CuspComponent, ...]
    truncation: int

    @property
    def eisenstein_part(self) -> List[Tuple[int, int, Fraction]]:
        out = [(0, 0, self.eisenstein.constant)] if self.eisenstein.constant else []
        return out + [(r, w, c) for (r, w), c in self.eisenstein.items()]

    def is_eisenstein(self) -> bool:
        return not self.cusp_part

    def expand(self, truncation: int) -> QSeries:
        total = self.eisenstein.expand(truncation)
        for component in self.cusp_part:
            total = total + component.series(truncation)
        return total

    def to_json(self) -> Dict[str, Any]:
        return {
            "truncation": self.truncation,
            "eisenstein_part": [
                {"derivative_order": r, "weight": w, "coeff": format_fraction(c)}
                for r, w, c in self.eisenstein_part
            ],
            "cusp_part": [c.to_json(self.truncation) for c in self.cusp_part],
        }


@lru_cache(maxsize=None)
def _decomposition_solver(two_k: int):
    k = two_k // 2
    labels: List[Tuple[str, int, int, int]] = [("eisenstein", r, two_k - 2 * r, 0) for r in range(k)]
    for r in range(k):
        w = two_k - 2 * r
        labels += [("cusp", r, w, i) for i in range(len(cusp_basis_polys(w)))]

    def build(truncation: int):
        columns = []
        for kind, r, w, i in labels:
            if kind == "eisenstein":
                columns.append(eisenstein_series(w, truncation).D(r).coeffs)
            else:
                columns.append(_cusp_basis(w, truncation)[i].D(r).coeffs)
        return columns

    truncation, solver = certify(build, len(labels) + 10)
    return truncation, solver, labels


def decompose(p: QMPoly) -> Decomposition:
    """Split p gradewise into sum c D^r G_{2k-2r} plus sum D^r (cusp forms)."""
    eisenstein: Dict[Tuple[int, int], Fraction] = {}
    constant = Fraction(0)
    cusp_coords: Dict[Tuple[int, int], List[Fraction]] = {}
    truncation = 0
    for weight in p.weights():
        piece = p.graded_piece(weight)
        if weight == 0:
            constant = piece.terms[(0, 0, 0)]
            continue
        t, solver, labels = _decomposition_solver(weight)
        truncation = max(truncation, t)
        solution = solver.solve(qm_expand(piece, t).coeffs)
        assert solution.consistent, f"weight {weight} piece escaped the decomposition basis"
        for (kind, r, w, i), x in zip(labels, solution.coords):
            if kind == "eisenstein":
                eisenstein[(r, w)] = x
            else:
                cusp_coords.setdefault((r, w), [Fraction(0)] * len(cusp_basis_polys(w)))[i] = x
    cusp_part = tuple(
        CuspComponent(r, w, tuple(coords))
        for (r, w), coords in sorted(cusp_coords.items(), key=lambda item: (item[0][0] + item[0][1] // 2, item[0]))
        if any(coords)
    )
    logger.debug("decomposed weights %s at truncation %d", p.weights(), truncation)
    return Decomposition(EisensteinCombination(eisenstein, constant), cusp_part, truncation)


def dim_check(two_k: int) -> Tuple[int, int]:
    """(#monomials of weight 2k, k + sum_r dim S_{2k-2r}), computed independently."""
    _check_weight(two_k, minimum=2)
    k = two_k // 2
    lhs = len(monomials(two_k))
    rhs = k + sum(len(cusp_basis_polys(two_k - 2 * r)) for r in range(k))
    return lhs, rhs
