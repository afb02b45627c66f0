"""Prime-detecting quasimodular forms.

A q-series is prime-detecting when its coefficients are nonnegative for
n >= 1 and, for n >= 2, vanish exactly at the primes. Quasimodular forms
with this property have no cuspidal part, so they live in the span E of
the Eisenstein series and their derivatives, and inside E they are
combinations of the derivatives D^n H_k of the forms built here.

`omega_check` runs that pipeline on a single form and returns a verdict
whose certificate can be re-derived from the input by `revalidate`.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from qforms.linalg import SpanSolver, certify
from qforms.policies.coefficient_policy import PRIME_DETECTING, first_violation
from qforms.pool import scan_coefficients
from qforms.quasimodular import (
    Decomposition,
    EisensteinCombination,
    QMPoly,
    Residual,
    _check_weight,
    decompose,
    eisenstein_poly,
    eisenstein_series,
    qm_expand,
    recognize,
    required_truncation,
)
from qforms.series import (
    InsufficientTruncation,
    QSeries,
    Scalar,
    format_fraction,
    parse_fraction,
)

logger = logging.getLogger(__name__)

# D^n H_k enters the span solve when 2n + k <= K + SPAN_CUTOFF_MARGIN.
SPAN_CUTOFF_MARGIN = 4

ACCEPT_NOTE = "coefficients verified only for 1 <= n <= bound"


@dataclass(frozen=True, order=True)
class HFormId:
    """Names the form D^derivative_order H_k."""

    k: int
    derivative_order: int = 0

    def __post_init__(self):
        if self.k < 6 or self.k % 2:
            raise ValueError(f"H_k needs an even k >= 6, got k={self.k}")
        if self.derivative_order < 0:
            raise ValueError(
                f"derivative order must be non-negative, got {self.derivative_order}"
            )

    @property
    def top_weight(self) -> int:
        return self.k + 2 * self.derivative_order

    def to_json(self) -> Dict[str, int]:
        return {"k": self.k, "derivative_order": self.derivative_order}

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "HFormId":
        return cls(int(data["k"]), int(data.get("derivative_order", 0)))


@lru_cache(maxsize=None)
def h_eisenstein(k: int) -> EisensteinCombination:
    """H_k written as sum c D^r G_w."""
    HFormId(k)
    if k == 6:
        sixth = Fraction(1, 6)
        return EisensteinCombination(
            {(2, 2): sixth, (1, 2): -sixth, (0, 2): sixth, (0, 4): -sixth}
        )
    part = Fraction(1, 24)
    return EisensteinCombination(
        {(2, k - 6): -part, (2, k - 4): part, (0, k - 4): part, (0, k - 2): -part}
    )


def dh_eisenstein(form: HFormId) -> EisensteinCombination:
    base = h_eisenstein(form.k)
    return EisensteinCombination(
        {(r + form.derivative_order, w): c for (r, w), c in base.items()}
    )


def h_coeff(k: int, n: int) -> Fraction:
    """Coefficient of q^n in H_k."""
    return h_eisenstein(k).coefficient(n)


@lru_cache(maxsize=None)
def h_poly(form: HFormId) -> QMPoly:
    return dh_eisenstein(form).to_poly()


def h_series(form: HFormId, truncation: int) -> QSeries:
    return dh_eisenstein(form).expand(truncation)


def h_form(form: HFormId, truncation: int) -> Tuple[QMPoly, QSeries]:
    """D^n H_k both symbolically and as a series."""
    return h_poly(form), h_series(form, truncation)


def h_family(weight_bound: int) -> List[HFormId]:
    """Every D^n H_k with 2n + k <= weight_bound + SPAN_CUTOFF_MARGIN, ordered by (k, n)."""
    _check_weight(weight_bound)
    cutoff = weight_bound + SPAN_CUTOFF_MARGIN
    return [
        HFormId(k, n)
        for k in range(6, cutoff + 1, 2)
        for n in range((cutoff - k) // 2 + 1)
    ]


def e_space_keys(weight_bound: int) -> List[Tuple[int, int]]:
    """(r, 2j) for D^r G_{2j} with 2j + 2r <= weight_bound, ordered by (2j, r)."""
    _check_weight(weight_bound, minimum=2)
    return [
        (r, w)
        for w in range(2, weight_bound + 1, 2)
        for r in range((weight_bound - w) // 2 + 1)
    ]


def e_space_basis(weight_bound: int, truncation: int) -> List[Tuple[QMPoly, QSeries]]:
    return [
        (eisenstein_poly(w).D(r), eisenstein_series(w, truncation).D(r))
        for r, w in e_space_keys(weight_bound)
    ]


@lru_cache(maxsize=None)
def _e_space_solver(weight_bound: int):
    keys = e_space_keys(weight_bound)

    def build(truncation: int):
        columns = [eisenstein_series(w, truncation).D(r).coeffs for r, w in keys]
        columns.append(QSeries.one(truncation).coeffs)
        return columns

    truncation, solver = certify(build, required_truncation(weight_bound))
    return truncation, solver, keys


def _first_difference(
    s: QSeries, combination: EisensteinCombination, start: int
) -> Optional[int]:
    for n in range(start, s.truncation + 1):
        if s[n] != combination.coefficient(n):
            return n
    return None


def e_membership(s: QSeries, weight_bound: int) -> Union[EisensteinCombination, Residual]:
    """Coordinates of s in span{D^r G_2j : 2j + 2r <= K} plus a constant, or the residual."""
    truncation, solver, keys = _e_space_solver(weight_bound)
    if s.truncation < truncation:
        raise InsufficientTruncation(
            f"membership in E of weight <= {weight_bound} needs truncation {truncation}, "
            f"series has {s.truncation}",
            required=truncation,
        )
    solution = solver.solve(s.coeffs[: truncation + 1])
    *coords, constant = solution.coords
    candidate = EisensteinCombination(dict(zip(keys, coords)), constant)
    if solution.mismatch is not None:
        index, value = solution.mismatch
        return Residual(index, value, s.truncation, candidate)
    index = _first_difference(s, candidate, truncation + 1)
    if index is not None:
        return Residual(index, s[index] - candidate.coefficient(index), s.truncation, candidate)
    return candidate


class SpanCombination:
    """sum c_{n,k} D^n H_k plus a constant, found with a recorded family cutoff."""

    def __init__(self, coeffs: Mapping[HFormId, Scalar], constant: Scalar = 0, cutoff: int = 0):
        self.coeffs: Dict[HFormId, Fraction] = {
            form: Fraction(c) for form, c in sorted(coeffs.items()) if Fraction(c)
        }
        self.constant = Fraction(constant)
        self.cutoff = cutoff

    def to_eisenstein(self) -> EisensteinCombination:
        total = EisensteinCombination(constant=self.constant)
        for form, c in self.coeffs.items():
            total = total + dh_eisenstein(form).scale(c)
        return total

    def coefficient(self, n: int) -> Fraction:
        return self.to_eisenstein().coefficient(n)

    def expand(self, truncation: int) -> QSeries:
        return self.to_eisenstein().expand(truncation)

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, SpanCombination):
            return NotImplemented
        return self.coeffs == other.coeffs and self.constant == other.constant

    __hash__ = None

    def to_json(self) -> Dict[str, Any]:
        return {
            "cutoff": self.cutoff,
            "constant": format_fraction(self.constant),
            "terms": [
                dict(form.to_json(), coeff=format_fraction(c)) for form, c in self.coeffs.items()
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "SpanCombination":
        coeffs = {HFormId.from_json(t): parse_fraction(t["coeff"]) for t in data["terms"]}
        return cls(coeffs, parse_fraction(data.get("constant", "0")), int(data.get("cutoff", 0)))

    def __repr__(self) -> str:
        parts = [format_fraction(self.constant)] if self.constant else []
        parts += [
            f"{format_fraction(c)}*D^{f.derivative_order}H{f.k}" for f, c in self.coeffs.items()
        ]
        return "SpanCombination(" + (" + ".join(parts) or "0") + ")"


@lru_cache(maxsize=None)
def _span_solver(weight_bound: int, extra_keys: Tuple[Tuple[int, int], ...]):
    family = h_family(weight_bound)
    columns = [dh_eisenstein(form).terms for form in family]
    keys = sorted(set(extra_keys).union(*columns), key=lambda key: (key[1], key[0]))
    solver = SpanSolver([[column.get(key, Fraction(0)) for key in keys] for column in columns])
    return family, keys, solver


def dh_span_coordinates(
    eisenstein: EisensteinCombination, weight_bound: int
) -> Tuple[SpanCombination, EisensteinCombination]:
    """Write an Eisenstein combination in the D^n H_k family.

    Works on exact (r, w) coordinates, which are unique because the D^r G_w
    are linearly independent. Returns the best combination and the leftover,
    which is zero (apart from the constant) exactly when the input is in the span.
    """
    target = eisenstein.terms
    family, keys, solver = _span_solver(weight_bound, tuple(sorted(target)))
    solution = solver.solve([target.get(key, Fraction(0)) for key in keys])
    combination = SpanCombination(
        dict(zip(family, solution.coords)),
        eisenstein.constant,
        weight_bound + SPAN_CUTOFF_MARGIN,
    )
    leftover = eisenstein - combination.to_eisenstein()
    return combination, leftover


def _first_nonzero(combination: EisensteinCombination, limit: int) -> Tuple[int, Fraction]:
    for n in range(1, limit + 1):
        value = combination.coefficient(n)
        if value:
            return n, value
    raise InsufficientTruncation(
        f"leftover {combination!r} vanishes on 1..{limit}", required=2 * limit
    )


def dh_span_solve(s: QSeries, weight_bound: int) -> Union[SpanCombination, Residual]:
    """Coordinates of s over {D^n H_k : 2n + k <= K + 4}, or a residual report."""
    membership = e_membership(s, weight_bound)
    if isinstance(membership, Residual):
        return membership
    combination, leftover = dh_span_coordinates(membership, weight_bound)
    if leftover.terms:
        index, value = _first_nonzero(leftover, s.truncation)
        return Residual(index, value, s.truncation, combination)
    return combination


class Status(str, Enum):
    ACCEPT_UP_TO = "ACCEPT_UP_TO"
    REJECT_CUSPIDAL = "REJECT_CUSPIDAL"
    REJECT_NOT_IN_SPAN = "REJECT_NOT_IN_SPAN"
    REJECT_COEFFICIENT = "REJECT_COEFFICIENT"


@dataclass(frozen=True)
class OmegaVerdict:
    status: Status
    certificate: Dict[str, Any]
    bound: int
    weight_bound: int
    cutoff: int
    note: Optional[str] = field(default=None)

    @property
    def accepted(self) -> bool:
        return self.status is Status.ACCEPT_UP_TO

    def to_json(self) -> Dict[str, Any]:
        out = {
            "status": self.status.value,
            "certificate": self.certificate,
            "bound": self.bound,
            "weight_bound": self.weight_bound,
            "cutoff": self.cutoff,
        }
        if self.note:
            out["note"] = self.note
        return out


Form = Union[QMPoly, QSeries]


def _as_poly(f: Form, bound: int, weight_bound: Optional[int]) -> Tuple[Union[QMPoly, Residual], int]:
    if isinstance(f, QMPoly):
        top = f.max_weight()
        if weight_bound is None:
            weight_bound = max(top, 2)
        elif weight_bound < top:
            raise ValueError(f"form has weight {top} above the weight bound {weight_bound}")
        _check_weight(weight_bound)
        return f, weight_bound
    if weight_bound is None:
        raise ValueError("a series input needs an explicit weight bound")
    _check_weight(weight_bound)
    if f.truncation < bound:
        raise InsufficientTruncation(
            f"scan to {bound} needs a series with truncation >= {bound}, got {f.truncation}",
            required=bound,
        )
    return recognize(f, weight_bound), weight_bound


def _cusp_certificate(decomposition: Decomposition) -> Dict[str, Any]:
    component = decomposition.cusp_part[0]
    index, coordinate = component.first_nonzero()
    return {
        "derivative_order": component.derivative_order,
        "weight": component.weight,
        "index": index,
        "coordinate": format_fraction(coordinate),
    }


def omega_check(
    f: Form,
    bound: int,
    weight_bound: Optional[int] = None,
    num_workers: Optional[int] = None,
) -> OmegaVerdict:
    """Decide, up to `bound`, whether f is a prime-detecting quasimodular form.

    Order: cuspidal gate, coefficient scan over 1..bound, then the span solve
    over the D^n H_k family. Rejections are certified; acceptance only holds
    for the scanned coefficients.
    """
    if bound < 1:
        raise ValueError(f"verification bound must be positive, got {bound}")
    poly, weight_bound = _as_poly(f, bound, weight_bound)
    cutoff = weight_bound + SPAN_CUTOFF_MARGIN

    def verdict(status: Status, certificate: Dict[str, Any], note: Optional[str] = None):
        logger.info("omega check: %s", status.value)
        return OmegaVerdict(status, certificate, bound, weight_bound, cutoff, note)

    if isinstance(poly, Residual):
        return verdict(
            Status.REJECT_NOT_IN_SPAN,
            dict(poly.to_json(), stage="recognition"),
            f"series is not quasimodular of weight <= {weight_bound}",
        )

    decomposition = decompose(poly)
    if not decomposition.is_eisenstein():
        return verdict(Status.REJECT_CUSPIDAL, _cusp_certificate(decomposition))

    eisenstein = decomposition.eisenstein
    witness = scan_coefficients(
        eisenstein.coefficient, 1, bound, PRIME_DETECTING, num_workers=num_workers
    )
    if witness is not None:
        return verdict(Status.REJECT_COEFFICIENT, witness.to_json())

    combination, leftover = dh_span_coordinates(eisenstein, weight_bound)
    if leftover.terms:
        index, value = _first_nonzero(leftover, max(bound, 1000))
        return verdict(
            Status.REJECT_NOT_IN_SPAN,
            {
                "stage": "span",
                "residual": {"index": index, "value": format_fraction(value)},
                "leftover": leftover.to_json(),
                "candidate": combination.to_json(),
            },
            f"no combination of D^n H_k with 2n + k <= {cutoff}",
        )
    return verdict(
        Status.ACCEPT_UP_TO,
        {"combination": combination.to_json(), "verified_up_to": bound},
        ACCEPT_NOTE,
    )


def _coefficient(f: Form, n: int) -> Fraction:
    if isinstance(f, QSeries):
        return f[n]
    return qm_expand(f, n)[n]


def revalidate(verdict: OmegaVerdict, f: Form) -> bool:
    """Re-derive the verdict's certificate from f alone; True iff it reproduces."""
    certificate = verdict.certificate
    status = verdict.status
    if status is Status.REJECT_COEFFICIENT:
        n = certificate["index"]
        value = _coefficient(f, n)
        return (
            format_fraction(value) == certificate["value"]
            and first_violation(n, value, PRIME_DETECTING) == certificate["reason"]
        )

    if isinstance(f, QSeries):
        poly = recognize(f, verdict.weight_bound)
        if isinstance(poly, Residual):
            if status is not Status.REJECT_NOT_IN_SPAN:
                return False
            return dict(poly.to_json(), stage="recognition") == certificate
    else:
        poly = f
    decomposition = decompose(poly)

    if status is Status.REJECT_CUSPIDAL:
        return not decomposition.is_eisenstein() and _cusp_certificate(decomposition) == certificate
    if not decomposition.is_eisenstein():
        return False

    combination, leftover = dh_span_coordinates(decomposition.eisenstein, verdict.weight_bound)
    if status is Status.REJECT_NOT_IN_SPAN:
        if not leftover.terms:
            return False
        index, value = _first_nonzero(leftover, max(verdict.bound, 1000))
        return certificate.get("residual") == {"index": index, "value": format_fraction(value)}

    claimed = SpanCombination.from_json(certificate["combination"])
    return claimed == combination and claimed.to_eisenstein() == decomposition.eisenstein
