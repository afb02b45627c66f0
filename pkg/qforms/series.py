import logging
from fractions import Fraction
from math import lcm
from typing import Any, Dict, Iterable, Optional, Tuple, Union

import numpy as np

logger = logging.getLogger(__name__)

Scalar = Union[int, Fraction]


class TruncationError(IndexError):
    """Raised when a coefficient beyond the known precision is requested."""


class InsufficientTruncation(ValueError):
    """Raised when an exact solve cannot be certified at the available precision."""

    def __init__(self, message: str, required: Optional[int] = None):
        super().__init__(message)
        self.required = required


def _exact(value: Scalar) -> Fraction:
    if isinstance(value, float):
        raise ValueError(f"coefficients must be exact, got float {value!r}")
    return Fraction(value)


def format_fraction(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def parse_fraction(text: Union[str, int]) -> Fraction:
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise ValueError(f"coefficient must be a string or integer, got {text!r}")
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as e:
        raise ValueError(f"cannot parse coefficient {text!r}") from e


class QSeries:
    """Truncated formal power series sum_{n <= N} c_n q^n with exact rational coefficients.

    Values are immutable. Binary operations truncate to the smaller operand,
    and reading past the truncation raises instead of returning zero.
    """

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Iterable[Scalar], truncation: Optional[int] = None):
        values = tuple(_exact(c) for c in coeffs)
        if truncation is not None:
            if truncation < 0:
                raise ValueError(f"truncation must be non-negative, got {truncation}")
            if len(values) > truncation + 1:
                values = values[: truncation + 1]
            elif len(values) < truncation + 1:
                values = values + (Fraction(0),) * (truncation + 1 - len(values))
        if len(values) == 0:
            raise ValueError("a series needs at least the constant coefficient")
        self._coeffs: Tuple[Fraction, ...] = values

    @classmethod
    def zero(cls, truncation: int) -> "QSeries":
        return cls((), truncation)

    @classmethod
    def constant(cls, value: Scalar, truncation: int) -> "QSeries":
        return cls((value,), truncation)

    @classmethod
    def one(cls, truncation: int) -> "QSeries":
        return cls.constant(1, truncation)

    @property
    def truncation(self) -> int:
        return len(self._coeffs) - 1

    @property
    def coeffs(self) -> Tuple[Fraction, ...]:
        return self._coeffs

    def coefficient(self, n: int) -> Fraction:
        if n < 0:
            raise ValueError(f"index must be non-negative, got {n}")
        if n > self.truncation:
            raise TruncationError(
                f"coefficient of q^{n} requested but series is known only to q^{self.truncation}"
            )
        return self._coeffs[n]

    def __getitem__(self, n: int) -> Fraction:
        return self.coefficient(n)

    def __len__(self) -> int:
        return len(self._coeffs)

    def truncate(self, truncation: int) -> "QSeries":
        if truncation > self.truncation:
            raise TruncationError(
                f"cannot extend a series known to q^{self.truncation} up to q^{truncation}"
            )
        return QSeries(self._coeffs[: truncation + 1])

    def __add__(self, other: "QSeries") -> "QSeries":
        if not isinstance(other, QSeries):
            return NotImplemented
        n = min(self.truncation, other.truncation)
        return QSeries(a + b for a, b in zip(self._coeffs[: n + 1], other._coeffs))

    def __neg__(self) -> "QSeries":
        return QSeries(-c for c in self._coeffs)

    def __sub__(self, other: "QSeries") -> "QSeries":
        if not isinstance(other, QSeries):
            return NotImplemented
        return self + (-other)

    def scale(self, factor: Scalar) -> "QSeries":
        factor = Fraction(factor)
        return QSeries(factor * c for c in self._coeffs)

    def __mul__(self, other: Union["QSeries", Scalar]) -> "QSeries":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, QSeries):
            return NotImplemented
        n = min(self.truncation, other.truncation)
        left, left_den = _integral(self._coeffs[: n + 1])
        right, right_den = _integral(other._coeffs[: n + 1])
        product = np.zeros(n + 1, dtype=object)
        for i, value in enumerate(left):
            if value:
                product[i:] += right[: n + 1 - i] * value
        denominator = left_den * right_den
        return QSeries(Fraction(int(c), denominator) for c in product)

    def __rmul__(self, other: Scalar) -> "QSeries":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, exponent: int) -> "QSeries":
        assert isinstance(exponent, int) and exponent >= 0
        result = QSeries.one(self.truncation)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            exponent >>= 1
            if exponent:
                base = base * base
        return result

    def D(self, m: int = 1) -> "QSeries":
        """Apply (q d/dq)^m, which sends q^n to n^m q^n."""
        if m < 0:
            raise ValueError(f"derivative order must be non-negative, got {m}")
        if m == 0:
            return self
        return QSeries(n**m * c for n, c in enumerate(self._coeffs))

    def first_mismatch(self, other: "QSeries") -> Optional[int]:
        n = min(self.truncation, other.truncation)
        for i in range(n + 1):
            if self._coeffs[i] != other._coeffs[i]:
                return i
        return None

    def agrees_with(self, other: "QSeries") -> bool:
        return self.first_mismatch(other) is None

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, QSeries):
            return NotImplemented
        return self.agrees_with(other)

    __hash__ = None

    def valuation(self) -> Optional[int]:
        for i, c in enumerate(self._coeffs):
            if c != 0:
                return i
        return None

    def is_zero(self) -> bool:
        return self.valuation() is None

    def to_json(self) -> Dict[str, Any]:
        return {
            "truncation": self.truncation,
            "coeffs": [format_fraction(c) for c in self._coeffs],
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "QSeries":
        if "coeffs" not in data or "truncation" not in data:
            raise ValueError("series document needs 'truncation' and 'coeffs'")
        try:
            coeffs = [parse_fraction(c) for c in data["coeffs"]]
            truncation = int(data["truncation"])
        except TypeError as e:
            raise ValueError(f"malformed series document: {e}") from e
        if len(coeffs) != truncation + 1:
            raise ValueError(
                f"series document has {len(coeffs)} coefficients for truncation {truncation}"
            )
        return cls(coeffs)

    def __repr__(self) -> str:
        head = ", ".join(format_fraction(c) for c in self._coeffs[:6])
        more = ", ..." if self.truncation >= 6 else ""
        return f"QSeries(truncation={self.truncation}, coeffs=[{head}{more}])"


def _integral(coeffs: Tuple[Fraction, ...]) -> Tuple[np.ndarray, int]:
    denominator = lcm(*(c.denominator for c in coeffs))
    values = np.empty(len(coeffs), dtype=object)
    for i, c in enumerate(coeffs):
        values[i] = c.numerator * (denominator // c.denominator)
    return values, denominator
