"""Exact rational linear algebra on top of sympy matrices.

Columns are passed as sequences of `Fraction` (one entry per row). All
solving goes through `SpanSolver`, which fixes a square full-rank block of
rows once so that repeated solves against the same columns are a single
matrix-vector product followed by an exact residual check.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Callable, List, Optional, Sequence, Tuple

import sympy

from qforms.series import InsufficientTruncation

logger = logging.getLogger(__name__)

Vector = Sequence[Fraction]


def to_sympy(value: Fraction) -> sympy.Rational:
    return sympy.Rational(value.numerator, value.denominator)


def from_sympy(value) -> Fraction:
    value = sympy.Rational(value)
    return Fraction(int(value.p), int(value.q))


def matrix_from_columns(columns: Sequence[Vector]) -> sympy.Matrix:
    assert len(columns) > 0
    height = len(columns[0])
    assert all(len(c) == height for c in columns), "columns must have equal length"
    return sympy.Matrix(
        height, len(columns), lambda i, j: to_sympy(Fraction(columns[j][i]))
    )


@dataclass(frozen=True)
class Solution:
    coords: Tuple[Fraction, ...]
    # First (row, residual value) where target and the combination differ.
    mismatch: Optional[Tuple[int, Fraction]]

    @property
    def consistent(self) -> bool:
        return self.mismatch is None


class SpanSolver:
    """Solver for target = sum_j x_j columns[j] with certified uniqueness.

    Raises InsufficientTruncation when the columns are linearly dependent on
    the rows provided.
    """

    def __init__(self, columns: Sequence[Vector]):
        self.columns: List[Tuple[Fraction, ...]] = [tuple(Fraction(x) for x in c) for c in columns]
        self.height = len(self.columns[0]) if self.columns else 0
        if not self.columns:
            self.pivot_rows: Tuple[int, ...] = ()
            self._inverse = None
            return
        matrix = matrix_from_columns(self.columns)
        _, pivots = matrix.T.rref()
        if len(pivots) < len(self.columns):
            raise InsufficientTruncation(
                f"{len(self.columns)} columns have rank {len(pivots)} on {self.height} rows"
            )
        self.pivot_rows = tuple(pivots)
        block = matrix.extract(list(self.pivot_rows), list(range(len(self.columns))))
        self._inverse = block.inv()
        logger.debug(
            "span solver: %d columns certified on %d rows", len(self.columns), self.height
        )

    @property
    def size(self) -> int:
        return len(self.columns)

    def combine(self, coords: Sequence[Fraction]) -> List[Fraction]:
        out = [Fraction(0)] * self.height
        for x, column in zip(coords, self.columns):
            if x:
                for i, value in enumerate(column):
                    if value:
                        out[i] += x * value
        return out

    def solve(self, target: Vector) -> Solution:
        if len(target) < self.height:
            raise InsufficientTruncation(
                f"target has {len(target)} entries but the solver needs {self.height}",
                required=self.height - 1,
            )
        if not self.columns:
            coords: Tuple[Fraction, ...] = ()
        else:
            rhs = sympy.Matrix([to_sympy(Fraction(target[i])) for i in self.pivot_rows])
            coords = tuple(from_sympy(x) for x in self._inverse * rhs)
        combined = self.combine(coords)
        for i in range(self.height):
            residual = Fraction(target[i]) - combined[i]
            if residual:
                return Solution(coords, (i, residual))
        return Solution(coords, None)


def certify(
    build_columns: Callable[[int], Sequence[Vector]],
    start: int,
    limit: int = 1 << 14,
) -> Tuple[int, SpanSolver]:
    """Find a truncation at which the columns have full rank.

    `build_columns(t)` must return columns with t + 1 entries (indices 0..t).
    Starts at `start` and doubles until the rank is full.
    """
    truncation = max(start, 1)
    while True:
        try:
            solver = SpanSolver(build_columns(truncation))
        except InsufficientTruncation:
            if truncation >= limit:
                raise
            truncation *= 2
            logger.debug("rank deficient, doubling truncation to %d", truncation)
            continue
        logger.debug("certified truncation %d for %d columns", truncation, solver.size)
        return truncation, solver


def nullspace(rows: Sequence[Vector]) -> List[List[Fraction]]:
    """Basis of {x : rows . x = 0} over Q."""
    matrix = sympy.Matrix([[to_sympy(Fraction(x)) for x in row] for row in rows])
    return [[from_sympy(x) for x in vector] for vector in matrix.nullspace()]


def primitive(vector: Sequence[Fraction]) -> List[int]:
    """Scale to integers with content 1; the first nonzero entry keeps its sign."""
    vector = [Fraction(x) for x in vector]
    scale = lcm(*(x.denominator for x in vector)) if vector else 1
    integers = [int(x * scale) for x in vector]
    content = reduce(gcd, (abs(x) for x in integers), 0)
    if content == 0:
        return integers
    return [x // content for x in integers]
