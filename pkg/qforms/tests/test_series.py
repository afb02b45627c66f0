import random
from fractions import Fraction

import pytest

from qforms.series import (
    InsufficientTruncation,
    QSeries,
    TruncationError,
    format_fraction,
    parse_fraction,
)


def test_construction_pads_and_trims():
    s = QSeries([1, 2], truncation=4)
    assert s.truncation == 4
    assert s.coeffs == (1, 2, 0, 0, 0)

    t = QSeries([1, 2, 3, 4], truncation=1)
    assert t.coeffs == (1, 2)

    with pytest.raises(ValueError, match="non-negative"):
        QSeries([1], truncation=-1)
    with pytest.raises(ValueError):
        QSeries([])


def test_coefficient_past_truncation():
    s = QSeries([1, 1, 1])
    assert s[2] == 1
    with pytest.raises(TruncationError, match="known only to q\\^2"):
        s.coefficient(3)
    # TruncationError is an IndexError so slicing-style callers can catch it.
    with pytest.raises(IndexError):
        s[5]
    with pytest.raises(TruncationError):
        s.truncate(3)


def test_arithmetic():
    one_plus_q = QSeries([1, 1], truncation=3)
    assert (one_plus_q * one_plus_q).coeffs == (1, 2, 1, 0)
    assert (one_plus_q**3).coeffs == (1, 3, 3, 1)
    assert (one_plus_q - one_plus_q).is_zero()
    assert (2 * one_plus_q).coeffs == (2, 2, 0, 0)
    assert (-one_plus_q)[1] == -1

    half = QSeries([Fraction(1, 2), Fraction(1, 3)])
    square = half * half
    assert square.coeffs == (Fraction(1, 4), Fraction(1, 3))


def test_mixed_truncation_takes_minimum():
    short = QSeries([1, 1])
    long = QSeries([1, 2, 3, 4])
    assert (short + long).truncation == 1
    assert (short * long).coeffs == (1, 3)


def test_geometric_series_inverse():
    # (1 - q) * sum q^n = 1
    geometric = QSeries([1] * 11)
    assert (QSeries([1, -1], truncation=10) * geometric) == QSeries.one(10)


def test_derivative():
    s = QSeries([5, 1, 1, 1])
    assert s.D().coeffs == (0, 1, 2, 3)
    assert s.D(2).coeffs == (0, 1, 4, 9)
    assert s.D(0) is s
    with pytest.raises(ValueError):
        s.D(-1)


def test_mismatch_and_valuation():
    a = QSeries([0, 0, 3, 4])
    b = QSeries([0, 0, 3, 5, 6])
    assert a.valuation() == 2
    assert a.first_mismatch(b) == 3
    assert not a.agrees_with(b)
    assert a.truncate(2) == b.truncate(2)
    assert QSeries.zero(3).valuation() is None


def test_json():
    s = QSeries([Fraction(-1, 24), 1, 3])
    data = s.to_json()
    assert data == {"truncation": 2, "coeffs": ["-1/24", "1", "3"]}
    assert QSeries.from_json(data) == s

    with pytest.raises(ValueError, match="3 coefficients for truncation 5"):
        QSeries.from_json({"truncation": 5, "coeffs": ["1", "2", "3"]})
    with pytest.raises(ValueError, match="needs"):
        QSeries.from_json({"coeffs": ["1"]})


def test_fraction_text():
    assert format_fraction(Fraction(6, 3)) == "2"
    assert format_fraction(Fraction(-11, 1440)) == "-11/1440"
    assert parse_fraction(" 7/21 ") == Fraction(1, 3)
    assert parse_fraction(4) == 4
    with pytest.raises(ValueError):
        parse_fraction(1.5)
    with pytest.raises(ValueError, match="cannot parse"):
        parse_fraction("1/0")
    with pytest.raises(ValueError, match="exact"):
        QSeries([0.1])


def test_insufficient_truncation_carries_requirement():
    error = InsufficientTruncation("too short", required=40)
    assert isinstance(error, ValueError)
    assert error.required == 40


def random_series(rng: random.Random, truncation: int) -> QSeries:
    return QSeries(
        [Fraction(rng.randint(-20, 20), rng.randint(1, 6)) for _ in range(truncation + 1)]
    )


def test_ring_laws():
    rng = random.Random(17)
    for _ in range(20):
        truncation = rng.randint(0, 64)
        f, g, h = (random_series(rng, truncation) for _ in range(3))
        assert f + g == g + f
        assert f * g == g * f
        assert (f + g) + h == f + (g + h)
        assert (f * g) * h == f * (g * h)
        assert f * (g + h) == f * g + f * h
        assert f * QSeries.one(truncation) == f
        assert f + QSeries.zero(truncation) == f


def test_derivative_is_a_derivation():
    rng = random.Random(23)
    for _ in range(20):
        truncation = rng.randint(0, 64)
        f, g = random_series(rng, truncation), random_series(rng, truncation)
        assert (f * g).D() == f.D() * g + f * g.D()
        m = rng.randint(1, 5)
        repeated = f
        for _ in range(m):
            repeated = repeated.D()
        assert repeated == f.D(m)
