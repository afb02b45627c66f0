import random
from fractions import Fraction

import pytest

from qforms.macmahon import U_series, macmahon_M
from qforms.quasimodular import (
    DELTA,
    G2,
    G4,
    G6,
    EisensteinCombination,
    QMPoly,
    Residual,
    basis_up_to,
    cusp_basis,
    cusp_basis_polys,
    decompose,
    delta,
    dim_check,
    eisenstein_poly,
    eisenstein_series,
    monomials,
    qm_D,
    qm_expand,
    recognize,
    required_truncation,
)
from qforms.series import InsufficientTruncation, QSeries


def random_poly(rng: random.Random, weight_bound: int) -> QMPoly:
    p = QMPoly()
    for w in range(0, weight_bound + 1, 2):
        for m in monomials(w):
            if rng.random() < 0.5:
                p = p + QMPoly.monomial(m, Fraction(rng.randint(-9, 9), rng.randint(1, 5)))
    return p


def test_eisenstein_constants():
    assert eisenstein_series(4, 3).coeffs == (Fraction(1, 240), 1, 9, 28)
    assert eisenstein_series(2, 2).coeffs == (Fraction(-1, 24), 1, 3)
    assert eisenstein_series(6, 1)[0] == Fraction(-1, 504)
    with pytest.raises(ValueError, match="even integer"):
        eisenstein_series(3, 5)


def test_delta_coefficients():
    assert delta(5).coeffs == (0, 1, -24, 252, -1472, 4830)
    assert DELTA == 8000 * G4**3 - 147 * G6**2


@pytest.mark.parametrize(
    "generator,rule",
    [
        (G2, -2 * G2**2 + Fraction(5, 6) * G4),
        (G4, -8 * G2 * G4 + Fraction(7, 10) * G6),
        (G6, -12 * G2 * G6 + Fraction(400, 7) * G4**2),
    ],
)
def test_ramanujan_identities(generator, rule):
    assert qm_D(generator) == rule
    truncation = 300
    assert qm_expand(rule, truncation) == qm_expand(generator, truncation).D()


def test_derivation_commutes_with_expansion():
    rng = random.Random(7)
    for _ in range(50):
        p = random_poly(rng, 20)
        assert qm_expand(qm_D(p), 200) == qm_expand(p, 200).D()
    for _ in range(5):
        p = random_poly(rng, 12)
        assert qm_expand(p.D(2), 40) == qm_expand(p, 40).D(2)


def test_polynomial_arithmetic_and_json():
    p = G2 * G4 + 3
    assert p.weights() == [0, 6]
    assert p.graded_piece(6) == G2 * G4
    assert p - 3 == G2 * G4
    assert QMPoly.from_json(p.to_json()) == p
    assert p.to_json()["terms"][0] == {"monomial": [0, 0, 0], "coeff": "3"}
    with pytest.raises(ValueError, match="three exponents"):
        QMPoly.from_json({"terms": [{"monomial": [1, 0], "coeff": "1"}]})
    with pytest.raises(ValueError):
        QMPoly({(-1, 0, 0): 1})
    with pytest.raises(ValueError):
        QMPoly.generator(8)


def test_monomial_order():
    assert monomials(6) == [(3, 0, 0), (1, 1, 0), (0, 0, 1)]
    assert len(basis_up_to(6)) == 7


def test_eisenstein_poly():
    assert eisenstein_poly(4) == G4
    assert eisenstein_poly(8) == 120 * G4**2
    assert qm_expand(eisenstein_poly(12), 30) == eisenstein_series(12, 30)


def test_recognize():
    truncation = required_truncation(12)
    assert recognize(delta(truncation), 12) == DELTA

    square = qm_expand(G2**2, 3 * required_truncation(4))
    assert recognize(square, 4) == G2**2

    with pytest.raises(InsufficientTruncation) as info:
        recognize(delta(5), 12)
    assert info.value.required == truncation


def test_recognize_divisor_sum_generating_series():
    u1 = U_series(1, 200)
    assert recognize(u1, 2) == G2 + Fraction(1, 24)

    u2 = U_series(2, 200)
    poly = recognize(u2, 6)
    assert poly == Fraction(3, 640) + Fraction(1, 8) * G2 + Fraction(1, 2) * G2**2 - Fraction(1, 12) * G4
    expanded = qm_expand(poly, 200)
    assert all(expanded[n] == macmahon_M(2, n) for n in range(1, 201))


def test_recognize_reports_residual():
    truncation = required_truncation(4)
    primes = QSeries([0, 0, 1, 1, 0, 1] + [0] * (truncation - 5))
    result = recognize(primes, 4)
    assert isinstance(result, Residual)
    assert result.truncation == truncation
    assert result.to_json()["residual"]["index"] == result.index


def test_cusp_basis():
    assert cusp_basis_polys(10) == ()
    assert cusp_basis_polys(12) == (DELTA,)
    (form,) = cusp_basis(16, 10)
    assert form[0] == 0 and form[1] == 1
    basis = cusp_basis(24, 10)
    assert len(basis) == 2
    assert [s.coeffs[:3] for s in basis] == [(0, 1, 0), (0, 0, 1)]


def test_decompose_examples():
    result = decompose(DELTA)
    assert result.eisenstein.is_zero()
    (component,) = result.cusp_part
    assert (component.derivative_order, component.weight) == (0, 12)
    assert component.coords == (1,)

    result = decompose(G2**2)
    assert result.is_eisenstein()
    assert result.eisenstein_part == [(0, 4, Fraction(5, 12)), (1, 2, Fraction(-1, 2))]


def test_decompose_round_trip():
    rng = random.Random(11)
    for _ in range(50):
        p = random_poly(rng, 24)
        result = decompose(p)
        assert result.expand(60) == qm_expand(p, 60)


def test_eisenstein_combination_coefficients():
    combination = EisensteinCombination({(0, 4): 3, (2, 2): Fraction(1, 2)}, constant=5)
    expanded = combination.expand(30)
    assert all(combination.coefficient(n) == expanded[n] for n in range(31))
    assert qm_expand(combination.to_poly(), 30) == expanded
    assert (combination - combination).is_zero()
    with pytest.raises(ValueError):
        EisensteinCombination({(-1, 4): 1})


@pytest.mark.parametrize("two_k", list(range(2, 42, 2)))
def test_dimension_count(two_k):
    lhs, rhs = dim_check(two_k)
    assert lhs == rhs


def test_dimension_count_value():
    assert dim_check(16) == (10, 10)
