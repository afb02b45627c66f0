import random
from fractions import Fraction

import pytest

from qforms.number_theory import is_prime, sigma
from qforms.omega import (
    HFormId,
    SpanCombination,
    Status,
    dh_eisenstein,
    dh_span_coordinates,
    dh_span_solve,
    e_membership,
    e_space_basis,
    e_space_keys,
    h_coeff,
    h_family,
    h_form,
    h_poly,
    h_series,
    omega_check,
    revalidate,
)
from qforms.quasimodular import (
    DELTA,
    G2,
    G4,
    EisensteinCombination,
    Residual,
    delta,
    eisenstein_series,
    qm_expand,
    required_truncation,
)
from qforms.series import InsufficientTruncation, QSeries


def test_h_form_id_validation():
    assert HFormId(6).derivative_order == 0
    assert HFormId(8, 2).top_weight == 12
    with pytest.raises(ValueError, match="even k >= 6"):
        HFormId(4)
    with pytest.raises(ValueError, match="even k >= 6"):
        HFormId(7)
    with pytest.raises(ValueError, match="non-negative"):
        HFormId(6, -1)


def test_h_coeff_examples():
    assert h_coeff(6, 0) == Fraction(-11, 1440)
    assert h_coeff(6, 4) == 3
    assert h_coeff(6, 5) == 0
    assert h_coeff(8, 2) == 0
    assert h_coeff(8, 4) == 3


def test_h_coeff_closed_forms():
    for n in range(1, 60):
        assert h_coeff(6, n) == Fraction((n * n - n + 1) * sigma(1, n) - sigma(3, n), 6)
        for k in (8, 10, 14):
            expected = (
                -n * n * sigma(k - 7, n) + (n * n + 1) * sigma(k - 5, n) - sigma(k - 3, n)
            )
            assert h_coeff(k, n) == Fraction(expected, 24)


@pytest.mark.parametrize("k", list(range(6, 32, 2)))
def test_h_forms_detect_primes(k):
    for n in range(2, 5001):
        value = h_coeff(k, n)
        assert value >= 0
        assert (value == 0) == is_prime(n)


@pytest.mark.parametrize("k", [6, 8, 10, 12, 14, 16])
@pytest.mark.parametrize("m", [0, 1, 2, 3])
def test_h_form_symbolic_matches_series(k, m):
    form = HFormId(k, m)
    poly, series = h_form(form, 120)
    assert qm_expand(poly, 120) == series
    assert all(series[n] == n**m * h_coeff(k, n) for n in range(1, 121))


def test_h_series_derivative_scaling():
    assert h_series(HFormId(6, 2), 4)[4] == 48


def test_h_poly_weights():
    assert h_poly(HFormId(6)).max_weight() == 6
    assert h_poly(HFormId(10, 2)).max_weight() == 14


def test_e_space_basis():
    assert e_space_keys(2) == [(0, 2)]
    assert e_space_keys(4) == [(0, 2), (1, 2), (0, 4)]
    assert e_space_keys(6) == [(0, 2), (1, 2), (2, 2), (0, 4), (1, 4), (0, 6)]
    basis = e_space_basis(4, 10)
    assert [poly for poly, _ in basis][2] == G4
    assert basis[1][1] == eisenstein_series(2, 10).D()


def test_e_membership():
    truncation = required_truncation(4)
    result = e_membership(eisenstein_series(4, truncation), 4)
    assert result == EisensteinCombination({(0, 4): 1})

    divisor_sums = QSeries([0] + [sigma(1, n) for n in range(1, 41)])
    result = e_membership(divisor_sums, 2)
    assert result == EisensteinCombination({(0, 2): 1}, constant=Fraction(1, 24))

    result = e_membership(delta(required_truncation(12)), 12)
    assert isinstance(result, Residual)

    with pytest.raises(InsufficientTruncation):
        e_membership(eisenstein_series(4, 3), 4)


def test_h_family_cutoff():
    assert h_family(2) == [HFormId(6, 0)]
    family = h_family(6)
    assert HFormId(6, 2) in family and HFormId(10, 0) in family
    assert all(form.top_weight <= 10 for form in family)


def test_dh_span_solve():
    truncation = required_truncation(10)
    result = dh_span_solve(h_series(HFormId(6), required_truncation(6)), 6)
    assert isinstance(result, SpanCombination)
    assert result.coeffs == {HFormId(6): 1}

    target = h_series(HFormId(6), truncation).scale(6) + h_series(HFormId(8, 1), truncation).scale(2)
    result = dh_span_solve(target, 10)
    assert result.coeffs == {HFormId(6): 6, HFormId(8, 1): 2}
    assert result.cutoff == 14

    result = dh_span_solve(eisenstein_series(2, required_truncation(6)), 6)
    assert isinstance(result, Residual)


def test_span_coordinates_round_trip():
    rng = random.Random(3)
    family = h_family(12)
    for _ in range(10):
        coeffs = {
            form: Fraction(rng.randint(0, 7), rng.randint(1, 4))
            for form in rng.sample(family, 4)
        }
        built = SpanCombination(coeffs)
        combination, leftover = dh_span_coordinates(built.to_eisenstein(), 12)
        assert not leftover.terms
        assert combination == built


def test_span_combination_json():
    combination = SpanCombination({HFormId(8, 1): Fraction(1, 2), HFormId(6): 3}, 0, 10)
    data = combination.to_json()
    assert data["terms"][0] == {"k": 6, "derivative_order": 0, "coeff": "3"}
    assert SpanCombination.from_json(data) == combination
    assert combination.coefficient(4) == combination.expand(4)[4]


@pytest.mark.parametrize("k", [6, 8, 10, 12, 14, 16])
@pytest.mark.parametrize("m", [0, 1, 2, 3])
def test_omega_accepts_h_forms(k, m):
    form = HFormId(k, m)
    verdict = omega_check(h_poly(form), 2000)
    assert verdict.status is Status.ACCEPT_UP_TO
    assert verdict.accepted
    assert verdict.weight_bound == form.top_weight
    assert verdict.certificate["verified_up_to"] == 2000
    assert "verified only" in verdict.note
    assert revalidate(verdict, h_poly(form))


def test_omega_rejects_g4_at_two():
    verdict = omega_check(G4, 100)
    assert verdict.status is Status.REJECT_COEFFICIENT
    assert verdict.certificate == {"index": 2, "value": "9", "reason": "nonzero_at_prime"}
    assert revalidate(verdict, G4)


def test_omega_rejects_negative_h6():
    form = -h_poly(HFormId(6))
    verdict = omega_check(form, 100)
    assert verdict.status is Status.REJECT_COEFFICIENT
    assert verdict.certificate == {"index": 4, "value": "-3", "reason": "negative"}
    assert revalidate(verdict, form)


def test_omega_rejects_cusp_part():
    form = h_poly(HFormId(6)) + DELTA
    verdict = omega_check(form, 100)
    assert verdict.status is Status.REJECT_CUSPIDAL
    assert verdict.certificate["weight"] == 12
    assert verdict.certificate["coordinate"] == "1"
    assert revalidate(verdict, form)
    assert not revalidate(verdict, h_poly(HFormId(6)))


def test_omega_constant_is_free():
    form = h_poly(HFormId(6)) + 1
    verdict = omega_check(form, 200)
    assert verdict.status is Status.ACCEPT_UP_TO
    assert verdict.certificate["combination"]["constant"] == "1"


def test_omega_series_input():
    truncation = required_truncation(6)
    bound = max(truncation, 50)
    series = h_series(HFormId(6), bound)
    verdict = omega_check(series, bound, 6)
    assert verdict.status is Status.ACCEPT_UP_TO
    assert revalidate(verdict, series)

    primes = QSeries([1 if is_prime(n) else 0 for n in range(bound + 1)])
    verdict = omega_check(primes, bound, 6)
    assert verdict.status is Status.REJECT_NOT_IN_SPAN
    assert verdict.certificate["stage"] == "recognition"
    assert revalidate(verdict, primes)

    with pytest.raises(ValueError, match="weight bound"):
        omega_check(series, bound)
    with pytest.raises(InsufficientTruncation):
        omega_check(series, bound + 1, 6)


def test_omega_weight_bound_validation():
    with pytest.raises(ValueError, match="above the weight bound"):
        omega_check(h_poly(HFormId(8)), 10, weight_bound=6)
    with pytest.raises(ValueError, match="positive"):
        omega_check(G4, 0)


def test_revalidate_detects_tampering():
    verdict = omega_check(G4, 100)
    tampered = type(verdict)(
        verdict.status,
        dict(verdict.certificate, value="10"),
        verdict.bound,
        verdict.weight_bound,
        verdict.cutoff,
    )
    assert not revalidate(tampered, G4)


def test_dh_eisenstein_shifts_derivatives():
    assert dh_eisenstein(HFormId(6, 1)).terms == {
        (3, 2): Fraction(1, 6),
        (2, 2): Fraction(-1, 6),
        (1, 2): Fraction(1, 6),
        (1, 4): Fraction(-1, 6),
    }


def test_omega_rejects_outside_span():
    # With bound 1 the scan cannot see G2's value at 2, so the span solve decides.
    verdict = omega_check(G2, 1)
    assert verdict.status is Status.REJECT_NOT_IN_SPAN
    assert verdict.certificate["stage"] == "span"
    assert verdict.certificate["residual"] == {"index": 1, "value": "1"}
    assert verdict.cutoff == 6
    assert revalidate(verdict, G2)
