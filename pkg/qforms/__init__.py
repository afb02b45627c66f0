from qforms.macmahon import (
    MMExpression,
    PartVector,
    U_series,
    U_vec_series,
    builtin_expressions,
    eval_expression,
    macmahon_M,
    macmahonesque_M,
    search_prime_detecting,
)
from qforms.number_theory import bernoulli, divisors, is_prime, sigma
from qforms.omega import (
    HFormId,
    OmegaVerdict,
    Status,
    dh_span_solve,
    e_membership,
    e_space_basis,
    h_coeff,
    h_form,
    omega_check,
    revalidate,
)
from qforms.quasimodular import (
    DELTA,
    G2,
    G4,
    G6,
    QMPoly,
    decompose,
    dim_check,
    eisenstein_series,
    qm_D,
    qm_expand,
    recognize,
    required_truncation,
)
from qforms.series import InsufficientTruncation, QSeries, TruncationError

__all__ = [
    "DELTA",
    "G2",
    "G4",
    "G6",
    "HFormId",
    "InsufficientTruncation",
    "MMExpression",
    "OmegaVerdict",
    "PartVector",
    "QMPoly",
    "QSeries",
    "Status",
    "TruncationError",
    "U_series",
    "U_vec_series",
    "bernoulli",
    "builtin_expressions",
    "decompose",
    "dh_span_solve",
    "dim_check",
    "divisors",
    "e_membership",
    "e_space_basis",
    "eisenstein_series",
    "eval_expression",
    "h_coeff",
    "h_form",
    "is_prime",
    "macmahon_M",
    "macmahonesque_M",
    "omega_check",
    "qm_D",
    "qm_expand",
    "recognize",
    "required_truncation",
    "revalidate",
    "search_prime_detecting",
    "sigma",
]
