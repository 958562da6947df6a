"""Diagonal Riccati stability toolkit for linear time-delay systems.

Decides whether a pair (A, B) admits diagonal P, Q > 0 with
A'P + PA + Q + PBQ^{-1}B'P negative definite, which certifies delay-
independent stability of dx/dt = A x(t) + B x(t - tau). Provides a
certifying solver with a refutation search, closed-form tests for
structured classes, scaling transforms that carry certificates along,
P-matrix utilities, a delay simulator, and a randomized self-test battery.
"""

from .classes import (
    ClassTag,
    ClassVerdict,
    Stability,
    chain_feedback_condition,
    classify,
    correlation_form_bound,
    correlation_form_bound_oracle,
    evaluate_class,
    fan_in_feedback_condition,
    metzler_nonneg_condition,
    structured_condition,
)
from .ddesim import (
    DecayReport,
    DelayTrajectory,
    decay_check,
    decay_report,
    export_csv,
    lk_functional,
    simulate,
)
from .errors import (
    ClassMismatchError,
    ContractError,
    DimensionError,
    NumericError,
    RiccstabError,
    SizeGuardError,
)
from .matcore import (
    BlockSymmetric,
    is_hurwitz,
    is_metzler,
    is_nonnegative,
    jacobi_eigh,
    sym_spectrum,
)
from .pmatrix import PMatrixReport, dpd_conjugate, is_p_matrix, p_sign_witness
from .riccati import (
    CorrelationWitness,
    MatrixPair,
    RiccatiCertificate,
    SolveOptions,
    Verdict,
    block_lmi,
    refute_by_sampling,
    riccati_form,
    solve_diagonal,
    verify_certificate,
)
from .transforms import (
    ScalingPair,
    dad_transform,
    dscale_with_certificate,
    hadamard_congruence,
    normalize_correlation,
)

__version__ = "0.1.0"

__all__ = [
    "BlockSymmetric",
    "ClassMismatchError",
    "ClassTag",
    "ClassVerdict",
    "ContractError",
    "CorrelationWitness",
    "DecayReport",
    "DelayTrajectory",
    "DimensionError",
    "MatrixPair",
    "NumericError",
    "PMatrixReport",
    "RiccatiCertificate",
    "RiccstabError",
    "ScalingPair",
    "SizeGuardError",
    "SolveOptions",
    "Stability",
    "Verdict",
    "block_lmi",
    "chain_feedback_condition",
    "classify",
    "correlation_form_bound",
    "correlation_form_bound_oracle",
    "dad_transform",
    "decay_check",
    "decay_report",
    "dpd_conjugate",
    "dscale_with_certificate",
    "evaluate_class",
    "export_csv",
    "fan_in_feedback_condition",
    "hadamard_congruence",
    "is_hurwitz",
    "is_metzler",
    "is_nonnegative",
    "is_p_matrix",
    "jacobi_eigh",
    "lk_functional",
    "metzler_nonneg_condition",
    "normalize_correlation",
    "p_sign_witness",
    "refute_by_sampling",
    "riccati_form",
    "simulate",
    "solve_diagonal",
    "structured_condition",
    "sym_spectrum",
    "verify_certificate",
]
