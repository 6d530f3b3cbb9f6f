"""Prefix-sum characteristics of Sylvester and Hadamard matrices under symmetric norms."""

from .bounds import (
    BoundReport,
    hadamard_lower,
    hadamard_report,
    hadamard_upper_subsym,
    hat_rho_bounds,
    lp_rho_n_bounds,
    sylvester_lower,
    sylvester_report,
    sylvester_upper,
    type_p_upper,
    upper_terms_comparison,
)
from .characteristics import (
    AlphaTable,
    RhoProfile,
    alpha_table,
    f_distribution,
    f_exponent,
    hat_rho,
    max_abs_alpha,
    ratio_diagnostics,
    rho_l1_closed_form,
    rho_profile,
    sylvester_profile,
)
from .errors import (
    BoundViolation,
    CheckpointError,
    DomainError,
    FormatError,
    HadamardRhoError,
    PreconditionError,
    ResourceError,
    ValidationError,
    WitnessMismatch,
)
from .matrices import (
    HadamardWitness,
    SignMatrix,
    catalog_representative,
    enumerate_hadamard,
    parse_matrix,
    sylvester_entry,
    sylvester_matrix,
    transform,
    validate_hadamard,
)
from .norms import LambdaSeq, NormSpec, check_lambda_seq, lambda_of, norm_eval, parse_norm
from .search import (
    SearchResult,
    conjecture_min,
    rho_n,
    rho_n_exhaustive,
    rho_n_subset_sign,
    signed_prefix_max,
)

__version__ = "0.1.0"

__all__ = [
    "AlphaTable",
    "BoundReport",
    "BoundViolation",
    "CheckpointError",
    "DomainError",
    "FormatError",
    "HadamardRhoError",
    "HadamardWitness",
    "LambdaSeq",
    "NormSpec",
    "PreconditionError",
    "ResourceError",
    "RhoProfile",
    "SearchResult",
    "SignMatrix",
    "ValidationError",
    "WitnessMismatch",
    "alpha_table",
    "catalog_representative",
    "check_lambda_seq",
    "conjecture_min",
    "enumerate_hadamard",
    "f_distribution",
    "f_exponent",
    "hadamard_lower",
    "hadamard_report",
    "hadamard_upper_subsym",
    "hat_rho",
    "hat_rho_bounds",
    "lambda_of",
    "lp_rho_n_bounds",
    "max_abs_alpha",
    "norm_eval",
    "parse_matrix",
    "parse_norm",
    "ratio_diagnostics",
    "rho_l1_closed_form",
    "rho_n",
    "rho_n_exhaustive",
    "rho_n_subset_sign",
    "rho_profile",
    "signed_prefix_max",
    "sylvester_entry",
    "sylvester_lower",
    "sylvester_matrix",
    "sylvester_profile",
    "sylvester_report",
    "sylvester_upper",
    "transform",
    "type_p_upper",
    "upper_terms_comparison",
    "validate_hadamard",
    "__version__",
]
