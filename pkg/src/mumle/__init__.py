"""Nuisance-parameter bias: MLE, marginal-updated MLE (MUMLE), MML87 and Firth
estimators for six two-parameter families, with Monte Carlo tooling."""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (
    DegenerateSampleError,
    DomainError,
    ExperimentIntegrityError,
    MumleError,
    NumericError,
    UnsupportedOperationError,
    UsageError,
)
from .estimators import (
    INV_SQRT_PSI_PRIOR,
    EstimateReport,
    EstimatorKind,
    PriorSpec,
    decomposition_residual,
    estimate,
    firth_corrected_estimate,
    fisher_information_determinant,
    mml87_estimate,
    mml87_objective,
    mumle_equivalent_prior,
)
from .models import (
    FAMILIES,
    DataSet,
    Family,
    ParameterPoint,
    get_family,
    linear_score_form,
    log_likelihood,
    nuisance_mle,
    psi_mle,
    psi_mumle,
    psi_score,
    updated_statistic,
)
from .montecarlo import ExperimentConfig, compare_estimators, run_experiment
from .pathology import analytic_bias_variance, check_pathology, check_regularity

__all__ = [
    "__version__",
    "DataSet",
    "DegenerateSampleError",
    "DomainError",
    "EstimateReport",
    "EstimatorKind",
    "ExperimentConfig",
    "ExperimentIntegrityError",
    "FAMILIES",
    "Family",
    "MumleError",
    "NumericError",
    "ParameterPoint",
    "PriorSpec",
    "UnsupportedOperationError",
    "UsageError",
    "INV_SQRT_PSI_PRIOR",
    "analytic_bias_variance",
    "check_pathology",
    "check_regularity",
    "compare_estimators",
    "decomposition_residual",
    "estimate",
    "firth_corrected_estimate",
    "fisher_information_determinant",
    "get_family",
    "linear_score_form",
    "log_likelihood",
    "mml87_estimate",
    "mml87_objective",
    "mumle_equivalent_prior",
    "nuisance_mle",
    "psi_mle",
    "psi_mumle",
    "psi_score",
    "run_experiment",
    "updated_statistic",
]
