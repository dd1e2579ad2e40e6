"""Positive-semidefinite kernels for conditional mixed real/categorical spaces."""

from archk.errors import ArchkError, DomainError, NumericalError
from archk.gp import Dataset, GpModel, fit, log_marginal_likelihood, predict, tune
from archk.kernel import (
    DimKernel,
    ExpQuad,
    GramMatrix,
    KernelSpec,
    RationalQuad,
    cross_gram,
    gram,
    k_combined,
    k_dim,
    kappa,
)
from archk.metric import (
    DimMetricParams,
    dist_cat,
    dist_real,
    embed_cat,
    embed_real,
    omega,
    rho_star_crossover,
    rho_star_paper,
)
from archk.space import (
    Categorical,
    Clause,
    Config,
    ParamSpace,
    Real,
    ancestors,
    is_active,
    sample_config,
    validate_config,
    validate_space,
)
from archk.verify import CheckReport, check_isometry, check_psd, check_triangle

__version__ = "0.1.0"

__all__ = [
    "ArchkError", "DomainError", "NumericalError",
    "Dataset", "GpModel", "fit", "log_marginal_likelihood", "predict", "tune",
    "DimKernel", "ExpQuad", "GramMatrix", "KernelSpec", "RationalQuad",
    "cross_gram", "gram", "k_combined", "k_dim", "kappa",
    "DimMetricParams", "dist_cat", "dist_real", "embed_cat", "embed_real", "omega",
    "rho_star_crossover", "rho_star_paper",
    "Categorical", "Clause", "Config", "ParamSpace", "Real",
    "ancestors", "is_active", "sample_config", "validate_config", "validate_space",
    "CheckReport", "check_isometry", "check_psd", "check_triangle",
]
