"""Poisoning-robust linear regression via subspace recovery and trimmed PCR."""

from .baselines import RidgeConfig, ols_fit, ridge_fit
from .datagen import AttackSpec, PoisonedDataset, SyntheticConfig, assemble, gen_eval_set
from .errors import (
    DimensionMismatchError,
    EnumerationCapError,
    MalformedMatrixError,
    NoFeasibleSubsetError,
    RankDeficientError,
    TpcrError,
    TrimmedFitError,
)
from .io import read_matrix, read_vector, write_matrix
from .linalg import DEFAULT_TOL, Tolerances, best_rank_k, numeric_rank
from .oracles import RecoverabilityVerdict, max_subspace_cardinality, noise_residual, recoverability, submatrix_residual
from .recovery import (
    RecoveryOptions,
    RecoveryResult,
    identification_rate,
    recover_efficient,
    recover_exact,
    recover_noise_free,
    span_distance,
)
from .regression import (
    RegressionResult,
    ToleranceBound,
    expected_quadratic_loss,
    predict,
    rmse,
    tolerance_bound,
    tpcr_fit,
)
from .trimmed import TrimmedProblem, TrimResult, solve_trimmed, solve_trimmed_multistart

__version__ = "0.1.0"
