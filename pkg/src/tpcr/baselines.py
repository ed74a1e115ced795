"""Non-robust reference estimators: OLS and ridge regression."""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError
from .linalg import as_matrix

DEFAULT_RIDGE_LAMBDA = 1e-3


@dataclass(frozen=True)
class RidgeConfig:
    lam: float = DEFAULT_RIDGE_LAMBDA

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValueError("ridge lambda must be >= 0")


def _check(X, y):
    X = as_matrix(X)
    y = np.asarray(y, dtype=float)
    if y.shape != (X.shape[0],):
        raise DimensionMismatchError(f"y has shape {y.shape}, X has {X.shape[0]} rows")
    return X, y


def ols_fit(X, y) -> np.ndarray:
    """Minimum-norm least-squares coefficients."""
    X, y = _check(X, y)
    return np.linalg.lstsq(X, y, rcond=None)[0]


def ridge_fit(X, y, cfg: RidgeConfig = RidgeConfig()) -> np.ndarray:
    """Minimizer of ``||X b - y||^2 + lam ||b||^2`` via the SVD of ``X``."""
    X, y = _check(X, y)
    if cfg.lam == 0:
        return ols_fit(X, y)
    U, s, Vt = np.linalg.svd(X, full_matrices=False)
    return Vt.T @ (s / (s**2 + cfg.lam) * (U.T @ y))
