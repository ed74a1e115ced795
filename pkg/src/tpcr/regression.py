"""Trimmed principal component regression and its evaluation helpers."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError
from .linalg import as_matrix
from .recovery import RecoveryOptions, RecoveryResult, recover_efficient, recover_exact
from .trimmed import linear_trimmed_problem, solve_trimmed_multistart

BASIS_MODES = ("efficient", "exact")


@dataclass
class RegressionResult:
    beta_hat: np.ndarray  # length m
    beta_U_hat: np.ndarray  # length k
    kept: np.ndarray
    train_loss: float  # sum of the n smallest squared residuals
    basis: np.ndarray
    recovery: RecoveryResult = None


def tpcr_fit(
    X,
    y,
    n: int,
    k: int,
    opts: RecoveryOptions = None,
    basis_mode: str = "efficient",
    basis=None,
    fit_restarts: int = 128,
) -> RegressionResult:
    """Fit trimmed PCR on poisoned data.

    1. recover an orthonormal basis ``B`` of the pristine row space
       (``basis_mode`` picks the recovery routine; ``basis`` overrides it),
    2. project ``U = X @ B.T``,
    3. minimize the sum of the ``n`` smallest squared residuals
       ``(y_i - u_i beta_U)^2`` with the trimmed solver, from
       ``fit_restarts`` elemental starts (``k + 1`` random rows) and from
       the recovery keep-set,
    4. lift ``beta_hat = B.T @ beta_U``.
    """
    opts = opts or RecoveryOptions()
    X = as_matrix(X)
    y = np.asarray(y, dtype=float)
    if y.shape != (X.shape[0],):
        raise DimensionMismatchError(f"y has shape {y.shape}, X has {X.shape[0]} rows")
    recovery = None
    warm = []
    if basis is None:
        if basis_mode == "efficient":
            recovery = recover_efficient(X, n, k, opts)
        elif basis_mode == "exact":
            recovery = recover_exact(X, n, k, opts.tol)
        else:
            raise ValueError(f"basis_mode must be one of {BASIS_MODES}")
        basis = recovery.basis
        tau = np.zeros(len(y), dtype=bool)
        tau[recovery.kept] = True
        warm.append(tau)
    basis = as_matrix(basis)
    U = X @ basis.T
    problem = linear_trimmed_problem(U, y, n, tol=opts.tol)
    res = solve_trimmed_multistart(
        problem,
        restarts=fit_restarts,
        seed=opts.seed,
        tol=opts.tol,
        warm_starts=warm,
        start_rows=min(basis.shape[0] + 1, len(y)),
    )
    beta_U = res.theta
    return RegressionResult(
        beta_hat=basis.T @ beta_U,
        beta_U_hat=beta_U,
        kept=res.kept,
        train_loss=res.loss,
        basis=basis,
        recovery=recovery,
    )


def trimmed_loss(U, y, beta_U, n: int) -> float:
    r = (np.asarray(y) - np.asarray(U) @ beta_U) ** 2
    return float(np.sum(np.sort(r)[:n]))


def predict(beta, X_eval) -> np.ndarray:
    X_eval = as_matrix(X_eval)
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (X_eval.shape[1],):
        raise DimensionMismatchError(f"beta has length {beta.size}, X_eval has {X_eval.shape[1]} columns")
    return X_eval @ beta


def expected_quadratic_loss(beta_hat, beta_star, X_eval) -> float:
    """Mean of ``(x (beta_hat - beta_star))^2`` over the evaluation rows."""
    d = np.asarray(beta_hat, dtype=float) - np.asarray(beta_star, dtype=float)
    return float(np.mean(predict(d, X_eval) ** 2))


@dataclass(frozen=True)
class ToleranceBound:
    sigma: float
    gamma: float
    c: float
    delta: float


def tolerance_bound(sigma: float, gamma: float, c: float) -> ToleranceBound:
    """High-probability bound on the expected quadratic loss of trimmed PCR:
    ``4 sigma^2 (1 + sqrt(1 / (1 - gamma)))^2 log(c)``."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if not 0 <= gamma < 1:
        raise ValueError("gamma must lie in [0, 1); the bound is vacuous otherwise")
    if not c > 1:
        raise ValueError("c must exceed 1")
    delta = 4 * sigma**2 * (1 + math.sqrt(1 / (1 - gamma))) ** 2 * math.log(c)
    return ToleranceBound(sigma=sigma, gamma=gamma, c=c, delta=delta)


def rmse(pred, truth) -> float:
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape:
        raise DimensionMismatchError(f"shapes differ: {pred.shape} vs {truth.shape}")
    return float(np.sqrt(np.mean((pred - truth) ** 2)))

