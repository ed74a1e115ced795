"""Recover the row space of the pristine matrix from a poisoned one.

Three strategies share one result type:

* :func:`recover_noise_free` -- first ``n``-row subset of rank exactly ``k``,
* :func:`recover_exact` -- exhaustive minimizer of the best rank-``k``
  residual over all ``n``-row subsets,
* :func:`recover_efficient` -- alternating minimization of the trimmed
  factorization objective, usable at realistic sizes.
"""

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import DimensionMismatchError, NoFeasibleSubsetError
from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    as_matrix,
    complete_basis,
    rank_from_singular_values,
    singular_values,
    top_right_singular_vectors,
)
from .oracles import ENUMERATION_CAP, _check_cap
from .trimmed import TrimmedProblem, restart_seeds, smallest_rows, solve_trimmed


@dataclass
class RecoveryOptions:
    restarts: int = 8
    max_outer_iters: int = 200
    seed: int = 42
    tol: Tolerances = field(default_factory=Tolerances)
    # ridge weight on both factors, relative to the largest singular value of X
    ridge: float = 0.0
    max_inner_iters: int = 50

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_outer_iters < 1:
            raise ValueError("max_outer_iters must be >= 1")
        if self.ridge < 0:
            raise ValueError("ridge must be >= 0")


@dataclass
class RecoveryResult:
    basis: np.ndarray  # k x m, orthonormal rows
    kept: np.ndarray  # sorted row indices, length n
    U_full: np.ndarray  # (n + n1) x k, X @ basis.T
    residual: float
    converged: bool = True
    objective: float = float("nan")
    restart: int = 0


def _result_from_kept(X, kept, k, basis=None, **extra) -> RecoveryResult:
    kept = np.sort(np.asarray(kept, dtype=int))
    if basis is None:
        basis = top_right_singular_vectors(X[kept], k)
    U_full = X @ basis.T
    residual = float(np.linalg.norm(X[kept] - U_full[kept] @ basis))
    return RecoveryResult(basis=basis, kept=kept, U_full=U_full, residual=residual, **extra)


def _check_args(X, n, k):
    N, m = X.shape
    if not 1 <= n <= N:
        raise ValueError(f"keep n={n} outside [1, {N}]")
    if not 1 <= k <= min(N, m):
        raise ValueError(f"rank k={k} outside [1, {min(N, m)}]")


def recover_noise_free(X, n: int, k: int, tol: Tolerances = DEFAULT_TOL, cap: int = ENUMERATION_CAP) -> RecoveryResult:
    """Return a basis of the first ``n``-row subset (lexicographic order)
    whose numeric rank is exactly ``k``."""
    X = as_matrix(X)
    _check_args(X, n, k)
    _check_cap(X.shape[0], cap)
    for idx in combinations(range(X.shape[0]), n):
        if rank_from_singular_values(singular_values(X[list(idx)]), tol) == k:
            return _result_from_kept(X, idx, k)
    raise NoFeasibleSubsetError(f"no {n}-row subset has rank {k}")


def recover_exact(X, n: int, k: int, tol: Tolerances = DEFAULT_TOL, cap: int = ENUMERATION_CAP) -> RecoveryResult:
    """Exhaustive search for the ``n`` rows best fit by a rank-``k`` matrix."""
    X = as_matrix(X)
    _check_args(X, n, k)
    _check_cap(X.shape[0], cap)
    best_idx, best_res = None, np.inf
    for idx in combinations(range(X.shape[0]), n):
        s = singular_values(X[list(idx)])
        res = float(np.sum(s[k:] ** 2))
        if res < best_res:
            best_idx, best_res = idx, res
    return _result_from_kept(X, best_idx, k)


def _ridge_solve(A, Y, lam, tol):
    """``argmin_Z ||A Z - Y||^2 + lam ||Z||^2``; minimum-norm when ``lam == 0``."""
    if lam > 0:
        return np.linalg.solve(A.T @ A + lam * np.eye(A.shape[1]), A.T @ Y)
    return np.linalg.lstsq(A, Y, rcond=tol.rank_eps)[0]


def _alternate(X, n, k, B, lam, opts):
    """One restart of the trimmed alternating factorization.

    Minimizes ``sum_{kept} ||x_i - u_i B||^2 + lam (||U_kept||^2 + ||B||^2)``
    over the factors and the keep-set. Returns ``(kept_mask, objective, converged)``.
    """
    N, m = X.shape
    tau = None
    prev = np.inf
    converged = False
    for _ in range(opts.max_outer_iters):
        # U-step over every row
        U = _ridge_solve(B.T, X.T, lam, opts.tol).T

        def fit(idx, U=U):
            return _ridge_solve(U[idx], X[idx], lam, opts.tol)

        def row_loss(Bm, U=U):
            return np.sum((X - U @ Bm) ** 2, axis=1)

        problem = TrimmedProblem(
            row_count=N,
            keep=n,
            fit=fit,
            row_loss=row_loss,
            penalty=lambda Bm: lam * float(np.sum(Bm * Bm)),
        )
        if tau is None:
            tau = smallest_rows(row_loss(B), n)
        res = solve_trimmed(problem, max_iters=opts.max_inner_iters, tol=opts.tol, init_tau=tau)
        B = res.theta
        objective = res.loss + lam * float(np.sum(U[res.tau] ** 2))
        same = np.array_equal(res.tau, tau)
        tau = res.tau
        if same:
            converged = True
            break
        if abs(prev - objective) < opts.tol.converge_eps * max(1.0, abs(objective)):
            converged = True
            break
        prev = objective
    return tau, objective, converged


class _Reduced:
    """``X`` in coordinates of its own row space, ``X ~ Z @ V`` with ``V``
    orthonormal, plus memoized SVDs of row subsets of ``Z``.

    Every row lies in ``span(V)``, so residuals and subset spectra computed
    from ``Z`` equal those of ``X``; working in ``Z`` just makes them cheap
    when ``X`` is (nearly) low rank.
    """

    # components below this fraction of the top singular value are round-off
    DROP = 1e-12

    def __init__(self, X):
        _, s, Vt = np.linalg.svd(X, full_matrices=False)
        keep = s > self.DROP * s[0] if len(s) and s[0] > 0 else np.zeros(len(s), dtype=bool)
        keep[0] = True
        self.V = Vt[keep]
        self.Z = X @ self.V.T
        self._cache = {}

    def svd(self, idx):
        idx = np.asarray(idx)
        key = idx.tobytes()
        hit = self._cache.get(key)
        if hit is None:
            _, s, Wt = np.linalg.svd(self.Z[idx], full_matrices=False)
            hit = self._cache[key] = (s, Wt)
        return hit

    def rank(self, idx, tol):
        return rank_from_singular_values(self.svd(idx)[0], tol)

    def residual(self, idx, r):
        s = self.svd(idx)[0]
        return float(np.sqrt(np.sum(s[r:] ** 2)))

    def basis(self, idx, r, tol):
        """Leading directions (reduced coordinates) of the rows ``idx``,
        at most ``r`` of them and never beyond their numeric rank."""
        s, Wt = self.svd(idx)
        return Wt[: min(r, max(rank_from_singular_values(s, tol), 1))]

    def full_basis(self, idx, r):
        """Orthonormal ``r x m`` basis in the original coordinates, padded
        with an orthonormal completion when the rows have fewer directions."""
        s, Wt = self.svd(idx)
        B = Wt[:r] @ self.V
        return complete_basis(B, r) if len(B) < r else B


def _subspace_trim_problem(Z, n, r, red, tol):
    """Trimmed problem whose parameter is an orthonormal basis of at most
    ``r`` directions: the fit is the truncated SVD of the kept rows (an exact
    minimizer), the row loss the squared distance of each row to its span."""

    def fit(idx):
        return red.basis(idx, r, tol)

    def row_loss(basis):
        return np.sum((Z - (Z @ basis.T) @ basis) ** 2, axis=1)

    return TrimmedProblem(row_count=Z.shape[0], keep=n, fit=fit, row_loss=row_loss)


def _polish(red, n, k, tau, opts):
    """Unregularized trimmed refit at rank ``k`` from keep-set ``tau``.

    If the kept rows then have numeric rank ``q <= k`` (an exact fit), keep
    trying to trim down to an exact rank ``q - 1`` fit: with ``k`` above the
    intrinsic rank every keep-set of rank <= k fits perfectly, and the one of
    smallest rank is the one free of foreign directions. Noisy data is never
    rank-deficient, so this only affects exactly low-rank inputs.
    """
    tol = opts.tol

    def solve(r, tau):
        problem = _subspace_trim_problem(red.Z, n, r, red, tol)
        return solve_trimmed(problem, max_iters=opts.max_inner_iters, tol=tol, init_tau=tau).tau

    tau = solve(k, tau)
    while True:
        q = red.rank(np.flatnonzero(tau), tol)
        if q > k or q <= 1:
            return tau
        trial = solve(q - 1, tau)
        if red.rank(np.flatnonzero(trial), tol) > q - 1:
            return tau
        tau = trial


def recover_efficient(X, n: int, k: int, opts: RecoveryOptions = None) -> RecoveryResult:
    """Trimmed alternating-minimization recovery with random restarts.

    Each restart alternates a ridge-regularized U-step over all rows with a
    trimmed B-step, then polishes its keep-set without regularization
    (see :func:`_polish`). Restart 0 starts from the leading singular
    vectors of a random ``n``-row subset, the others from Gaussian factors.
    The winner has the smallest kept-set residual; residuals equal to
    round-off are ranked by the numeric rank of the kept rows, then by the
    regularized objective, then by restart index.
    """
    opts = opts or RecoveryOptions()
    X = as_matrix(X)
    _check_args(X, n, k)
    N, m = X.shape
    red = _Reduced(X)
    Z = red.Z
    s1 = float(np.linalg.norm(Z, 2)) if X.any() else 0.0
    lam = opts.ridge * s1
    scale = max(np.linalg.norm(X), 1.0)
    best_key, best_kept, best_info = None, None, None
    for r, seed in enumerate(restart_seeds(opts.seed, opts.restarts)):
        rng = np.random.default_rng(seed)
        if r == 0:
            idx = np.sort(rng.choice(N, size=n, replace=False))
            B0 = red.full_basis(idx, k) @ red.V.T * np.sqrt(max(s1, 1.0))
        else:
            B0 = rng.standard_normal((k, m)) @ red.V.T
        kept_mask, objective, converged = _alternate(Z, n, k, B0, lam, opts)
        kept = np.flatnonzero(_polish(red, n, k, kept_mask, opts))
        key = (
            round(red.residual(kept, k) / (opts.tol.rank_eps * scale)),
            red.rank(kept, opts.tol),
            objective,
            r,
        )
        if best_key is None or key < best_key:
            best_key, best_kept, best_info = key, kept, (converged, objective, r)
    converged, objective, r = best_info
    return _result_from_kept(
        X, best_kept, k, basis=red.full_basis(best_kept, k), converged=converged, objective=objective, restart=r
    )


def span_distance(A, B) -> float:
    """Frobenius distance between the row-space projectors of two orthonormal bases."""
    A = as_matrix(A)
    B = as_matrix(B)
    if A.shape[1] != B.shape[1]:
        raise DimensionMismatchError(f"ambient dimensions differ: {A.shape[1]} vs {B.shape[1]}")
    return float(np.linalg.norm(A.T @ A - B.T @ B))


def identification_rate(kept, adversarial) -> float:
    """Fraction of adversarial rows left out of ``kept`` (1.0 if there are none)."""
    if isinstance(kept, RecoveryResult):
        kept = kept.kept
    adversarial = np.asarray(adversarial, dtype=int)
    if adversarial.size == 0:
        return 1.0
    trimmed = np.setdiff1d(adversarial, np.asarray(kept, dtype=int))
    return len(trimmed) / len(adversarial)
