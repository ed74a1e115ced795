"""Exhaustive-enumeration oracles for subspace recoverability.

These compute, by brute force over row subsets, the quantities that decide
whether the row space of a low-rank matrix can be recovered after an
adversary appends rows:

* the size of the largest row subset of rank at most ``k - 1``,
* the noise residual (distance of the pristine matrix to rank ``k``),
* the sub-matrix residual (best rank-``k`` fit of any ``n - n1`` pristine
  rows by a basis that does *not* span the clean matrix).

Intended for tiny instances only; anything above ``cap`` rows is refused.
"""

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DimensionMismatchError, EnumerationCapError
from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    as_matrix,
    best_rank_k,
    complete_basis,
    rank_from_singular_values,
    singular_values,
    top_right_singular_vectors,
)

ENUMERATION_CAP = 16
SR_MODES = ("skip", "perturb")


@dataclass(frozen=True)
class RecoverabilityVerdict:
    ms_k_minus_1: int
    nr: float
    sr: float
    solvable: bool

    def as_dict(self) -> dict:
        return {
            "ms": self.ms_k_minus_1,
            "nr": self.nr,
            "sr": None if math.isinf(self.sr) else self.sr,
            "sr_infinite": math.isinf(self.sr),
            "solvable": self.solvable,
        }


def _check_cap(rows: int, cap: int) -> None:
    if rows > cap:
        raise EnumerationCapError(f"{rows} rows exceeds the enumeration cap of {cap}")


def _snap(value: float, scale: float, tol: Tolerances) -> float:
    """Treat residuals at round-off level as exact zeros."""
    return 0.0 if value <= tol.rank_eps * max(scale, 1.0) else value


def max_subspace_cardinality(X_star, k: int, tol: Tolerances = DEFAULT_TOL, cap: int = ENUMERATION_CAP) -> int:
    """Largest number of rows of ``X_star`` whose rank is at most ``k - 1``."""
    X = as_matrix(X_star)
    n = X.shape[0]
    _check_cap(n, cap)
    if k < 1:
        raise ValueError("k must be >= 1")
    # rank is monotone under row inclusion: search sizes from the top down
    for size in range(n, 0, -1):
        for idx in combinations(range(n), size):
            if rank_from_singular_values(singular_values(X[list(idx)]), tol) <= k - 1:
                return size
    return 0


def noise_residual(X0, k: int, tol: Tolerances = DEFAULT_TOL) -> float:
    X = as_matrix(X0)
    _, _, res = best_rank_k(X, k)
    return _snap(res, np.linalg.norm(X), tol)


def spans(X_star, basis, eps: float) -> bool:
    """Whether the row space of ``basis`` contains every row of ``X_star``,
    judged by ``||X* B^T B - X*||_F <= eps * ||X*||_F``."""
    gap = np.linalg.norm(X_star @ basis.T @ basis - X_star)
    return bool(gap <= eps * np.linalg.norm(X_star))


def _subset_candidate(sub, k, X_star, star_basis, tol, span_eps, mode):
    """Best non-spanning rank-k basis for one row subset, or ``None``."""
    m = sub.shape[1]
    s = singular_values(sub)
    r = rank_from_singular_values(s, tol)
    if r >= k:
        basis = top_right_singular_vectors(sub, k)
    else:
        # any completion fits exactly; steer it away from span(X_star)
        head = top_right_singular_vectors(sub, r) if r else np.zeros((0, m))
        basis = complete_basis(head, k, prefer_outside=star_basis)
    if not spans(X_star, basis, span_eps):
        return basis
    if mode == "skip" or k >= m:
        return None
    # swap the weakest kept direction for the strongest discarded one
    full = top_right_singular_vectors(sub, min(m, max(k + 1, r)))
    if r < k + 1:
        full = complete_basis(full[: max(r, 0)], k + 1, prefer_outside=star_basis)
    alt = np.vstack([full[: k - 1], full[k : k + 1]])
    if spans(X_star, alt, span_eps):
        return None
    return alt


def submatrix_residual(
    X0,
    X_star,
    k: int,
    n1: int,
    tol: Tolerances = DEFAULT_TOL,
    mode: str = "skip",
    cap: int = ENUMERATION_CAP,
    span_eps=None,
) -> float:
    """Smallest rank-``k`` fit residual of any ``n - n1`` rows of ``X0`` by a
    basis that does not span ``X_star``.

    The exact constraint set is not closed, so it is relaxed per subset: the
    unconstrained optimum is used unless it spans ``X_star``, in which case
    the subset is skipped (``mode="skip"``) or the nearest non-spanning
    critical basis is used (``mode="perturb"``, which swaps the k-th singular
    direction for the (k+1)-th). Returns ``math.inf`` when no subset yields a
    feasible basis. ``span_eps`` defaults to ``tol.rank_eps``.
    """
    X0 = as_matrix(X0)
    X_star = as_matrix(X_star)
    if X0.shape != X_star.shape:
        raise DimensionMismatchError(f"X0 {X0.shape} and X_star {X_star.shape} differ")
    if mode not in SR_MODES:
        raise ValueError(f"mode must be one of {SR_MODES}")
    n, m = X0.shape
    _check_cap(n, cap)
    if not 0 <= n1 < n:
        raise ValueError(f"n1={n1} must satisfy 0 <= n1 < {n}")
    if not 1 <= k <= m:
        raise ValueError(f"k={k} outside [1, {m}]")
    span_eps = tol.rank_eps if span_eps is None else span_eps
    star_rank = rank_from_singular_values(singular_values(X_star), tol)
    star_basis = top_right_singular_vectors(X_star, star_rank) if star_rank else None

    best = math.inf
    for idx in combinations(range(n), n - n1):
        sub = X0[list(idx)]
        basis = _subset_candidate(sub, k, X_star, star_basis, tol, span_eps, mode)
        if basis is None:
            continue
        res = float(np.linalg.norm(sub - sub @ basis.T @ basis))
        best = min(best, res)
    if math.isinf(best):
        return best
    return _snap(best, np.linalg.norm(X0), tol)


def recoverability(
    X0,
    X_star,
    k: int,
    n1: int,
    tol: Tolerances = DEFAULT_TOL,
    mode: str = "skip",
    cap: int = ENUMERATION_CAP,
    span_eps=None,
) -> RecoverabilityVerdict:
    """Deterministic recoverability verdict: solvable iff SR > NR."""
    ms = max_subspace_cardinality(X_star, k, tol, cap)
    nr = noise_residual(X0, k, tol)
    sr = submatrix_residual(X0, X_star, k, n1, tol, mode=mode, cap=cap, span_eps=span_eps)
    return RecoverabilityVerdict(ms_k_minus_1=ms, nr=nr, sr=sr, solvable=sr > nr)
