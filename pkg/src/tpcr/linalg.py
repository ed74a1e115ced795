"""Dense linear-algebra substrate.

Matrices are plain 2-D ``float64`` numpy arrays; vectors are 1-D arrays.
An orthonormal basis is a ``(k, m)`` array whose rows are orthonormal.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, RankDeficientError


@dataclass(frozen=True)
class Tolerances:
    rank_eps: float = 1e-8
    orth_eps: float = 1e-9
    converge_eps: float = 1e-10

    def __post_init__(self):
        for name in ("rank_eps", "orth_eps", "converge_eps"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")


DEFAULT_TOL = Tolerances()


def as_matrix(M) -> np.ndarray:
    """Validate and convert ``M`` to a finite 2-D float array."""
    A = np.asarray(M, dtype=float)
    if A.ndim != 2:
        raise DimensionMismatchError(f"expected a 2-D matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix contains NaN or Inf")
    return A


def frobenius_norm(M) -> float:
    return float(np.linalg.norm(as_matrix(M), "fro"))


def singular_values(M) -> np.ndarray:
    A = as_matrix(M)
    if A.size == 0:
        return np.zeros(0)
    return np.linalg.svd(A, compute_uv=False)


def rank_from_singular_values(s, tol: Tolerances = DEFAULT_TOL) -> int:
    if len(s) == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol.rank_eps * s[0]))


def numeric_rank(M, tol: Tolerances = DEFAULT_TOL) -> int:
    """Number of singular values above ``rank_eps`` times the largest one."""
    return rank_from_singular_values(singular_values(M), tol)


def best_rank_k(M, k: int):
    """Truncated SVD factorization ``M ~ U @ B``.

    Returns ``(U, B, residual)`` where ``B`` (k x m) has orthonormal rows,
    ``U = M @ B.T`` and ``residual`` is the Frobenius distance of ``M`` to
    the nearest matrix of rank at most ``k``.
    """
    A = as_matrix(M)
    rows, cols = A.shape
    if not 1 <= k <= min(rows, cols):
        raise ValueError(f"k={k} outside [1, {min(rows, cols)}]")
    _, s, Vt = np.linalg.svd(A, full_matrices=False)
    B = Vt[:k]
    U = A @ B.T
    residual = float(np.sqrt(np.sum(s[k:] ** 2)))
    return U, B, residual


def top_right_singular_vectors(M, k: int) -> np.ndarray:
    """Leading ``k`` right singular vectors of ``M`` as rows, completed with
    an orthonormal basis of the null space when ``k`` exceeds the row count."""
    A = as_matrix(M)
    m = A.shape[1]
    if not 1 <= k <= m:
        raise ValueError(f"k={k} outside [1, {m}]")
    full = k > A.shape[0]
    _, _, Vt = np.linalg.svd(A, full_matrices=full)
    return Vt[:k]


def orthonormalize(B, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Gram-Schmidt (via QR) on the rows of ``B``; keeps row order."""
    A = as_matrix(B)
    k, m = A.shape
    if k > m or numeric_rank(A, tol) < k:
        raise RankDeficientError(f"cannot orthonormalize a rank-deficient {k}x{m} matrix")
    Q, _ = np.linalg.qr(A.T)
    return Q.T.copy()


def is_orthonormal(B, tol: Tolerances = DEFAULT_TOL) -> bool:
    A = as_matrix(B)
    return A.shape[0] <= A.shape[1] and bool(
        np.max(np.abs(A @ A.T - np.eye(A.shape[0])), initial=0.0) <= tol.orth_eps
    )


def projector(B) -> np.ndarray:
    """Orthogonal projector onto the row space of an orthonormal basis."""
    A = as_matrix(B)
    return A.T @ A


def complete_basis(B, k: int, prefer_outside=None) -> np.ndarray:
    """Extend orthonormal rows ``B`` (r x m) to ``k`` orthonormal rows.

    When ``prefer_outside`` (an orthonormal basis) is given, new directions
    are chosen to have the largest possible component outside its span.
    """
    A = np.asarray(B, dtype=float).reshape(-1, np.shape(B)[-1])
    r, m = A.shape
    if r >= k:
        return A[:k]
    # orthonormal basis of the complement of span(A)
    if r:
        _, _, Vt = np.linalg.svd(A, full_matrices=True)
        W = Vt[r:]
    else:
        W = np.eye(m)
    if prefer_outside is not None and len(prefer_outside):
        P = projector(prefer_outside)
        C = W @ (np.eye(m) - P) @ W.T
        _, vecs = np.linalg.eigh(C)
        W = vecs[:, ::-1].T @ W
    return np.vstack([A, W[: k - r]])


def least_squares(A, b, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Minimum-norm minimizer of ``||A x - b||``; ``b`` may be a vector or a matrix."""
    A = as_matrix(A)
    b = np.asarray(b, dtype=float)
    if b.shape[0] != A.shape[0]:
        raise DimensionMismatchError(f"A has {A.shape[0]} rows but b has {b.shape[0]}")
    x, *_ = np.linalg.lstsq(A, b, rcond=tol.rank_eps)
    return x
