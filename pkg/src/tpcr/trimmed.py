"""Alternating solver for trimmed optimization problems.

A trimmed problem minimizes, over parameters ``theta``, the sum of the
``keep`` smallest per-row losses. The solver alternates an exact fit on the
currently kept rows with a re-selection of the ``keep`` rows of smallest
loss; each half-step can only lower the objective, so the loss trace is
non-increasing.
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from .errors import TrimmedFitError
from .linalg import DEFAULT_TOL, Tolerances

# tolerated floating-point increase between successive losses, relative
MONOTONE_SLACK = 1e-10


@dataclass
class TrimmedProblem:
    """``fit(kept_indices) -> theta`` must minimize the (penalized) kept loss
    exactly; ``row_loss(theta)`` returns the loss of every row as a vector.
    ``penalty(theta)``, when given, is added to every objective value."""

    row_count: int
    keep: int
    fit: Callable[[np.ndarray], Any]
    row_loss: Callable[[Any], np.ndarray]
    penalty: Optional[Callable[[Any], float]] = None

    def objective(self, theta, tau) -> float:
        value = float(np.sum(self.row_loss(theta)[tau]))
        if self.penalty is not None:
            value += float(self.penalty(theta))
        return value


@dataclass
class TrimResult:
    theta: Any
    tau: np.ndarray
    loss_trace: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False

    @property
    def kept(self) -> np.ndarray:
        return np.flatnonzero(self.tau)

    @property
    def loss(self) -> float:
        return self.loss_trace[-1]


def smallest_rows(losses, keep: int) -> np.ndarray:
    """Boolean mask of the ``keep`` smallest losses; ties keep the lower index."""
    losses = np.asarray(losses, dtype=float)
    mask = np.zeros(len(losses), dtype=bool)
    mask[np.argsort(losses, kind="stable")[:keep]] = True
    return mask


def random_assignment(row_count: int, keep: int, rng) -> np.ndarray:
    tau = np.zeros(row_count, dtype=bool)
    tau[rng.choice(row_count, size=keep, replace=False)] = True
    return tau


def is_monotone(trace, slack=MONOTONE_SLACK) -> bool:
    return all(b <= a + slack * max(1.0, abs(a)) for a, b in zip(trace, trace[1:]))


def solve_trimmed(
    problem: TrimmedProblem,
    seed=42,
    max_iters: int = 500,
    tol: Tolerances = DEFAULT_TOL,
    init_tau=None,
) -> TrimResult:
    """Run the alternating trimmed solver from a random (or given) keep-set.

    Stops when the keep-set is unchanged, when successive losses differ by
    less than ``tol.converge_eps`` (scaled by the loss magnitude), or after
    ``max_iters`` iterations with ``converged=False``.
    """
    N, n = problem.row_count, problem.keep
    if not 0 <= n <= N:
        raise ValueError(f"keep={n} outside [0, {N}]")
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    if init_tau is None:
        tau = random_assignment(N, n, np.random.default_rng(seed))
    else:
        tau = np.asarray(init_tau, dtype=bool).copy()
        if tau.shape != (N,) or tau.sum() != n:
            raise ValueError(f"init_tau must be a length-{N} mask with {n} ones")

    trace = []
    theta = None
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        try:
            theta = problem.fit(np.flatnonzero(tau))
        except Exception as exc:
            raise TrimmedFitError(it, exc) from exc
        losses = np.asarray(problem.row_loss(theta), dtype=float)
        new_tau = smallest_rows(losses, n)
        value = float(np.sum(losses[new_tau]))
        if problem.penalty is not None:
            value += float(problem.penalty(theta))
        trace.append(value)
        unchanged = np.array_equal(new_tau, tau)
        tau = new_tau
        if unchanged:
            converged = True
            break
        if len(trace) > 1 and abs(trace[-2] - trace[-1]) < tol.converge_eps * max(1.0, abs(trace[-2])):
            converged = True
            break
    return TrimResult(theta=theta, tau=tau, loss_trace=trace, iterations=it, converged=converged)


def restart_seeds(seed, restarts: int) -> list:
    """Seed for each restart: the first is ``seed`` itself, the rest are
    spawned from it so that runs are reproducible and independent."""
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    children = np.random.SeedSequence(seed).spawn(restarts - 1)
    return [seed] + children


def solve_trimmed_multistart(
    problem: TrimmedProblem,
    restarts: int = 8,
    seed=42,
    max_iters: int = 500,
    tol: Tolerances = DEFAULT_TOL,
    warm_starts=(),
    start_rows: Optional[int] = None,
) -> TrimResult:
    """Best (lowest final loss) of ``restarts`` random starts plus any given
    warm-start keep-sets. Ties go to the earliest run; warm starts come last.

    With ``start_rows`` set, each random start fits ``start_rows`` random
    rows first and begins from the ``keep`` rows of smallest loss under that
    fit (elemental starts); otherwise it begins from a random keep-set.
    """
    N, n = problem.row_count, problem.keep
    if start_rows is not None and not 1 <= start_rows <= N:
        raise ValueError(f"start_rows={start_rows} outside [1, {N}]")
    best = None
    for s in restart_seeds(seed, restarts):
        init = None
        if start_rows is not None:
            rng = np.random.default_rng(s)
            idx = np.sort(rng.choice(N, size=start_rows, replace=False))
            try:
                theta = problem.fit(idx)
            except Exception as exc:
                raise TrimmedFitError(0, exc) from exc
            init = smallest_rows(problem.row_loss(theta), n)
        res = solve_trimmed(problem, seed=s, max_iters=max_iters, tol=tol, init_tau=init)
        if best is None or res.loss < best.loss:
            best = res
    for tau in warm_starts:
        res = solve_trimmed(problem, max_iters=max_iters, tol=tol, init_tau=tau)
        if res.loss < best.loss:
            best = res
    return best


def linear_trimmed_problem(A, y, keep: int, ridge: float = 0.0, tol: Tolerances = DEFAULT_TOL) -> TrimmedProblem:
    """Trimmed least squares ``min_beta sum_{n smallest} (y_i - a_i beta)^2``
    with an optional ``ridge * ||beta||^2`` penalty."""
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    p = A.shape[1]

    def fit(idx):
        Ak, yk = A[idx], y[idx]
        if ridge > 0:
            return np.linalg.solve(Ak.T @ Ak + ridge * np.eye(p), Ak.T @ yk)
        beta, *_ = np.linalg.lstsq(Ak, yk, rcond=tol.rank_eps)
        return beta

    def row_loss(beta):
        return (y - A @ beta) ** 2

    penalty = (lambda beta: ridge * float(beta @ beta)) if ridge > 0 else None
    return TrimmedProblem(row_count=len(y), keep=keep, fit=fit, row_loss=row_loss, penalty=penalty)
