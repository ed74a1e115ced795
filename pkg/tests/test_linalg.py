import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from tpcr.errors import DimensionMismatchError, RankDeficientError
from tpcr.linalg import (
    Tolerances,
    as_matrix,
    best_rank_k,
    complete_basis,
    frobenius_norm,
    is_orthonormal,
    least_squares,
    numeric_rank,
    orthonormalize,
    projector,
    singular_values,
    top_right_singular_vectors,
)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def matrices(max_rows=6, max_cols=6):
    return st.tuples(st.integers(1, max_rows), st.integers(1, max_cols)).flatmap(
        lambda s: arrays(np.float64, s, elements=finite)
    )


def low_rank(seed, rows, cols, k):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((rows, k)) @ rng.standard_normal((k, cols))


def test_tolerances_must_be_positive():
    with pytest.raises(ValueError):
        Tolerances(rank_eps=0)
    with pytest.raises(ValueError):
        Tolerances(converge_eps=-1e-3)


def test_as_matrix_rejects_vectors_and_nan():
    with pytest.raises(DimensionMismatchError):
        as_matrix([1.0, 2.0])
    with pytest.raises(ValueError):
        as_matrix([[1.0, np.nan]])


def test_frobenius_of_3_4():
    assert frobenius_norm([[3.0, 4.0]]) == 5.0


def test_singular_values_of_diagonal():
    np.testing.assert_allclose(singular_values(np.diag([1.0, 3.0, 2.0])), [3, 2, 1])


@pytest.mark.parametrize("k", [1, 2, 4])
def test_numeric_rank_of_product(k):
    assert numeric_rank(low_rank(k, 8, 6, k)) == k


def test_numeric_rank_of_zero_matrix():
    assert numeric_rank(np.zeros((3, 3))) == 0


def test_numeric_rank_ignores_roundoff():
    M = low_rank(0, 6, 5, 2)
    M[0] += 1e-14
    assert numeric_rank(M) == 2


def test_best_rank_k_residual_is_tail_energy():
    M = np.diag([5.0, 3.0, 2.0, 1.0])
    U, B, res = best_rank_k(M, 2)
    assert res == pytest.approx(np.sqrt(5.0))
    np.testing.assert_allclose(U @ B, np.diag([5.0, 3.0, 0, 0]), atol=1e-12)


def test_best_rank_k_exact_for_low_rank():
    M = low_rank(3, 7, 5, 3)
    U, B, res = best_rank_k(M, 3)
    assert res < 1e-10
    np.testing.assert_allclose(U @ B, M, atol=1e-9)


def test_best_rank_k_bounds():
    with pytest.raises(ValueError):
        best_rank_k(np.eye(3), 4)
    with pytest.raises(ValueError):
        best_rank_k(np.eye(3), 0)


@settings(max_examples=60, deadline=None)
@given(matrices(), st.data())
def test_best_rank_k_residual_matches_reconstruction(M, data):
    k = data.draw(st.integers(1, min(M.shape)))
    U, B, res = best_rank_k(M, k)
    assert is_orthonormal(B)
    assert np.linalg.norm(M - U @ B) == pytest.approx(res, abs=1e-8 * max(1.0, np.linalg.norm(M)))


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_residual_decreases_in_k(M):
    residuals = [best_rank_k(M, k)[2] for k in range(1, min(M.shape) + 1)]
    assert all(b <= a + 1e-9 for a, b in zip(residuals, residuals[1:]))
    assert residuals[-1] <= 1e-8 * max(1.0, np.linalg.norm(M))


def test_top_right_singular_vectors_pads_when_wide():
    V = top_right_singular_vectors(np.array([[1.0, 0, 0]]), 3)
    assert V.shape == (3, 3)
    assert is_orthonormal(V)


def test_orthonormalize_keeps_row_order_span():
    B = np.array([[2.0, 0, 0], [1.0, 1.0, 0]])
    Q = orthonormalize(B)
    assert is_orthonormal(Q)
    np.testing.assert_allclose(np.abs(Q[0]), [1, 0, 0], atol=1e-12)
    np.testing.assert_allclose(projector(Q), np.diag([1.0, 1.0, 0.0]), atol=1e-12)


def test_orthonormalize_rejects_dependent_rows():
    with pytest.raises(RankDeficientError):
        orthonormalize([[1.0, 2.0], [2.0, 4.0]])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4), st.integers(0, 3))
def test_projector_is_idempotent(seed, k, extra):
    m = k + extra
    B = orthonormalize(np.random.default_rng(seed).standard_normal((k, m)))
    P = projector(B)
    np.testing.assert_allclose(P @ P, P, atol=1e-10)
    np.testing.assert_allclose(P, P.T, atol=1e-12)
    assert np.trace(P) == pytest.approx(k)


def test_complete_basis_prefers_outside_direction():
    head = np.array([[1.0, 0, 0]])
    avoid = np.array([[0.0, 1.0, 0]])
    B = complete_basis(head, 2, prefer_outside=avoid)
    assert is_orthonormal(B)
    np.testing.assert_allclose(np.abs(B[1]), [0, 0, 1], atol=1e-12)


def test_complete_basis_from_nothing():
    B = complete_basis(np.zeros((0, 4)), 3)
    assert B.shape == (3, 4) and is_orthonormal(B)


def test_least_squares_minimum_norm():
    A = np.array([[1.0, 1.0]])
    np.testing.assert_allclose(least_squares(A, [2.0]), [1.0, 1.0])


def test_least_squares_dimension_check():
    with pytest.raises(DimensionMismatchError):
        least_squares(np.eye(3), [1.0, 2.0])
