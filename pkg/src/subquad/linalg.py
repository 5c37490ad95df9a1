"""Dense linear-algebra kernels shared by every other module.

Conventions: vectors are 1-D float arrays, matrices are 2-D, and a basis is
a matrix whose *columns* are the basis vectors. Every rank decision in the
package funnels through the same relative singular-value cutoff
(``sigma > rank_tol * sigma_max``), with ``rank_tol`` defaulting to
``max(shape) * machine_eps``. Outputs of the factorization routines are made
deterministic by a sign convention: in each returned orthonormal column the
entry of largest magnitude (first such entry on ties) is nonnegative.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    DimensionMismatchError,
    NonFiniteError,
    NotOrthonormalError,
    NotSquareError,
)

EPS = float(np.finfo(float).eps)

_SQRT2 = float(np.sqrt(2.0))

#: Spectral-norm tolerance on ``Q.T @ Q - I`` accepted as "orthonormal".
ORTHONORMALITY_TOL = 1e-10


def default_rank_tol(rows: int, cols: int) -> float:
    """Relative singular-value cutoff used when no explicit one is given."""
    return max(rows, cols) * EPS


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D float array."""
    mat = np.asarray(a, dtype=float)
    if mat.ndim != 2:
        raise DimensionMismatchError(
            f"{name} must be 2-D, got shape {mat.shape}"
        )
    if not np.all(np.isfinite(mat)):
        raise NonFiniteError(f"{name} contains NaN or Inf entries")
    return mat


def as_vector(a, name: str = "vector") -> np.ndarray:
    """Coerce to a finite 1-D float array."""
    vec = np.asarray(a, dtype=float)
    if vec.ndim != 1:
        raise DimensionMismatchError(
            f"{name} must be 1-D, got shape {vec.shape}"
        )
    if not np.all(np.isfinite(vec)):
        raise NonFiniteError(f"{name} contains NaN or Inf entries")
    return vec


def sym_part(mat) -> np.ndarray:
    """Exactly symmetric part ``(M + M.T) / 2`` of a square matrix."""
    matrix = as_matrix(mat, "sym_part argument")
    if matrix.shape[0] != matrix.shape[1]:
        raise NotSquareError(
            f"expected a square matrix, got shape {matrix.shape}"
        )
    return 0.5 * (matrix + matrix.T)


def _fix_column_signs(basis: np.ndarray) -> np.ndarray:
    """Flip column signs so the largest-magnitude entry of each is positive."""
    basis = np.array(basis, copy=True)
    for j in range(basis.shape[1]):
        k = int(np.argmax(np.abs(basis[:, j])))
        if basis[k, j] < 0.0:
            basis[:, j] = -basis[:, j]
    return basis


def orthonormal_columns(a, rank_tol: float | None = None):
    """Rank-revealing orthonormal basis of the column space of ``a``.

    Parameters
    ----------
    a : array_like, shape (n, k)
        Matrix whose column space is wanted. Must have at least one column.
    rank_tol : float, optional
        Relative singular-value cutoff. Defaults to ``max(n, k) * eps``.

    Returns
    -------
    q : ndarray, shape (n, r)
        Orthonormal basis, columns ordered by decreasing singular value and
        sign-fixed for determinism.
    r : int
        Numerical rank of ``a`` at the given tolerance.
    """
    mat = as_matrix(a, "orthonormal_columns argument")
    if mat.shape[1] == 0:
        raise DimensionMismatchError("matrix must have at least one column")
    if rank_tol is None:
        rank_tol = default_rank_tol(*mat.shape)
    left, sigma, _ = np.linalg.svd(mat, full_matrices=False)
    if sigma.size == 0 or sigma[0] <= 0.0:
        rank = 0
    else:
        rank = int(np.count_nonzero(sigma > rank_tol * sigma[0]))
    return _fix_column_signs(left[:, :rank]), rank


def orthonormal_complement(q) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of ``col(q)``.

    ``q`` must already have orthonormal columns (checked to
    ``ORTHONORMALITY_TOL`` in the spectral norm). The result has
    ``n - d`` columns and is deterministic for a given input.
    """
    basis = as_matrix(q, "orthonormal_complement argument")
    n, d = basis.shape
    if d > n:
        raise NotOrthonormalError(
            f"{d} columns in dimension {n} cannot be orthonormal"
        )
    if d == 0:
        return np.eye(n)
    gram_defect = basis.T @ basis - np.eye(d)
    if np.linalg.norm(gram_defect, 2) > ORTHONORMALITY_TOL:
        raise NotOrthonormalError(
            "columns are not orthonormal "
            f"(||Q.T Q - I|| = {np.linalg.norm(gram_defect, 2):.3e})"
        )
    # Rows d..n of V.T in the full SVD of Q.T span null(Q.T) = col(Q)^perp.
    _, _, vt = np.linalg.svd(basis.T, full_matrices=True)
    return _fix_column_signs(vt[d:, :].T)


def minnorm_lstsq(a, b, rank_tol: float | None = None):
    """Minimum-norm least-squares solution of ``a @ x = b``.

    Computes the pseudoinverse solution through a singular value
    decomposition with explicit rank truncation; normal equations are never
    formed.

    Returns
    -------
    x : ndarray
        The least-squares solution of minimum Euclidean norm.
    nullspace : ndarray, shape (cols, cols - r)
        Orthonormal basis of the nullspace of ``a`` at the tolerance,
        sign-fixed for determinism.
    """
    mat = as_matrix(a, "minnorm_lstsq matrix")
    rhs = as_vector(b, "minnorm_lstsq right-hand side")
    rows, cols = mat.shape
    if rhs.shape[0] != rows:
        raise DimensionMismatchError(
            f"matrix has {rows} rows but right-hand side has {rhs.shape[0]}"
        )
    if rank_tol is None:
        rank_tol = default_rank_tol(rows, cols)
    left, sigma, vt = np.linalg.svd(mat, full_matrices=True)
    if sigma.size == 0 or sigma[0] <= 0.0:
        rank = 0
    else:
        rank = int(np.count_nonzero(sigma > rank_tol * sigma[0]))
    if rank > 0:
        coeff = (left[:, :rank].T @ rhs) / sigma[:rank]
        x = vt[:rank, :].T @ coeff
    else:
        x = np.zeros(cols)
    nullspace = _fix_column_signs(vt[rank:, :].T)
    return x, nullspace


def pinv_apply(a, b, rank_tol: float | None = None) -> np.ndarray:
    """Apply the pseudoinverse of ``a`` to a vector or matrix ``b``.

    Same SVD rank truncation as :func:`minnorm_lstsq`; used where the
    nullspace is not needed and ``b`` may have several columns.
    """
    mat = as_matrix(a, "pinv_apply matrix")
    rhs = np.asarray(b, dtype=float)
    if not np.all(np.isfinite(rhs)):
        raise NonFiniteError("pinv_apply right-hand side contains NaN or Inf")
    if rhs.shape[0] != mat.shape[0]:
        raise DimensionMismatchError(
            f"matrix has {mat.shape[0]} rows but operand has {rhs.shape[0]}"
        )
    if rank_tol is None:
        rank_tol = default_rank_tol(*mat.shape)
    left, sigma, vt = np.linalg.svd(mat, full_matrices=False)
    if sigma.size == 0 or sigma[0] <= 0.0:
        rank = 0
    else:
        rank = int(np.count_nonzero(sigma > rank_tol * sigma[0]))
    if rank == 0:
        out_shape = (mat.shape[1],) + rhs.shape[1:]
        return np.zeros(out_shape)
    coeff = left[:, :rank].T @ rhs
    if coeff.ndim == 1:
        coeff = coeff / sigma[:rank]
    else:
        coeff = coeff / sigma[:rank, None]
    return vt[:rank, :].T @ coeff


def svec(h) -> np.ndarray:
    """Isometric vectorization of a symmetric matrix.

    Row-major upper triangle with off-diagonal entries scaled by sqrt(2),
    so that ``norm(svec(H)) == frobenius_norm(H)``. Only the upper triangle
    is read; the input is assumed symmetric.
    """
    mat = as_matrix(h, "svec argument")
    n = mat.shape[0]
    if mat.shape[1] != n:
        raise NotSquareError(f"svec needs a square matrix, got {mat.shape}")
    iu, ju = np.triu_indices(n)
    weights = np.where(iu == ju, 1.0, _SQRT2)
    return mat[iu, ju] * weights


def smat(v) -> np.ndarray:
    """Inverse of :func:`svec`; reconstructs the symmetric matrix."""
    vec = as_vector(v, "smat argument")
    length = vec.shape[0]
    n = int(round((np.sqrt(8.0 * length + 1.0) - 1.0) / 2.0))
    if n * (n + 1) // 2 != length:
        raise DimensionMismatchError(
            f"length {length} is not a triangular number"
        )
    iu, ju = np.triu_indices(n)
    entries = np.where(iu == ju, vec, vec / _SQRT2)
    mat = np.zeros((n, n))
    mat[iu, ju] = entries
    mat[ju, iu] = entries
    return mat
