"""Small complex linear-algebra helpers shared by the constructions."""

import numpy as np


def hermitian(A):
    return np.conj(np.swapaxes(A, -1, -2))


def normalize_columns(A):
    """Scale every nonzero column of ``A`` to unit 2-norm."""
    A = np.asarray(A)
    norms = np.linalg.norm(A, axis=-2, keepdims=True)
    return A / np.where(norms > 0, norms, 1.0)


def orthonormalize(A):
    """Orthonormal basis of the column space of a full-column-rank ``A``."""
    Q, _ = np.linalg.qr(np.asarray(A, dtype=complex))
    return Q


def orthonormal_complement(A, rank=None):
    """
    Orthonormal basis of the orthogonal complement of ``span(A)``.

    This is the null space of ``A^H``, so ``U^H A = 0`` for the returned
    ``U``. Columns of ``A`` are normalized first so that widely different
    column scales do not hide small columns. If ``rank`` is given the
    complement has exactly ``M - rank`` columns; otherwise the numerical
    rank is used.
    """
    A = np.asarray(A, dtype=complex)
    M = A.shape[0]
    if A.shape[1] == 0:
        return np.eye(M, dtype=complex)
    W, s, _ = np.linalg.svd(normalize_columns(A), full_matrices=True)
    if rank is None:
        tol = max(A.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
        rank = int(np.sum(s > tol))
    return W[:, rank:]


def relative_residual(A, B):
    """``||A - B||_F`` relative to the larger of the two norms (0 if both vanish)."""
    A = np.asarray(A)
    B = np.asarray(B)
    scale = max(np.linalg.norm(A), np.linalg.norm(B))
    if scale == 0:
        return 0.0
    return float(np.linalg.norm(A - B) / scale)


def containment_residual(basis, X):
    """
    Largest relative norm of the part of a column of ``X`` outside ``span(basis)``.

    Returns 0 when ``X`` has no columns.
    """
    X = np.asarray(X, dtype=complex)
    if X.shape[1] == 0:
        return 0.0
    Q = orthonormalize(normalize_columns(basis))
    Xn = normalize_columns(X)
    outside = Xn - Q @ (hermitian(Q) @ Xn)
    return float(np.max(np.linalg.norm(outside, axis=0)))


def subspace_distance(A, B):
    """
    Sine of the largest principal angle between ``span(A)`` and ``span(B)``.

    Both arguments must have full column rank; subspaces of different
    dimension are at distance 1.
    """
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if A.shape[1] != B.shape[1]:
        return 1.0
    if A.shape[1] == 0:
        return 0.0
    Qa = orthonormalize(normalize_columns(A))
    Qb = orthonormalize(normalize_columns(B))
    return float(np.linalg.norm(Qa - Qb @ (hermitian(Qb) @ Qa), 2))


def min_singular_value(A):
    A = np.asarray(A)
    if A.size == 0:
        return 0.0
    return float(np.linalg.svd(A, compute_uv=False)[-1])
