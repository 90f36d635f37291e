"""Shared dense linear algebra: generalized symmetric eigensolver,
covariance assembly and SPD regularization.

All routines operate on plain float64 numpy arrays and are pure functions.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla


class DimensionError(ValueError):
    """Input shapes are inconsistent with the requested operation."""


class NumericalError(RuntimeError):
    """A numerically required condition (positive definiteness,
    invertibility) failed."""


@dataclass(frozen=True)
class EigResult:
    """Top-k eigenpairs, eigenvalues sorted non-increasing.

    Column k of ``eigenvectors`` pairs with ``eigenvalues[k]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _as_matrix(a):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-D array, got ndim={a.ndim}")
    return a


def regularize_spd(M, eps):
    """Return M + eps * mean(diag(M)) * I.

    A scale-aware ridge used before inverting sample covariances that may
    be rank deficient. eps = 0 returns M unchanged.
    """
    M = _as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise DimensionError(f"square matrix required, got {M.shape}")
    if eps == 0:
        return M
    shift = eps * float(np.mean(np.diag(M)))
    return M + shift * np.eye(M.shape[0])


def generalized_symmetric_eig(A, B, k):
    """Top-k eigenpairs of A v = lambda B v for symmetric A and SPD B.

    Solved by Cholesky whitening of B followed by a symmetric eigensolve,
    so returned eigenvectors are B-orthonormal (v^T B v = 1) by
    construction. Eigenvalues come back in non-increasing order.
    """
    A = _as_matrix(A)
    B = _as_matrix(B)
    if A.shape[0] != A.shape[1] or B.shape[0] != B.shape[1]:
        raise DimensionError(f"square matrices required, got {A.shape} and {B.shape}")
    if A.shape != B.shape:
        raise DimensionError(f"size mismatch: A is {A.shape}, B is {B.shape}")
    p = A.shape[0]
    if not 1 <= k <= p:
        raise DimensionError(f"k={k} out of range for size-{p} problem")

    try:
        L = sla.cholesky(B, lower=True)
    except sla.LinAlgError as exc:
        pivot = float(np.min(np.linalg.eigvalsh(0.5 * (B + B.T))))
        raise NumericalError(
            f"B is not positive definite (smallest pivot {pivot:.3e})"
        ) from exc

    # C = L^-1 A L^-T is symmetric; its eigenpairs map back via v = L^-T u.
    Linv_A = sla.solve_triangular(L, 0.5 * (A + A.T), lower=True)
    C = sla.solve_triangular(L, Linv_A.T, lower=True)
    w, U = np.linalg.eigh(0.5 * (C + C.T))
    order = np.argsort(w, kind="stable")[::-1]
    w = w[order][:k]
    V = sla.solve_triangular(L, U[:, order[:k]], lower=True, trans="T")
    return EigResult(eigenvalues=w, eigenvectors=V)


def sample_covariance(X, Y):
    """Cross-covariance (1/N) sum_n (x_n - mean_x)(y_n - mean_y)^T.

    Rows are samples. Normalization is by N, no Bessel correction.
    """
    X = _as_matrix(X)
    Y = _as_matrix(Y)
    if X.shape[0] != Y.shape[0]:
        raise DimensionError(
            f"sample count mismatch: {X.shape[0]} vs {Y.shape[0]}"
        )
    Xc = X - X.mean(axis=0)
    Yc = Y - Y.mean(axis=0)
    return Xc.T @ Yc / X.shape[0]
