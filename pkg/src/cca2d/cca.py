"""Classical canonical correlation analysis via the generalized
eigenvalue formulation."""

from dataclasses import dataclass

import numpy as np

from .linalg import (
    DimensionError,
    NumericalError,
    generalized_symmetric_eig,
    regularize_spd,
    sample_covariance,
)

DEFAULT_EPS = 1e-6


@dataclass(frozen=True)
class CCAModel:
    w1: np.ndarray           # D1 x d canonical directions, view 1
    w2: np.ndarray           # D2 x d canonical directions, view 2
    correlations: np.ndarray  # d canonical correlations, descending
    mu1: np.ndarray
    mu2: np.ndarray


def _sign_fix_pair(w1, w2):
    """Flip each direction pair so the largest-magnitude entry of the
    view-1 column is positive; both columns flip together so projected
    correlations keep their sign."""
    w1 = w1.copy()
    w2 = w2.copy()
    for k in range(w1.shape[1]):
        i = int(np.argmax(np.abs(w1[:, k])))
        if w1[i, k] < 0:
            w1[:, k] = -w1[:, k]
            w2[:, k] = -w2[:, k]
    return w1, w2


def _paired_directions(S11, S12, S22, d):
    """Solve the coupled two-view eigenproblem through the equivalent
    single-view problem S12 S22^-1 S21 w = rho^2 S11 w, then back out the
    view-2 directions. Both direction sets come back B-orthonormal
    (w^T S_ii w = I)."""
    try:
        S22_inv_S21 = np.linalg.solve(S22, S12.T)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("view-2 covariance is singular after regularization") from exc
    A = S12 @ S22_inv_S21
    res = generalized_symmetric_eig(A, S11, d)
    rho = np.sqrt(np.clip(res.eigenvalues, 0.0, None))
    w1 = res.eigenvectors
    w2 = S22_inv_S21 @ w1
    # normalize so w2^T S22 w2 = I; guard vanishing correlations
    scale = np.where(rho > 1e-12, rho, 1.0)
    w2 = w2 / scale
    for k in range(d):
        if rho[k] <= 1e-12:
            nrm = float(np.sqrt(w2[:, k] @ S22 @ w2[:, k]))
            if nrm > 0:
                w2[:, k] /= nrm
    return w1, w2, rho


def fit_cca(X1, X2, d, eps=DEFAULT_EPS):
    """Fit top-d canonical direction pairs from row-sample matrices."""
    X1 = np.asarray(X1, dtype=float)
    X2 = np.asarray(X2, dtype=float)
    if X1.ndim != 2 or X2.ndim != 2 or X1.shape[0] != X2.shape[0]:
        raise DimensionError("X1 and X2 must be 2-D with matching sample counts")
    if X1.shape[0] < 2:
        raise DimensionError("need at least two samples")
    if not 1 <= d <= min(X1.shape[1], X2.shape[1]):
        raise DimensionError(f"d={d} out of range for dims {X1.shape[1]}, {X2.shape[1]}")

    S11 = regularize_spd(sample_covariance(X1, X1), eps)
    S22 = regularize_spd(sample_covariance(X2, X2), eps)
    S12 = sample_covariance(X1, X2)
    w1, w2, rho = _paired_directions(S11, S12, S22, d)
    w1, w2 = _sign_fix_pair(w1, w2)
    return CCAModel(
        w1=w1,
        w2=w2,
        correlations=np.clip(rho, 0.0, None),
        mu1=X1.mean(axis=0),
        mu2=X2.mean(axis=0),
    )


def project_cca(model, x, view):
    """Project a single observation: w_view^T (x - mu_view)."""
    if view not in (1, 2):
        raise ValueError(f"view must be 1 or 2, got {view}")
    w = model.w1 if view == 1 else model.w2
    mu = model.mu1 if view == 1 else model.mu2
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != w.shape[0]:
        raise DimensionError(f"expected dim {w.shape[0]}, got {x.shape[0]}")
    return w.T @ (x - mu)
