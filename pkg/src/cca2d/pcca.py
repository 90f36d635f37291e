"""Probabilistic CCA fitted by the closed-form maximum likelihood
estimate, plus the small PCA front end used to keep sample covariances
invertible on image-scale inputs."""

from dataclasses import dataclass

import numpy as np

from .cca import DEFAULT_EPS, fit_cca
from .linalg import (
    DimensionError,
    NumericalError,
    regularize_spd,
    sample_covariance,
)

PSI_FLOOR = 1e-10


@dataclass(frozen=True)
class PCAReducer:
    basis: np.ndarray  # D x k, orthonormal columns
    mean: np.ndarray

    def transform(self, x):
        x = np.asarray(x, dtype=float)
        return (x - self.mean) @ self.basis


@dataclass(frozen=True)
class PCCAModel:
    W1: np.ndarray
    W2: np.ndarray
    Psi1: np.ndarray
    Psi2: np.ndarray
    mu1: np.ndarray
    mu2: np.ndarray
    Pd: np.ndarray  # canonical correlations, descending
    reducer1: PCAReducer | None = None
    reducer2: PCAReducer | None = None


def fit_pca(X, k):
    """Top-k principal directions of the (1/N) sample covariance."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DimensionError("X must be 2-D")
    n, d = X.shape
    if not 1 <= k <= min(n - 1, d):
        raise DimensionError(f"k={k} out of range for {n} samples of dim {d}")
    S = sample_covariance(X, X)
    w, V = np.linalg.eigh(S)
    order = np.argsort(w, kind="stable")[::-1][:k]
    basis = V[:, order]
    # deterministic signs
    for j in range(k):
        i = int(np.argmax(np.abs(basis[:, j])))
        if basis[i, j] < 0:
            basis[:, j] = -basis[:, j]
    return PCAReducer(basis=basis, mean=X.mean(axis=0))


def _psd_clip(M, floor=PSI_FLOOR):
    M = 0.5 * (M + M.T)
    w, V = np.linalg.eigh(M)
    w = np.maximum(w, floor)
    return (V * w) @ V.T


def fit_pcca_ml(X1, X2, d, eps=DEFAULT_EPS, prereduce=None):
    """Closed-form ML fit of the linear-Gaussian two-view model.

    W_i = S_ii U_id P_d^{1/2} with U_id the canonical directions; the
    noise covariance is the residual S_ii - W_i W_i^T, clipped to PSD.
    With ``prereduce`` set, each view is PCA-reduced first and the model
    lives in the reduced coordinates.
    """
    X1 = np.asarray(X1, dtype=float)
    X2 = np.asarray(X2, dtype=float)
    r1 = r2 = None
    if prereduce is not None:
        r1 = fit_pca(X1, prereduce)
        r2 = fit_pca(X2, prereduce)
        X1 = r1.transform(X1)
        X2 = r2.transform(X2)

    cca = fit_cca(X1, X2, d, eps)
    S11 = regularize_spd(sample_covariance(X1, X1), eps)
    S22 = regularize_spd(sample_covariance(X2, X2), eps)
    P_sqrt = np.sqrt(np.clip(cca.correlations, 0.0, 1.0))
    W1 = S11 @ cca.w1 * P_sqrt
    W2 = S22 @ cca.w2 * P_sqrt
    Psi1 = _psd_clip(S11 - W1 @ W1.T)
    Psi2 = _psd_clip(S22 - W2 @ W2.T)
    return PCCAModel(
        W1=W1, W2=W2, Psi1=Psi1, Psi2=Psi2,
        mu1=X1.mean(axis=0), mu2=X2.mean(axis=0),
        Pd=np.clip(cca.correlations, 0.0, 1.0),
        reducer1=r1, reducer2=r2,
    )


def pcca_posterior_mean(model, x, view):
    """Posterior mean of the latent given one view:
    (I + W^T Psi^-1 W)^-1 W^T Psi^-1 (x - mu).

    ``x`` is given in the model's coordinates (already reduced when the
    model was fitted with prereduction).
    """
    if view not in (1, 2):
        raise ValueError(f"view must be 1 or 2, got {view}")
    W = model.W1 if view == 1 else model.W2
    Psi = model.Psi1 if view == 1 else model.Psi2
    mu = model.mu1 if view == 1 else model.mu2
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != W.shape[0]:
        raise DimensionError(f"expected dim {W.shape[0]}, got {x.shape[0]}")
    try:
        PinvW = np.linalg.solve(Psi, W)
        Pinv_xc = np.linalg.solve(Psi, x - mu)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("noise covariance is singular") from exc
    M = np.eye(W.shape[1]) + W.T @ PinvW
    return np.linalg.solve(M, W.T @ Pinv_xc)
