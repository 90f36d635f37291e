"""Two-dimensional CCA: left/right transforms fitted by alternating
generalized eigenproblems over row-side and column-side covariances."""

from dataclasses import dataclass

import numpy as np

from .cca import DEFAULT_EPS, _paired_directions, _sign_fix_pair
from .linalg import DimensionError, regularize_spd


@dataclass(frozen=True)
class TwoDCCAModel:
    U1: np.ndarray  # m1 x d1
    U2: np.ndarray  # m2 x d1
    V1: np.ndarray  # n1 x d2
    V2: np.ndarray  # n2 x d2
    mu1: np.ndarray
    mu2: np.ndarray
    d1: int
    d2: int
    rho_history: tuple = ()  # leading canonical correlation per pass


def _check_stacks(data1, data2):
    data1 = np.asarray(data1, dtype=float)
    data2 = np.asarray(data2, dtype=float)
    if data1.ndim != 3 or data2.ndim != 3:
        raise DimensionError("data must be N x rows x cols stacks")
    if data1.shape[0] != data2.shape[0]:
        raise DimensionError(
            f"sample count mismatch: {data1.shape[0]} vs {data2.shape[0]}"
        )
    return data1, data2


def cov_right(data1, data2, V1, V2, pair):
    """Row-side covariance (1/N) sum_n (T_i - mu_i) V_i V_j^T (T_j - mu_j)^T
    for the requested view pair (i, j)."""
    data1, data2 = _check_stacks(data1, data2)
    stacks = {1: data1, 2: data2}
    Vs = {1: np.asarray(V1, dtype=float), 2: np.asarray(V2, dtype=float)}
    i, j = pair
    Ti, Tj = stacks[i], stacks[j]
    Vi, Vj = Vs[i], Vs[j]
    if Vi.shape[1] != Vj.shape[1]:
        raise DimensionError("V matrices must share a column count")
    if Ti.shape[2] != Vi.shape[0] or Tj.shape[2] != Vj.shape[0]:
        raise DimensionError("V row counts must match data column counts")
    Ci = Ti - Ti.mean(axis=0)
    Cj = Tj - Tj.mean(axis=0)
    Pi = Ci @ Vi           # N x m_i x d2
    Pj = Cj @ Vj
    return np.einsum("nak,nbk->ab", Pi, Pj) / Ti.shape[0]


def cov_left(data1, data2, U1, U2, pair):
    """Column-side covariance (1/N) sum_n (T_i - mu_i)^T U_i U_j^T (T_j - mu_j)."""
    data1, data2 = _check_stacks(data1, data2)
    stacks = {1: data1, 2: data2}
    Us = {1: np.asarray(U1, dtype=float), 2: np.asarray(U2, dtype=float)}
    i, j = pair
    Ti, Tj = stacks[i], stacks[j]
    Ui, Uj = Us[i], Us[j]
    if Ui.shape[1] != Uj.shape[1]:
        raise DimensionError("U matrices must share a column count")
    if Ti.shape[1] != Ui.shape[0] or Tj.shape[1] != Uj.shape[0]:
        raise DimensionError("U row counts must match data row counts")
    Ci = Ti - Ti.mean(axis=0)
    Cj = Tj - Tj.mean(axis=0)
    Pi = np.einsum("nab,ak->nbk", Ci, Ui)   # N x n_i x d1
    Pj = np.einsum("nab,ak->nbk", Cj, Uj)
    return np.einsum("nak,nbk->ab", Pi, Pj) / Ti.shape[0]


def _solve_side(S11, S12, S22, d, eps):
    S11 = regularize_spd(S11, eps)
    S22 = regularize_spd(S22, eps)
    a, b, rho = _paired_directions(S11, S12, S22, d)
    return _sign_fix_pair(a, b) + (rho,)


def fit_2dcca(data1, data2, d1, d2, iters=10, eps=DEFAULT_EPS, tol=1e-6):
    """Alternate the row-side and column-side coupled eigenproblems until
    the leading canonical correlation stabilizes.

    V's start as identity-prefix columns; each pass solves for U's with
    V's fixed, then for V's with the new U's fixed.
    """
    data1, data2 = _check_stacks(data1, data2)
    N, m1, n1 = data1.shape
    _, m2, n2 = data2.shape
    if N < 2:
        raise DimensionError("need at least two samples")
    if not 1 <= d1 <= min(m1, m2) or not 1 <= d2 <= min(n1, n2):
        raise DimensionError(f"latent dims ({d1}, {d2}) out of range")
    if iters < 1:
        raise DimensionError("iters must be >= 1")

    V1 = np.eye(n1, d2)
    V2 = np.eye(n2, d2)
    history = []
    last_rho = None
    for _ in range(iters):
        U1, U2, rho_u = _solve_side(
            cov_right(data1, data2, V1, V2, (1, 1)),
            cov_right(data1, data2, V1, V2, (1, 2)),
            cov_right(data1, data2, V1, V2, (2, 2)),
            d1, eps,
        )
        V1, V2, _ = _solve_side(
            cov_left(data1, data2, U1, U2, (1, 1)),
            cov_left(data1, data2, U1, U2, (1, 2)),
            cov_left(data1, data2, U1, U2, (2, 2)),
            d2, eps,
        )
        lead = float(rho_u[0])
        history.append(lead)
        if last_rho is not None and abs(lead - last_rho) < tol:
            break
        last_rho = lead

    return TwoDCCAModel(
        U1=U1, U2=U2, V1=V1, V2=V2,
        mu1=data1.mean(axis=0), mu2=data2.mean(axis=0),
        d1=d1, d2=d2, rho_history=tuple(history),
    )


def project_2dcca(model, T, view):
    """Bilinear projection U_view^T (T - mu_view) V_view."""
    if view not in (1, 2):
        raise ValueError(f"view must be 1 or 2, got {view}")
    U = model.U1 if view == 1 else model.U2
    V = model.V1 if view == 1 else model.V2
    mu = model.mu1 if view == 1 else model.mu2
    T = np.asarray(T, dtype=float)
    if T.shape != mu.shape:
        raise DimensionError(f"expected shape {mu.shape}, got {T.shape}")
    return U.T @ (T - mu) @ V
