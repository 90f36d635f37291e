"""Probabilistic 2DCCA: a bilinear latent model T = U Z V^T + mu + noise
fitted by a decoupled left/right EM procedure, with probabilistic
projection and likelihood monitoring."""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .linalg import DimensionError, NumericalError
from .twodcca import fit_2dcca

PSI_FLOOR = 1e-12


@dataclass(frozen=True)
class P2DCCAModel:
    U1: np.ndarray      # m1 x row_latent
    U2: np.ndarray      # m2 x row_latent
    V1: np.ndarray      # n1 x col_latent
    V2: np.ndarray      # n2 x col_latent
    PsiL1: np.ndarray   # m1 x m1
    PsiL2: np.ndarray   # m2 x m2
    PsiR1: np.ndarray   # n1 x n1
    PsiR2: np.ndarray   # n2 x n2
    mu1: np.ndarray     # m1 x n1
    mu2: np.ndarray     # m2 x n2
    row_latent: int
    col_latent: int


@dataclass(frozen=True)
class LatentStats:
    """Posterior moments of the latent columns for one EM sweep."""

    precision: np.ndarray       # M = I + L^T Psi^-1 L
    posterior_mean: np.ndarray  # N x J x k
    second_moment: np.ndarray   # N x J x k x k


@dataclass
class EMTrace:
    """Observed-data log-likelihoods recorded per EM iteration, one list
    per outer alternation pass."""

    left: list = field(default_factory=list)
    right: list = field(default_factory=list)

    @property
    def left_iterations(self):
        return [len(seq) for seq in self.left]

    @property
    def right_iterations(self):
        return [len(seq) for seq in self.right]


def _psd_floor(M, floor=PSI_FLOOR):
    M = 0.5 * (M + M.T)
    w, V = np.linalg.eigh(M)
    if w.min() >= floor:
        return M
    return (V * np.maximum(w, floor)) @ V.T


def _chol_inverse(Psi, context):
    try:
        c, lower = sla.cho_factor(Psi, lower=True)
    except sla.LinAlgError as exc:
        raise NumericalError(f"{context}: covariance not positive definite") from exc
    return sla.cho_solve((c, lower), np.eye(Psi.shape[0]))


def e_step(tau, loading, psi, col_means):
    """Posterior moments of the latent columns.

    tau is N x J x p (J independent columns per sample), col_means is
    J x p. Returns M = I + L^T Psi^-1 L together with per-sample
    posterior means M^-1 L^T Psi^-1 (tau - m) and second moments
    M^-1 + E[z] E[z]^T.
    """
    tau = np.asarray(tau, dtype=float)
    loading = np.asarray(loading, dtype=float)
    psi = np.asarray(psi, dtype=float)
    col_means = np.asarray(col_means, dtype=float)
    if tau.ndim != 3 or tau.shape[2] != loading.shape[0]:
        raise DimensionError("tau must be N x J x p with p matching the loading")
    k = loading.shape[1]
    psi_inv = _chol_inverse(psi, "e-step")
    M = np.eye(k) + loading.T @ psi_inv @ loading
    A = np.linalg.solve(M, loading.T @ psi_inv)   # k x p
    centered = tau - col_means[None, :, :]
    Ez = centered @ A.T
    M_inv = np.linalg.inv(M)
    Ezz = M_inv[None, None] + np.einsum("nja,njb->njab", Ez, Ez)
    return LatentStats(precision=M, posterior_mean=Ez, second_moment=Ezz)


def m_step(tau, col_means, stats, block_sizes):
    """Factor-analysis M-step over the stacked two-view observation.

    Returns the new loading [sum (tau-m) Ez^T][sum Ezz]^-1 and the new
    noise covariance: diagonal blocks of the symmetrized residual
    (1/(N J)) sum [(tau-m)(tau-m)^T - L_new Ez (tau-m)^T], off-blocks
    zeroed, eigenvalues floored.
    """
    tau = np.asarray(tau, dtype=float)
    col_means = np.asarray(col_means, dtype=float)
    centered = tau - col_means[None, :, :]
    N, J, p = centered.shape
    Ez = stats.posterior_mean
    S_xz = np.einsum("njp,njk->pk", centered, Ez)
    S_zz = stats.second_moment.sum(axis=(0, 1))
    try:
        L_new = np.linalg.solve(S_zz.T, S_xz.T).T
    except np.linalg.LinAlgError as exc:
        raise NumericalError("m-step: accumulated second moment is singular") from exc

    S_xx = np.einsum("njp,njq->pq", centered, centered)
    resid = (S_xx - L_new @ S_xz.T) / (N * J)
    resid = 0.5 * (resid + resid.T)
    p1, p2 = block_sizes
    if p1 + p2 != p:
        raise DimensionError(f"block sizes {block_sizes} do not sum to {p}")
    psi_new = np.zeros_like(resid)
    psi_new[:p1, :p1] = _psd_floor(resid[:p1, :p1])
    psi_new[p1:, p1:] = _psd_floor(resid[p1:, p1:])
    return L_new, psi_new


def expected_loglik(tau, col_means, loading, psi):
    """Observed-data log-likelihood sum_{n,j} log N(tau | m_j, LL^T + Psi)."""
    tau = np.asarray(tau, dtype=float)
    col_means = np.asarray(col_means, dtype=float)
    loading = np.asarray(loading, dtype=float)
    p = loading.shape[0]
    sigma = loading @ loading.T + psi
    try:
        c, lower = sla.cho_factor(sigma, lower=True)
    except sla.LinAlgError as exc:
        raise NumericalError("model covariance not positive definite") from exc
    logdet = 2.0 * float(np.sum(np.log(np.diag(c))))
    centered = tau - col_means[None, :, :]
    flat = centered.reshape(-1, p)
    solved = sla.cho_solve((c, lower), flat.T)
    quad = float(np.sum(flat.T * solved))
    n_terms = flat.shape[0]
    return -0.5 * (n_terms * (p * np.log(2.0 * np.pi) + logdet) + quad)


def _run_em(tau, loading0, psi0, block_sizes, tol, max_iters):
    """EM loop for one side; returns final parameters, per-column means
    and the per-iteration log-likelihood sequence."""
    col_means = tau.mean(axis=0)
    loading, psi = loading0, psi0
    trace = []
    for _ in range(max_iters):
        stats = e_step(tau, loading, psi, col_means)
        loading, psi = m_step(tau, col_means, stats, block_sizes)
        ll = expected_loglik(tau, col_means, loading, psi)
        trace.append(ll)
        if len(trace) >= 2:
            prev = trace[-2]
            if abs(ll - prev) < tol * abs(prev):
                break
    return loading, psi, col_means, trace


def _posterior_projector(loading, psi, context):
    """M^-1 L^T Psi^-1 for a stacked loading; split per view afterwards."""
    psi_inv = _chol_inverse(psi, context)
    M = np.eye(loading.shape[1]) + loading.T @ psi_inv @ loading
    return np.linalg.solve(M, loading.T @ psi_inv)


def left_project_all(model, data, view):
    """Project raw observations through the right-side posterior factor:
    (T - mu) [(M^r)^-1 V_i^T (Psi_i^r)^-1]^T, one m_i x col_latent matrix
    per sample."""
    if view not in (1, 2):
        raise ValueError(f"view must be 1 or 2, got {view}")
    V = np.vstack([model.V1, model.V2])
    psi = sla.block_diag(model.PsiR1, model.PsiR2)
    A = _posterior_projector(V, psi, "left projection")   # col_latent x (n1+n2)
    n1 = model.V1.shape[0]
    Ai = A[:, :n1] if view == 1 else A[:, n1:]
    mu = model.mu1 if view == 1 else model.mu2
    data = np.asarray(data, dtype=float)
    return (data - mu) @ Ai.T


def right_project_all(model, data, view):
    """Project raw observations through the left-side posterior factor:
    [(M^l)^-1 U_i^T (Psi_i^l)^-1 (T - mu)]^T, one n_i x row_latent matrix
    per sample (columns indexed by the view's n_i axis)."""
    if view not in (1, 2):
        raise ValueError(f"view must be 1 or 2, got {view}")
    U = np.vstack([model.U1, model.U2])
    psi = sla.block_diag(model.PsiL1, model.PsiL2)
    A = _posterior_projector(U, psi, "right projection")  # row_latent x (m1+m2)
    m1 = model.U1.shape[0]
    Ai = A[:, :m1] if view == 1 else A[:, m1:]
    mu = model.mu1 if view == 1 else model.mu2
    data = np.asarray(data, dtype=float)
    return np.einsum("km,nmb->nbk", Ai, data - mu)


def _stack_columns(P1, P2):
    """Stack the two views' projected matrices column-wise into
    N x J x (p1+p2) with J the shared column count."""
    return np.concatenate(
        [P1.transpose(0, 2, 1), P2.transpose(0, 2, 1)], axis=2
    )


def fit_p2dcca(data1, data2, row_latent, col_latent, Tmax=1,
               em_tol=1e-5, em_max_iters=100, seed=None,
               random_psi_init=False):
    """Fit the bilinear probabilistic model by the decoupled EM procedure.

    Transforms are initialized from a 2DCCA fit and the noise covariances
    from the identity (a seeded random diagonal initialization is
    available via ``random_psi_init``). Each outer pass projects the raw
    data through the current right model, runs EM on the left
    factor-analysis model, then mirrors the procedure for the right side.
    """
    data1 = np.asarray(data1, dtype=float)
    data2 = np.asarray(data2, dtype=float)
    if Tmax < 1:
        raise DimensionError("Tmax must be >= 1")
    init = fit_2dcca(data1, data2, row_latent, col_latent)
    N, m1, n1 = data1.shape
    _, m2, n2 = data2.shape

    rng = np.random.default_rng(seed)

    def fresh_psi(p1, p2):
        if random_psi_init:
            return (np.diag(rng.uniform(0.5, 1.5, p1)),
                    np.diag(rng.uniform(0.5, 1.5, p2)))
        return np.eye(p1), np.eye(p2)

    U1, U2, V1, V2 = init.U1, init.U2, init.V1, init.V2
    PsiL1, PsiL2 = fresh_psi(m1, m2)
    PsiR1, PsiR2 = fresh_psi(n1, n2)
    mu1 = data1.mean(axis=0)
    mu2 = data2.mean(axis=0)
    trace = EMTrace()

    model = P2DCCAModel(U1, U2, V1, V2, PsiL1, PsiL2, PsiR1, PsiR2,
                        mu1, mu2, row_latent, col_latent)
    for _ in range(Tmax):
        # left model: latent rows, J = col_latent independent columns
        tau_l = _stack_columns(
            left_project_all(model, data1, 1),
            left_project_all(model, data2, 2),
        )
        U_stack = np.vstack([model.U1, model.U2])
        psi_l = sla.block_diag(model.PsiL1, model.PsiL2)
        U_stack, psi_l, _, ll_left = _run_em(
            tau_l, U_stack, psi_l, (m1, m2), em_tol, em_max_iters)
        trace.left.append(ll_left)
        model = P2DCCAModel(
            U_stack[:m1], U_stack[m1:], model.V1, model.V2,
            psi_l[:m1, :m1], psi_l[m1:, m1:], model.PsiR1, model.PsiR2,
            mu1, mu2, row_latent, col_latent)

        # right model: latent columns, J = row_latent independent columns
        tau_r = _stack_columns(
            right_project_all(model, data1, 1),
            right_project_all(model, data2, 2),
        )
        V_stack = np.vstack([model.V1, model.V2])
        psi_r = sla.block_diag(model.PsiR1, model.PsiR2)
        V_stack, psi_r, _, ll_right = _run_em(
            tau_r, V_stack, psi_r, (n1, n2), em_tol, em_max_iters)
        trace.right.append(ll_right)
        model = P2DCCAModel(
            model.U1, model.U2, V_stack[:n1], V_stack[n1:],
            model.PsiL1, model.PsiL2, psi_r[:n1, :n1], psi_r[n1:, n1:],
            mu1, mu2, row_latent, col_latent)

    return model, trace


def reduce_dimension(model, T, view):
    """Bilinear posterior-mean projection
    (M^l)^-1 U_i^T (Psi_i^l)^-1 (T - mu_i) [(M^r)^-1 V_i^T (Psi_i^r)^-1]^T."""
    if view not in (1, 2):
        raise ValueError(f"view must be 1 or 2, got {view}")
    mu = model.mu1 if view == 1 else model.mu2
    T = np.asarray(T, dtype=float)
    if T.shape != mu.shape:
        raise DimensionError(f"expected shape {mu.shape}, got {T.shape}")

    U = np.vstack([model.U1, model.U2])
    psi_l = sla.block_diag(model.PsiL1, model.PsiL2)
    AL = _posterior_projector(U, psi_l, "left factor")
    V = np.vstack([model.V1, model.V2])
    psi_r = sla.block_diag(model.PsiR1, model.PsiR2)
    AR = _posterior_projector(V, psi_r, "right factor")

    m1 = model.U1.shape[0]
    n1 = model.V1.shape[0]
    ALi = AL[:, :m1] if view == 1 else AL[:, m1:]
    ARi = AR[:, :n1] if view == 1 else AR[:, n1:]
    return ALi @ (T - mu) @ ARi.T


FORMAT_VERSION = 1


def save_model(model, path):
    """Serialize a fitted model losslessly to an npz container."""
    np.savez(
        path,
        format_version=np.array(FORMAT_VERSION),
        row_latent=np.array(model.row_latent),
        col_latent=np.array(model.col_latent),
        U1=model.U1, U2=model.U2, V1=model.V1, V2=model.V2,
        PsiL1=model.PsiL1, PsiL2=model.PsiL2,
        PsiR1=model.PsiR1, PsiR2=model.PsiR2,
        mu1=model.mu1, mu2=model.mu2,
    )


def load_model(path):
    with np.load(path) as z:
        version = int(z["format_version"])
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported model format version {version}")
        return P2DCCAModel(
            U1=z["U1"], U2=z["U2"], V1=z["V1"], V2=z["V2"],
            PsiL1=z["PsiL1"], PsiL2=z["PsiL2"],
            PsiR1=z["PsiR1"], PsiR2=z["PsiR2"],
            mu1=z["mu1"], mu2=z["mu2"],
            row_latent=int(z["row_latent"]), col_latent=int(z["col_latent"]),
        )
