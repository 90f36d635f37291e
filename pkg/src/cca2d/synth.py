"""Synthetic data from the bilinear generative model and the
loading-recovery experiment comparing 2DCCA against its probabilistic
counterpart."""

from dataclasses import dataclass, field

import numpy as np

from .p2dcca import fit_p2dcca
from .twodcca import fit_2dcca


@dataclass(frozen=True)
class SyntheticConfig:
    shape1: tuple = (5, 5)
    shape2: tuple = (5, 5)
    latent_shape: tuple = (1, 1)
    n_samples: int = 1000
    sigma1: float = 0.1
    sigma2: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if min(*self.shape1, *self.shape2, *self.latent_shape) < 1:
            raise ValueError("all shapes must be positive")
        if self.sigma1 < 0 or self.sigma2 < 0:
            raise ValueError("noise std dev must be >= 0")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")


@dataclass(frozen=True)
class GroundTruthLoadings:
    U1: np.ndarray
    U2: np.ndarray
    V1: np.ndarray
    V2: np.ndarray


def generate(config):
    """Draw (data1, data2, loadings) from T_i = U_i Z V_i^T + noise.

    Loadings are uniform on [0, 1], Z has standard normal entries and the
    per-view noise is i.i.d. normal with the configured std dev. Four
    independent substreams (loadings, Z, noise 1, noise 2) are spawned
    from the seed so each component is individually reproducible.
    """
    ss_load, ss_z, ss_n1, ss_n2 = np.random.SeedSequence(config.seed).spawn(4)
    rng_load = np.random.default_rng(ss_load)
    rng_z = np.random.default_rng(ss_z)
    rng_n1 = np.random.default_rng(ss_n1)
    rng_n2 = np.random.default_rng(ss_n2)

    m1, n1 = config.shape1
    m2, n2 = config.shape2
    mp, np_ = config.latent_shape
    truth = GroundTruthLoadings(
        U1=rng_load.uniform(0.0, 1.0, (m1, mp)),
        U2=rng_load.uniform(0.0, 1.0, (m2, mp)),
        V1=rng_load.uniform(0.0, 1.0, (n1, np_)),
        V2=rng_load.uniform(0.0, 1.0, (n2, np_)),
    )
    Z = rng_z.standard_normal((config.n_samples, mp, np_))
    data1 = np.einsum("ak,nkl,bl->nab", truth.U1, Z, truth.V1)
    data2 = np.einsum("ak,nkl,bl->nab", truth.U2, Z, truth.V2)
    if config.sigma1 > 0:
        data1 = data1 + config.sigma1 * rng_n1.standard_normal(data1.shape)
    if config.sigma2 > 0:
        data2 = data2 + config.sigma2 * rng_n2.standard_normal(data2.shape)
    return data1, data2, truth


def loading_distance(est, truth):
    """Sign-aligned Euclidean distance between unit-normalized vectors.

    min over s in {+1, -1} of || s est/|est| - truth/|truth| ||, which
    lies in [0, sqrt(2)].
    """
    est = np.asarray(est, dtype=float).ravel()
    truth = np.asarray(truth, dtype=float).ravel()
    if est.shape != truth.shape:
        raise ValueError(f"length mismatch: {est.shape} vs {truth.shape}")
    ne = np.linalg.norm(est)
    nt = np.linalg.norm(truth)
    if ne == 0 or nt == 0:
        raise ValueError("loading vectors must be nonzero")
    e = est / ne
    t = truth / nt
    return float(min(np.linalg.norm(e - t), np.linalg.norm(e + t)))


LOADING_NAMES = ("U1", "U2", "V1", "V2")
METHOD_NAMES = ("2dcca", "p2dcca")


@dataclass
class RecoveryResult:
    """Per-trial loading-recovery distances plus aggregate statistics."""

    rows: list = field(default_factory=list)  # (method, loading, N, sigma, trial, distance)
    failures: int = 0

    def summary(self):
        """Mean and std of distance per (method, loading)."""
        out = {}
        for method in METHOD_NAMES:
            for name in LOADING_NAMES:
                vals = [r[5] for r in self.rows if r[0] == method and r[1] == name]
                if vals:
                    out[(method, name)] = (
                        float(np.mean(vals)), float(np.std(vals)))
        return out


def _trial_distances(config, trial_seed, Tmax=1):
    cfg = SyntheticConfig(
        shape1=config.shape1, shape2=config.shape2,
        latent_shape=config.latent_shape, n_samples=config.n_samples,
        sigma1=config.sigma1, sigma2=config.sigma2, seed=trial_seed)
    data1, data2, truth = generate(cfg)
    mp, np_ = cfg.latent_shape
    model2d = fit_2dcca(data1, data2, mp, np_)
    modelp, _ = fit_p2dcca(data1, data2, mp, np_, Tmax=Tmax, seed=trial_seed)
    out = {}
    for method, model in (("2dcca", model2d), ("p2dcca", modelp)):
        for name in LOADING_NAMES:
            out[(method, name)] = loading_distance(
                getattr(model, name), getattr(truth, name))
    return out


def recovery_experiment(config, trials, Tmax=1):
    """Run the generate-then-fit recovery comparison.

    Per trial: draw a dataset, fit both methods with a rank-one latent
    (or the configured latent shape), record the sign-aligned distance of
    each estimated loading to the ground truth. Failed trials are counted
    and excluded.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    result = RecoveryResult()
    base = np.random.SeedSequence(config.seed)
    trial_seeds = [int(s.generate_state(1)[0]) for s in base.spawn(trials)]
    for trial, tseed in enumerate(trial_seeds):
        try:
            dists = _trial_distances(config, tseed, Tmax=Tmax)
        except Exception:
            result.failures += 1
            continue
        for (method, name), dist in dists.items():
            result.rows.append(
                (method, name, config.n_samples,
                 float(config.sigma1), trial, dist))
    return result
