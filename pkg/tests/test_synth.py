import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cca2d.synth import (
    SyntheticConfig,
    generate,
    loading_distance,
    recovery_experiment,
)


class TestGenerate:
    def test_noiseless_latent_scalar_gives_rank_one(self):
        cfg = SyntheticConfig(n_samples=20, sigma1=0.0, sigma2=0.0, seed=1)
        d1, d2, _ = generate(cfg)
        for T in list(d1) + list(d2):
            s = np.linalg.svd(T, compute_uv=False)
            assert np.all(s[1:] < 1e-10)

    def test_entry_variance_moment_check(self):
        cfg = SyntheticConfig(n_samples=10000, sigma1=0.1, sigma2=0.1, seed=2)
        d1, _, truth = generate(cfg)
        signal = truth.U1 @ truth.V1.T
        expected = signal**2 + 0.01
        observed = d1.var(axis=0)
        assert np.all(np.abs(observed - expected) / expected < 0.05)

    def test_determinism(self):
        cfg = SyntheticConfig(n_samples=50, seed=7)
        a1, a2, ta = generate(cfg)
        b1, b2, tb = generate(cfg)
        np.testing.assert_array_equal(a1, b1)
        np.testing.assert_array_equal(a2, b2)
        np.testing.assert_array_equal(ta.U1, tb.U1)

    def test_loadings_in_unit_interval(self):
        _, _, truth = generate(SyntheticConfig(n_samples=2, seed=3))
        for L in (truth.U1, truth.U2, truth.V1, truth.V2):
            assert np.all((L >= 0) & (L <= 1))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SyntheticConfig(sigma1=-1.0)
        with pytest.raises(ValueError):
            SyntheticConfig(n_samples=0)


class TestLoadingDistance:
    def test_identical_vectors(self):
        v = np.array([1.0, 2.0, 3.0])
        assert loading_distance(v, v) == 0.0

    def test_sign_alignment(self):
        v = np.array([1.0, -2.0, 0.5])
        assert loading_distance(-v, v) == 0.0

    def test_orthogonal_unit_vectors(self):
        np.testing.assert_allclose(
            loading_distance([1.0, 0.0], [0.0, 1.0]), np.sqrt(2), atol=1e-12)

    def test_zero_norm_rejected(self):
        with pytest.raises(ValueError):
            loading_distance([0.0, 0.0], [1.0, 0.0])

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10_000), st.floats(0.1, 50.0), st.floats(0.1, 50.0))
    def test_symmetry_and_scale_invariance(self, seed, s1, s2):
        rng = np.random.default_rng(seed)
        a = rng.standard_normal(4)
        b = rng.standard_normal(4)
        d = loading_distance(a, b)
        assert abs(d - loading_distance(b, a)) < 1e-12
        assert abs(d - loading_distance(s1 * a, s2 * b)) < 1e-12
        assert 0.0 <= d <= np.sqrt(2) + 1e-12


class TestRecoveryExperiment:
    def test_noiseless_recovery(self):
        cfg = SyntheticConfig(n_samples=1000, sigma1=0.0, sigma2=0.0, seed=11)
        res = recovery_experiment(cfg, trials=1)
        assert res.failures == 0
        for (_, _), (mean, _) in res.summary().items():
            assert mean < 0.05

    def test_p2dcca_beats_2dcca_at_reference_point(self):
        cfg = SyntheticConfig(n_samples=1000, sigma1=0.1, sigma2=0.1, seed=12)
        res = recovery_experiment(cfg, trials=5)
        summary = res.summary()
        for name in ("U1", "U2", "V1", "V2"):
            assert summary[("p2dcca", name)][0] < summary[("2dcca", name)][0]

    def test_row_schema(self):
        cfg = SyntheticConfig(n_samples=200, seed=13)
        res = recovery_experiment(cfg, trials=2)
        assert len(res.rows) == 2 * 2 * 4  # trials x methods x loadings
        method, loading, n, sigma, trial, dist = res.rows[0]
        assert method in ("2dcca", "p2dcca")
        assert n == 200 and isinstance(dist, float)
