import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from cca2d.evaluate import (
    METHODS,
    feature_distance,
    independent_t_test,
    nn_classify_dual,
    run_protocol,
)
from cca2d.imagedata import ImageSample, PairedFold, SplitPlan
from cca2d.linalg import DimensionError


class TestFeatureDistance:
    def test_identical(self):
        a = np.random.default_rng(0).uniform(size=(3, 3))
        assert feature_distance(a, a) == 0.0

    def test_ones_matrix(self):
        a = np.zeros((2, 2))
        b = np.ones((2, 2))
        assert feature_distance(a, b) == 2.0

    def test_entrywise_oracle(self):
        rng = np.random.default_rng(1)
        a = rng.standard_normal((4, 5))
        b = rng.standard_normal((4, 5))
        oracle = np.sqrt(sum((a[i, j] - b[i, j]) ** 2
                             for i in range(4) for j in range(5)))
        np.testing.assert_allclose(feature_distance(a, b), oracle, atol=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            feature_distance(np.zeros(3), np.zeros(4), kind="euclidean")


class TestNNClassifyDual:
    def test_exact_match_wins(self):
        rng = np.random.default_rng(2)
        train = [rng.standard_normal((2, 2)) for _ in range(4)]
        labels = ["a", "b", "c", "d"]
        pred = nn_classify_dual(train, train, labels, train[2], train[2])
        assert pred == "c"

    def test_single_class(self):
        rng = np.random.default_rng(3)
        train = [rng.standard_normal(3)]
        pred = nn_classify_dual(train, train, ["only"],
                                rng.standard_normal(3),
                                rng.standard_normal(3), kind="euclidean")
        assert pred == "only"

    def test_against_exhaustive_enumeration(self):
        rng = np.random.default_rng(4)
        tl = [rng.standard_normal(3) for _ in range(4)]
        tr = [rng.standard_normal(3) for _ in range(4)]
        labels = ["a", "a", "b", "b"]
        xl = rng.standard_normal(3)
        xr = rng.standard_normal(3)
        pools = [(np.linalg.norm(x - f), i)
                 for i, fs in enumerate(zip(tl, tr))
                 for f in fs for x in (xl, xr)]
        best_idx = min(pools)[1]
        pred = nn_classify_dual(tl, tr, labels, xl, xr, kind="euclidean")
        assert pred == labels[best_idx]

    def test_identical_views_reduce_to_single_view(self):
        rng = np.random.default_rng(5)
        train = [rng.standard_normal(4) for _ in range(5)]
        labels = list("abcde")
        x = rng.standard_normal(4)
        single = labels[int(np.argmin([np.linalg.norm(x - f) for f in train]))]
        pred = nn_classify_dual(train, train, labels, x, x, kind="euclidean")
        assert pred == single

    def test_empty_training_raises(self):
        with pytest.raises(ValueError):
            nn_classify_dual([], [], [], np.zeros(2), np.zeros(2))


def class_structured_plan(n_classes=10, shape=(12, 12), noise=0.1, seed=0):
    """AR-style plan over synthetic per-class mean matrices plus noise."""
    rng = np.random.default_rng(seed)
    conditions = ["ref", "v1", "v2", "v3"]
    folds = []
    means = {f"c{k}": rng.standard_normal(shape) for k in range(n_classes)}
    samples = {
        (label, cond): ImageSample(
            subject_id=label, condition=cond,
            pixels=means[label] + noise * rng.standard_normal(shape))
        for label in means for cond in conditions}
    for right_cond in conditions[1:]:
        left = [(samples[(lab, "ref")], lab) for lab in sorted(means)]
        right = [(samples[(lab, right_cond)], lab) for lab in sorted(means)]
        test = [(samples[(lab, c)], lab) for lab in sorted(means)
                for c in conditions[1:] if c != right_cond]
        folds.append(PairedFold(left_train=left, right_train=right, test=test))
    return SplitPlan(folds=folds, protocol="desk-ar")


class TestRunProtocol:
    def test_memorization_gives_perfect_accuracy(self):
        plan = class_structured_plan(n_classes=5)
        fold = plan.folds[0]
        degenerate = SplitPlan(
            folds=[PairedFold(fold.left_train, fold.right_train,
                              list(fold.left_train))],
            protocol="degenerate")
        for method in METHODS:
            res = run_protocol(method, degenerate, 3, {"seed": 0})
            assert res.fold_accuracies == (1.0,), method

    def test_separable_dataset_high_accuracy(self):
        plan = class_structured_plan()
        for method in METHODS:
            res = run_protocol(method, plan, 5, {"seed": 0})
            assert res.mean_accuracy > 0.9, (method, res.fold_accuracies)

    def test_identical_folds_identical_accuracy(self):
        plan = class_structured_plan(n_classes=4)
        doubled = SplitPlan(folds=[plan.folds[0], plan.folds[0]],
                            protocol="twice")
        res = run_protocol("2dcca", doubled, 3)
        assert res.fold_accuracies[0] == res.fold_accuracies[1]

    def test_mean_accuracy_is_arithmetic_mean(self):
        plan = class_structured_plan(n_classes=4)
        res = run_protocol("cca", plan, 3)
        assert abs(res.mean_accuracy
                   - sum(res.fold_accuracies) / len(res.fold_accuracies)) < 1e-12

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            run_protocol("lda", class_structured_plan(n_classes=3), 2)


def t_cdf_oracle(t_stat, df):
    """Two-sided p-value by numerical integration of the t density."""
    const = (np.exp(math.lgamma((df + 1) / 2) - math.lgamma(df / 2))
             / np.sqrt(df * np.pi))
    pdf = lambda x: const * (1 + x * x / df) ** (-(df + 1) / 2)
    tail, _ = integrate.quad(pdf, abs(t_stat), np.inf)
    return 2 * tail


class TestTTest:
    def test_identical_samples(self):
        a = [0.8, 0.85, 0.9]
        assert independent_t_test(a, list(a)) == 1.0

    def test_extreme_separation(self):
        p = independent_t_test([0.9, 0.91, 0.92], [0.1, 0.11, 0.12])
        assert p < 1e-6

    def test_matches_integrated_cdf_oracle(self):
        a = np.array([0.82, 0.79, 0.85, 0.81, 0.80])
        b = np.array([0.74, 0.77, 0.73, 0.78, 0.75])
        na, nb = len(a), len(b)
        sp2 = (((na - 1) * np.var(a, ddof=1) + (nb - 1) * np.var(b, ddof=1))
               / (na + nb - 2))
        t_stat = (a.mean() - b.mean()) / np.sqrt(sp2 * (1 / na + 1 / nb))
        oracle = t_cdf_oracle(t_stat, na + nb - 2)
        np.testing.assert_allclose(
            independent_t_test(a, b), oracle, atol=1e-6)

    def test_degenerate_length_rejected(self):
        with pytest.raises(ValueError):
            independent_t_test([0.5], [0.4, 0.6])

    def test_zero_variance_unequal_means(self):
        assert independent_t_test([0.5, 0.5], [0.6, 0.6]) == 0.0

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000))
    def test_symmetry(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.uniform(size=4)
        b = rng.uniform(size=6)
        assert abs(independent_t_test(a, b)
                   - independent_t_test(b, a)) < 1e-12
