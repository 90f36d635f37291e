"""Dual-view nearest-neighbor recognition, protocol execution and the
two-sample significance test."""

from dataclasses import dataclass

import numpy as np
from scipy import stats as spstats

from .cca import fit_cca, project_cca
from .linalg import DimensionError
from .pcca import fit_pcca_ml, pcca_posterior_mean
from .p2dcca import fit_p2dcca, reduce_dimension
from .twodcca import fit_2dcca, project_2dcca

METHODS = ("cca", "pcca", "2dcca", "p2dcca")


@dataclass(frozen=True)
class RecognitionResult:
    method: str
    protocol: str
    feature_dim: int
    fold_accuracies: tuple

    @property
    def mean_accuracy(self):
        return float(np.mean(self.fold_accuracies))


def feature_distance(a, b, kind="frobenius"):
    """Frobenius distance for matrix features, Euclidean for vectors.

    Both reduce to the root sum of squared entry differences, so the two
    kinds share one implementation; the kind argument documents intent
    and validates shape expectations.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")
    if kind not in ("frobenius", "euclidean"):
        raise ValueError(f"unknown distance kind {kind!r}")
    return float(np.linalg.norm(a - b))


def nn_classify_dual(train_left_feats, train_right_feats, train_labels,
                     test_feat_left, test_feat_right, kind="frobenius"):
    """1-NN over both views: each of the two test projections is compared
    against both training feature sets and the globally nearest training
    item's label wins. Ties break to the smallest training index."""
    if not train_labels:
        raise ValueError("training set is empty")
    n = len(train_labels)
    best = np.full(n, np.inf)
    for feats in (train_left_feats, train_right_feats):
        for i in range(n):
            for test_feat in (test_feat_left, test_feat_right):
                d = feature_distance(test_feat, feats[i], kind)
                if d < best[i]:
                    best[i] = d
    return train_labels[int(np.argmin(best))]


def _flatten(T):
    # column-major flattening for vector methods
    return np.asarray(T, dtype=float).ravel(order="F")


def _fit_and_project(method, left_imgs, right_imgs, d, params):
    """Fit one method on aligned (left, right) image stacks and return
    (project_left, project_right, distance kind)."""
    params = dict(params or {})
    if method in ("cca", "pcca"):
        X1 = np.stack([_flatten(t) for t in left_imgs])
        X2 = np.stack([_flatten(t) for t in right_imgs])
        if method == "cca":
            model = fit_cca(X1, X2, d, params.get("eps", 1e-6))
            return (lambda T: project_cca(model, _flatten(T), 1),
                    lambda T: project_cca(model, _flatten(T), 2),
                    "euclidean")
        n, D = X1.shape
        prereduce = params.get("prereduce")
        if prereduce is None and D > n - 1:
            prereduce = max(d, min(n - 1, D, 150))
        model = fit_pcca_ml(X1, X2, d, params.get("eps", 1e-6),
                            prereduce=prereduce)

        def proj(T, view):
            x = _flatten(T)
            reducer = model.reducer1 if view == 1 else model.reducer2
            if reducer is not None:
                x = reducer.transform(x)
            return pcca_posterior_mean(model, x, view)

        return (lambda T: proj(T, 1), lambda T: proj(T, 2), "euclidean")

    data1 = np.stack([np.asarray(t, dtype=float) for t in left_imgs])
    data2 = np.stack([np.asarray(t, dtype=float) for t in right_imgs])
    if method == "2dcca":
        model = fit_2dcca(data1, data2, d, d,
                          iters=params.get("iters", 10),
                          eps=params.get("eps", 1e-6))
        return (lambda T: project_2dcca(model, T, 1),
                lambda T: project_2dcca(model, T, 2),
                "frobenius")
    if method == "p2dcca":
        model, trace = fit_p2dcca(
            data1, data2, d, d,
            Tmax=params.get("Tmax", 1),
            em_tol=params.get("em_tol", 1e-5),
            em_max_iters=params.get("em_max_iters", 100),
            seed=params.get("seed"))
        fns = (lambda T: reduce_dimension(model, T, 1),
               lambda T: reduce_dimension(model, T, 2),
               "frobenius")
        if params.get("collect_trace") is not None:
            params["collect_trace"].append(trace)
        return fns
    raise ValueError(f"unknown method {method!r}")


def run_protocol(method, plan, d, method_params=None):
    """Run one method over every fold of a split plan.

    Per fold: fit on the aligned training pairs, project both training
    sets and both views of each test image, then classify with the
    dual-view 1-NN rule.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    accuracies = []
    for fold in plan.folds:
        left_imgs = [s.pixels for s, _ in fold.left_train]
        right_imgs = [s.pixels for s, _ in fold.right_train]
        labels = [lab for _, lab in fold.left_train]
        proj1, proj2, kind = _fit_and_project(
            method, left_imgs, right_imgs, d, method_params)
        train_left = [proj1(t) for t in left_imgs]
        train_right = [proj2(t) for t in right_imgs]
        correct = 0
        for sample, label in fold.test:
            pred = nn_classify_dual(
                train_left, train_right, labels,
                proj1(sample.pixels), proj2(sample.pixels), kind)
            correct += pred == label
        accuracies.append(correct / len(fold.test))
    return RecognitionResult(
        method=method, protocol=plan.protocol, feature_dim=d,
        fold_accuracies=tuple(accuracies))


def independent_t_test(a, b, welch=False):
    """Two-sided two-sample t-test p-value (pooled variance by default,
    Welch optionally)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise ValueError("each sample needs at least two observations")
    va = float(np.var(a, ddof=1))
    vb = float(np.var(b, ddof=1))
    if va == 0.0 and vb == 0.0:
        return 1.0 if float(np.mean(a)) == float(np.mean(b)) else 0.0
    res = spstats.ttest_ind(a, b, equal_var=not welch)
    return float(res.pvalue)
