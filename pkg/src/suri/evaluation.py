"""Cross-validated KNN evaluation of feature-selection orders.

For each prefix of a selection order we run stratified k-fold CV with a
Euclidean KNN classifier on standardized features and record the mean fold
accuracy.  The peak of that curve is reported together with macro F1 and
AUC-ROC computed from the pooled out-of-fold predictions at the peak size.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

from .data import Dataset, standardize
from .selectors import SelectionTrace

DEFAULT_FOLDS = 10
DEFAULT_K_NN = 5
DEFAULT_SEED = 0


@dataclass
class EvalReport:
    accuracy_curve: list[tuple[int, float]]
    peak_accuracy: float
    peak_size: int
    f1_at_peak: float
    auc_at_peak: float
    folds: int
    classifier: dict
    seed: int
    order: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["accuracy_curve"] = [[s, a] for s, a in self.accuracy_curve]
        return out


@dataclass
class CVResult:
    accuracy: float
    predictions: np.ndarray
    votes: np.ndarray


def stratified_folds(labels, folds: int = DEFAULT_FOLDS, seed: int = DEFAULT_SEED) -> np.ndarray:
    """Assign each sample a fold id in ``[0, folds)``, stratified by class.

    Members of each class are shuffled and dealt round-robin; the dealing
    position carries over between classes so fold sizes differ by at most
    one overall.
    """
    y = np.asarray(labels)
    if folds < 2:
        raise ValueError("need at least 2 folds")
    classes, counts = np.unique(y, return_counts=True)
    if counts.min() < folds:
        raise ValueError(f"class {classes[np.argmin(counts)].item()} has {counts.min()} members, fewer than {folds} folds")
    rng = np.random.default_rng(seed)
    assignment = np.empty(y.size, dtype=np.int64)
    start = 0
    for c in classes:
        members = rng.permutation(np.flatnonzero(y == c))
        assignment[members] = (start + np.arange(members.size)) % folds
        start = (start + members.size) % folds
    return assignment


def squared_distances(X) -> np.ndarray:
    """Pairwise squared Euclidean distances, summed column by column.

    The fixed left-to-right accumulation makes the result reproducible
    bit-for-bit for the same columns in the same order.
    """
    X = np.asarray(X, dtype=np.float64)
    D = np.zeros((X.shape[0], X.shape[0]))
    for j in range(X.shape[1]):
        D += column_sq_distances(X[:, j])
    return D


def column_sq_distances(col) -> np.ndarray:
    diff = col[:, None] - col[None, :]
    return diff * diff


def _vote(neighbor_labels: np.ndarray, n_classes: int) -> np.ndarray:
    counts = np.zeros((neighbor_labels.shape[0], n_classes))
    rows = np.repeat(np.arange(neighbor_labels.shape[0]), neighbor_labels.shape[1])
    np.add.at(counts, (rows, neighbor_labels.ravel()), 1.0)
    return counts / neighbor_labels.shape[1]


def knn_from_distances(D_test_train, train_labels, k_nn: int, n_classes: int):
    """Predict from a precomputed test-by-train distance block.

    Neighbours at equal distance are taken in training-row order; vote ties
    go to the smallest label.  Returns ``(predictions, vote_fractions)``.
    """
    if D_test_train.shape[1] == 0:
        raise ValueError("empty training set")
    if not 1 <= k_nn <= D_test_train.shape[1]:
        raise ValueError(f"k_nn must be in [1, {D_test_train.shape[1]}], got {k_nn}")
    nearest = np.argsort(D_test_train, axis=1, kind="stable")[:, :k_nn]
    votes = _vote(np.asarray(train_labels)[nearest], n_classes)
    return votes.argmax(axis=1), votes


def knn_predict(train: Dataset, test_points, k_nn: int = DEFAULT_K_NN, n_classes: int | None = None):
    """Euclidean KNN majority vote; returns predicted labels only."""
    if train.n_samples == 0:
        raise ValueError("empty training set")
    T = np.atleast_2d(np.asarray(test_points, dtype=np.float64))
    diff = T[:, None, :] - train.features[None, :, :]
    D = np.einsum("ijk,ijk->ij", diff, diff)
    pred, _ = knn_from_distances(D, train.labels, k_nn, n_classes or train.n_classes)
    return pred


def cross_validate(D, labels, fold_ids, k_nn: int, n_classes: int) -> CVResult:
    """KNN CV from a full pairwise distance matrix."""
    y = np.asarray(labels)
    preds = np.empty(y.size, dtype=np.int64)
    votes = np.empty((y.size, n_classes))
    n_folds = int(fold_ids.max()) + 1
    accs = np.empty(n_folds)
    for f in range(n_folds):
        test = fold_ids == f
        train = ~test
        p, v = knn_from_distances(D[np.ix_(test, train)], y[train], k_nn, n_classes)
        preds[test] = p
        votes[test] = v
        accs[f] = np.mean(p == y[test])
    return CVResult(float(accs.mean()), preds, votes)


def macro_f1(y_true, y_pred) -> float:
    """Unweighted mean of per-class F1 over labels seen in either array."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    scores = []
    for c in np.union1d(y_true, y_pred):
        tp = np.sum((y_pred == c) & (y_true == c))
        fp = np.sum((y_pred == c) & (y_true != c))
        fn = np.sum((y_pred != c) & (y_true == c))
        denom = 2 * tp + fp + fn
        scores.append(2 * tp / denom if denom else 0.0)
    return float(np.mean(scores))


def _binary_auc(score, positive) -> float:
    positive = np.asarray(positive, dtype=bool)
    n_pos = positive.sum()
    n_neg = positive.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs at least one positive and one negative")
    ranks = rankdata(score)
    return float((ranks[positive].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def auc_roc(scores, labels) -> float:
    """Rank-statistic AUC; one-vs-rest macro average for more than 2 classes.

    ``scores`` is either 1-D (score of class 1) or ``(N, C)`` per-class
    scores such as KNN vote fractions.
    """
    y = np.asarray(labels)
    s = np.asarray(scores, dtype=np.float64)
    present = np.unique(y)
    if present.size < 2:
        raise ValueError("AUC undefined for single-class labels")
    if s.ndim == 1:
        return _binary_auc(s, y == 1)
    if s.shape[1] == 2:
        return _binary_auc(s[:, 1], y == 1)
    return float(np.mean([_binary_auc(s[:, c], y == c) for c in present]))


def evaluate_curve(
    d: Dataset,
    trace: SelectionTrace | Sequence[int],
    folds: int = DEFAULT_FOLDS,
    k_nn: int = DEFAULT_K_NN,
    seed: int = DEFAULT_SEED,
) -> EvalReport:
    """Accuracy over every prefix of a selection order.

    The peak is the first (smallest) prefix size reaching the maximum.
    """
    order = list(trace.order if isinstance(trace, SelectionTrace) else trace)
    if not order or len(set(order)) != len(order) or min(order) < 0 or max(order) >= d.n_features:
        raise ValueError("selection order must be nonempty distinct valid feature indices")
    X = standardize(d).features
    y = d.labels
    C = d.n_classes
    fold_ids = stratified_folds(y, folds, seed)
    curve = []
    results = []
    for size in range(1, len(order) + 1):
        cols = sorted(order[:size])
        res = cross_validate(squared_distances(X[:, cols]), y, fold_ids, k_nn, C)
        curve.append((size, res.accuracy))
        results.append(res)
    accs = [a for _, a in curve]
    best = int(np.argmax(accs))
    res = results[best]
    return EvalReport(
        accuracy_curve=curve,
        peak_accuracy=accs[best],
        peak_size=best + 1,
        f1_at_peak=macro_f1(y, res.predictions),
        auc_at_peak=auc_roc(res.votes, y),
        folds=folds,
        classifier={"name": "knn", "k_nn": k_nn, "distance": "euclidean"},
        seed=seed,
        order=order,
    )
