"""Exhaustive subset search for low-dimensional datasets.

Every nonempty feature subset is scored with the same stratified KNN
cross-validation used by :mod:`suri.evaluation`.  Subsets are visited depth
first in lexicographic order so the distance matrix of a subset is the
parent's matrix plus one column term; this keeps the 2^n - 1 evaluations
cheap for n up to the guard.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

from .data import Dataset, standardize
from .evaluation import (
    DEFAULT_FOLDS,
    DEFAULT_K_NN,
    DEFAULT_SEED,
    column_sq_distances,
    cross_validate,
    stratified_folds,
)
from .relevance import URITable

MAX_FEATURES = 20
DEFAULT_TOP = 20


class SearchTooLarge(ValueError):
    """Raised when the subset lattice exceeds the configured guard."""


@dataclass
class SubsetEntry:
    subset: tuple[int, ...]
    accuracy: float
    hit_rates: tuple[float, ...]


@dataclass
class SubsetRanking:
    entries: list[SubsetEntry]
    total_subsets: int
    classifier: dict
    seed: int
    folds: int
    feature_names: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "total_subsets": self.total_subsets,
            "classifier": self.classifier,
            "folds": self.folds,
            "seed": self.seed,
            "feature_names": list(self.feature_names),
            "entries": [
                {"rank": r, "subset": list(e.subset), "accuracy": e.accuracy, "hit_rates": list(e.hit_rates)}
                for r, e in enumerate(self.entries, start=1)
            ],
        }

    def write_csv(self, path) -> None:
        n_classes = len(self.entries[0].hit_rates) if self.entries else 0
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["rank", "subset", "accuracy", *[f"hr_{c}" for c in range(n_classes)]])
            for r, e in enumerate(self.entries, start=1):
                w.writerow([r, " ".join(map(str, e.subset)), repr(e.accuracy), *[repr(h) for h in e.hit_rates]])

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")


@dataclass
class FrequencyTable:
    frequency: np.ndarray
    uri: np.ndarray
    mi: np.ndarray
    top: int
    feature_names: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict:
        names = self.feature_names or tuple(str(i) for i in range(len(self.frequency)))
        return {
            "top": self.top,
            "features": [
                {"index": i, "feature_name": name, "frequency": int(f), "uri": float(u), "mi": float(m)}
                for i, (name, f, u, m) in enumerate(zip(names, self.frequency, self.uri, self.mi))
            ],
        }


def _recalls(y, pred, n_classes: int) -> tuple[float, ...]:
    return tuple(float(np.mean(pred[y == c] == c)) for c in range(n_classes))


def exhaustive_search(
    d: Dataset,
    folds: int = DEFAULT_FOLDS,
    k_nn: int = DEFAULT_K_NN,
    seed: int = DEFAULT_SEED,
    max_n: int = MAX_FEATURES,
) -> SubsetRanking:
    """Rank all 2^n - 1 nonempty subsets by mean CV accuracy.

    Ties in accuracy are ordered by the lexicographically smaller subset.
    Hit rates are per-class recall of the pooled out-of-fold predictions.
    """
    n = d.n_features
    if n > max_n:
        raise SearchTooLarge(
            f"{n} features means {2**n - 1} subsets, above the guard of {max_n} features; "
            "use a greedy selector instead"
        )
    X = standardize(d).features
    y = d.labels
    C = d.n_classes
    fold_ids = stratified_folds(y, folds, seed)
    columns = [column_sq_distances(X[:, j]) for j in range(n)]
    entries: list[SubsetEntry] = []

    # Depth-first over subsets in increasing-index order; each child adds one
    # column with a larger index than any already present.
    stack = [((), np.zeros((d.n_samples, d.n_samples)), 0)]
    while stack:
        subset, D, nxt = stack.pop()
        for j in range(n - 1, nxt - 1, -1):
            stack.append((subset + (j,), D + columns[j], j + 1))
        if subset:
            res = cross_validate(D, y, fold_ids, k_nn, C)
            entries.append(SubsetEntry(subset, res.accuracy, _recalls(y, res.predictions, C)))

    entries.sort(key=lambda e: (-e.accuracy, e.subset))
    return SubsetRanking(
        entries=entries,
        total_subsets=2**n - 1,
        classifier={"name": "knn", "k_nn": k_nn, "distance": "euclidean"},
        seed=seed,
        folds=folds,
        feature_names=d.feature_names,
    )


def top_frequency(r: SubsetRanking, t: URITable, top: int = DEFAULT_TOP) -> FrequencyTable:
    """Count how often each feature appears among the ``top`` best subsets."""
    if top > len(r.entries):
        raise ValueError(f"ranking has {len(r.entries)} entries, fewer than top={top}")
    freq = np.zeros(len(t), dtype=np.int64)
    for e in r.entries[:top]:
        freq[list(e.subset)] += 1
    return FrequencyTable(freq, t.uri.copy(), t.mi.copy(), top, t.feature_names)


def spearman(a, b) -> float:
    """Spearman rank correlation with average ranks for ties."""
    ra = rankdata(np.asarray(a, dtype=np.float64))
    rb = rankdata(np.asarray(b, dtype=np.float64))
    if ra.size != rb.size or ra.size < 3:
        raise ValueError("need two equal-length columns with at least 3 entries")
    ra -= ra.mean()
    rb -= rb.mean()
    denom = np.sqrt(np.sum(ra * ra) * np.sum(rb * rb))
    if denom == 0:
        raise ValueError("rank correlation undefined for a constant column")
    return float(np.clip(np.sum(ra * rb) / denom, -1.0, 1.0))


def uri_frequency_correlation(f: FrequencyTable) -> float:
    return spearman(f.uri, f.frequency)
