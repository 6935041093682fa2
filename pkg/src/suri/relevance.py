"""Unique relevant information (URI) of each feature.

The URI of feature i is ``I(all; Y) - I(all minus i; Y)``: the label
information carried by i and by no other feature.  The overlapped part
(ORI) is the rest of ``I(X_i; Y)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .mi import DEFAULT_K, JointMICache

DEFAULT_THRESHOLD = 1e-8


@dataclass(frozen=True, eq=False)
class URITable:
    uri: np.ndarray
    mi: np.ndarray
    feature_names: tuple[str, ...]
    full_mi: float
    k: int
    threshold: float = DEFAULT_THRESHOLD

    def __post_init__(self):
        uri = np.asarray(self.uri, dtype=np.float64)
        mi = np.asarray(self.mi, dtype=np.float64)
        if uri.shape != mi.shape or uri.ndim != 1:
            raise ValueError("uri and mi must be 1-D of equal length")
        if len(self.feature_names) != uri.size:
            raise ValueError("one feature name per entry required")
        for name, a in (("uri", uri), ("mi", mi)):
            if not np.all(np.isfinite(a)) or np.any(a < 0):
                raise ValueError(f"{name} entries must be finite and >= 0")
        object.__setattr__(self, "uri", uri)
        object.__setattr__(self, "mi", mi)

    def __len__(self):
        return self.uri.size

    def negligible(self) -> np.ndarray:
        return self.uri <= self.threshold

    def with_threshold(self, threshold: float) -> "URITable":
        return URITable(self.uri, self.mi, self.feature_names, self.full_mi, self.k, threshold)

    def to_records(self) -> list[dict]:
        neg = self.negligible()
        return [
            {"feature_name": name, "uri": float(u), "mi": float(m), "negligible": bool(b)}
            for name, u, m, b in zip(self.feature_names, self.uri, self.mi, neg)
        ]


def compute_uri_all(
    d: Dataset,
    k: int = DEFAULT_K,
    threshold: float = DEFAULT_THRESHOLD,
    cache: JointMICache | None = None,
) -> URITable:
    """Leave-one-out URI and single-feature MI for every feature.

    Uses n + 1 joint estimates for the URI column (the full set once, then
    each leave-one-out set) plus n single-feature estimates.  Pass a shared
    ``cache`` to reuse estimates with a selector run.
    """
    n = d.n_features
    if n < 2:
        raise ValueError("URI needs at least 2 features")
    jmi = cache if cache is not None else JointMICache(d, k)
    everything = range(n)
    full = jmi(everything)
    uri = np.array([max(0.0, full - jmi(j for j in everything if j != i)) for i in everything])
    mi = np.array([jmi([i]) for i in everything])
    return URITable(uri, mi, d.feature_names, full, jmi.k, threshold)


def uri_fraction(t: URITable) -> float:
    """Fraction of features whose URI exceeds the table threshold."""
    return float(np.count_nonzero(t.uri > t.threshold)) / len(t)


def ori(t: URITable, i: int) -> float:
    """Overlapped relevant information ``max(0, mi - uri)`` of feature i."""
    return max(0.0, float(t.mi[i] - t.uri[i]))
