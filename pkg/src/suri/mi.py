"""Nearest-neighbour mutual information estimators.

All values are in nats.  Continuous inputs are compared under the maximum
(Chebyshev) norm, and neighbour search is exact: ``scipy.spatial.cKDTree``
with ``p=inf``.  Estimates are clamped at zero.

References
----------
Kraskov, Stoegbauer, Grassberger (2004). Estimating mutual information.
Phys. Rev. E 69, 066138.

Ross (2014). Mutual information between discrete and continuous data sets.
PLoS ONE 9(2), e87357.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.spatial import cKDTree

from .data import Dataset

DEFAULT_K = 3

# Bernoulli-number coefficients B_2j / (2j) of the asymptotic series.
_ASYMPTOTIC = (
    1.0 / 12,
    -1.0 / 120,
    1.0 / 252,
    -1.0 / 240,
    1.0 / 132,
    -691.0 / 32760,
    1.0 / 12,
)


class EstimatorError(ValueError):
    """Raised when an estimator precondition is violated."""


@dataclass(frozen=True)
class MIEstimate:
    value: float
    k: int
    n_samples: int

    def __float__(self):
        return self.value


def digamma(x):
    """Digamma function for positive real arguments.

    Arguments below 6 are shifted upward with psi(x) = psi(x+1) - 1/x and
    the asymptotic expansion is summed there; absolute error is below 1e-12
    for x >= 1.  Accepts scalars or arrays.
    """
    x = np.asarray(x, dtype=np.float64)
    if np.any(~(x > 0)):
        raise ValueError("digamma is only defined here for x > 0")
    shift = np.zeros_like(x)
    x = x.copy()
    while True:
        small = x < 6.0
        if not small.any():
            break
        shift = shift - np.where(small, 1.0 / np.where(small, x, 1.0), 0.0)
        x = np.where(small, x + 1.0, x)
    inv2 = 1.0 / (x * x)
    series = 0.0
    for c in reversed(_ASYMPTOTIC):
        series = (series + c) * inv2
    out = np.log(x) - 0.5 / x - series + shift
    return float(out) if out.ndim == 0 else out


class NeighborIndex:
    """Exact nearest-neighbour queries under the Chebyshev metric."""

    def __init__(self, points, workers: int = 1):
        self.points = np.ascontiguousarray(_as_2d(points))
        self.workers = workers
        self._tree = cKDTree(self.points)

    def __len__(self):
        return self.points.shape[0]

    def kth_neighbor_distance(self, k: int) -> np.ndarray:
        """Distance from every indexed point to its k-th nearest other point."""
        dist, _ = self._tree.query(self.points, k=[k + 1], p=np.inf, workers=self.workers)
        return dist[:, 0]

    def query(self, point, k: int):
        """Return distances and indices of the k nearest indexed points."""
        return self._tree.query(np.atleast_2d(point), k=k, p=np.inf, workers=self.workers)

    def count_within(self, points, radius, strict: bool) -> np.ndarray:
        """Count indexed points within ``radius`` of each query point.

        The query point itself is counted when it is in the index.
        """
        r = np.asarray(radius, dtype=np.float64)
        if strict:
            r = np.nextafter(r, 0.0)
        return np.asarray(
            self._tree.query_ball_point(points, r, p=np.inf, return_length=True, workers=self.workers)
        )


def _as_2d(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise EstimatorError(f"expected a 1-D or 2-D array, got shape {a.shape}")
    return a


def ksg_mi_cc(x, z, k: int = DEFAULT_K, workers: int = 1) -> MIEstimate:
    """KSG estimator (algorithm 1) of I(X; Z) for two continuous variables.

    For each sample the radius ``eps`` is the Chebyshev distance to its k-th
    neighbour in the joint space; ``n_x`` and ``n_z`` count other samples
    strictly inside ``eps`` in each marginal space.
    """
    x = _as_2d(x)
    z = _as_2d(z)
    N = x.shape[0]
    if z.shape[0] != N:
        raise EstimatorError("x and z must have the same number of rows")
    if not 1 <= k < N:
        raise EstimatorError(f"need 1 <= k < N, got k={k}, N={N}")
    joint = NeighborIndex(np.hstack([x, z]), workers)
    eps = joint.kth_neighbor_distance(k)
    if np.any(eps == 0):
        raise EstimatorError("duplicate points in joint space; jitter the data first")
    nx = NeighborIndex(x, workers).count_within(x, eps, strict=True) - 1
    nz = NeighborIndex(z, workers).count_within(z, eps, strict=True) - 1
    value = digamma(k) + digamma(N) - np.mean(digamma(nx + 1) + digamma(nz + 1))
    return MIEstimate(max(0.0, float(value)), k, N)


def mi_with_discrete_target(x, y, k: int = DEFAULT_K, workers: int = 1) -> MIEstimate:
    """Estimate I(X; Y) for continuous X and a discrete label Y.

    For each sample, ``d`` is the distance to its k-th nearest neighbour of
    the same class, and ``m`` counts all other samples within ``d``
    (inclusive).  The estimate is
    ``psi(N) - <psi(N_y)> + psi(k) - <psi(m)>``.
    """
    x = _as_2d(x)
    y = np.asarray(y)
    N = x.shape[0]
    if y.shape != (N,):
        raise EstimatorError("y must have one label per row of x")
    if not 1 <= k < N:
        raise EstimatorError(f"need 1 <= k < N, got k={k}, N={N}")
    classes, inverse, counts = np.unique(y, return_inverse=True, return_counts=True)
    if np.any(counts <= k):
        c = classes[np.argmin(counts)].item()
        raise EstimatorError(f"class {c!r} has {counts.min()} members; need more than k={k}")
    radius = np.empty(N)
    for ci in range(classes.size):
        members = np.flatnonzero(inverse == ci)
        radius[members] = NeighborIndex(x[members], workers).kth_neighbor_distance(k)
    if np.any(radius == 0):
        raise EstimatorError("duplicate points within a class; jitter the data first")
    m = NeighborIndex(x, workers).count_within(x, radius, strict=False) - 1
    value = digamma(N) - np.mean(digamma(counts[inverse])) + digamma(k) - np.mean(digamma(m))
    return MIEstimate(max(0.0, float(value)), k, N)


def joint_mi(d: Dataset, subset: Iterable[int], k: int = DEFAULT_K, workers: int = 1) -> MIEstimate:
    """I(X_S; Y) for the columns in ``subset``, estimated jointly."""
    cols = sorted(set(int(i) for i in subset))
    if not cols:
        raise EstimatorError("subset must be nonempty")
    if cols[0] < 0 or cols[-1] >= d.n_features:
        raise EstimatorError(f"feature index out of range 0..{d.n_features - 1}: {cols}")
    return mi_with_discrete_target(d.features[:, cols], d.labels, k, workers)


def plugin_mi_discrete(x, y) -> float:
    """Exact plug-in MI of two discrete samples from empirical frequencies."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-D of equal length")
    _, xi = np.unique(x, return_inverse=True)
    _, yi = np.unique(y, return_inverse=True)
    joint = np.zeros((xi.max() + 1, yi.max() + 1))
    np.add.at(joint, (xi, yi), 1.0)
    return plugin_mi_table(joint)


def plugin_mi_table(joint) -> float:
    """MI of a (possibly unnormalised) joint probability table."""
    p = np.asarray(joint, dtype=np.float64)
    p = p / p.sum()
    px = p.sum(axis=1, keepdims=True)
    py = p.sum(axis=0, keepdims=True)
    nz = p > 0
    return float(np.sum(p[nz] * np.log(p[nz] / (px @ py)[nz])))


class JointMICache:
    """Memoised ``joint_mi`` over a fixed dataset and ``k``.

    ``calls`` counts actual estimator invocations (cache misses).
    """

    def __init__(self, d: Dataset, k: int = DEFAULT_K, workers: int = 1):
        self.data = d
        self.k = k
        self.workers = workers
        self.calls = 0
        self._memo: dict[frozenset, float] = {}

    def __call__(self, subset: Iterable[int]) -> float:
        key = frozenset(int(i) for i in subset)
        if key not in self._memo:
            self.calls += 1
            self._memo[key] = joint_mi(self.data, key, self.k, self.workers).value
        return self._memo[key]
