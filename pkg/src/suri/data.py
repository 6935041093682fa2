"""Dataset container, CSV ingestion and preprocessing.

Features are held as an ``(N, n)`` float array and labels as integer codes in
``[0, C)``.  Everything here returns new objects; a :class:`Dataset` is never
mutated after construction.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

log = logging.getLogger(__name__)

MISSING_TOKENS = frozenset({"", "?", "na", "n/a", "nan", "null", "none"})

EEG_STATS = ("mean", "max", "min", "std", "max_change", "min_change")


class DataError(ValueError):
    """Raised for malformed or unusable input data."""


@dataclass(frozen=True)
class PreprocessConfig:
    standardize: bool = True
    jitter_amplitude: float = 1e-10
    rng_seed: int = 0

    def __post_init__(self):
        if not self.jitter_amplitude >= 0:
            raise ValueError(f"jitter_amplitude must be >= 0, got {self.jitter_amplitude}")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be a nonnegative integer")


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable feature matrix with integer class labels.

    Parameters
    ----------
    features : array_like, shape (N, n)
        Finite real values.
    labels : array_like, shape (N,)
        Integer class codes in ``[0, C)`` with at least two distinct classes.
    feature_names : sequence of str
        ``n`` unique names.
    label_map : dict
        Original label value (as string) for each code, when known.
    categorical_maps : dict
        For each integer-coded categorical column, the mapping
        ``{original string: code}``.
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...]
    label_map: dict = field(default_factory=dict)
    categorical_maps: dict = field(default_factory=dict)

    def __post_init__(self):
        X = np.array(self.features, dtype=np.float64)
        y = np.asarray(self.labels)
        if X.ndim != 2:
            raise DataError(f"features must be 2-D, got shape {X.shape}")
        N, n = X.shape
        if n < 1 or N < 2:
            raise DataError(f"need N >= 2 samples and n >= 1 features, got {N}x{n}")
        if not np.all(np.isfinite(X)):
            r, c = np.argwhere(~np.isfinite(X))[0]
            raise DataError(f"non-finite value at row {r}, column {c}")
        if y.shape != (N,):
            raise DataError(f"labels must have shape ({N},), got {y.shape}")
        if not np.issubdtype(y.dtype, np.integer):
            if not np.all(np.equal(np.mod(y, 1), 0)):
                raise DataError("labels must be integers")
        y = y.astype(np.int64)
        if y.min() < 0:
            raise DataError("labels must be nonnegative")
        if np.unique(y).size < 2:
            raise DataError("labels contain a single class")
        names = tuple(str(s) for s in self.feature_names)
        if len(names) != n:
            raise DataError(f"{len(names)} feature names for {n} columns")
        if len(set(names)) != n:
            raise DataError("feature names are not unique")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "feature_names", names)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return int(self.labels.max()) + 1

    def subset(self, columns: Sequence[int]) -> "Dataset":
        cols = list(columns)
        return replace(
            self,
            features=self.features[:, cols],
            feature_names=tuple(self.feature_names[c] for c in cols),
        )

    def with_labels(self, labels, label_map=None) -> "Dataset":
        return replace(self, labels=labels, label_map=label_map or {})


def _parse_float(text: str) -> float | None:
    try:
        return float(text)
    except ValueError:
        return None


def _is_missing(text: str) -> bool:
    return text.strip().lower() in MISSING_TOKENS


def load_csv(
    path,
    label_column: str | int,
    has_header: bool = True,
    drop_missing: bool = False,
) -> Dataset:
    """Read a comma-separated file into a :class:`Dataset`.

    Columns whose cells are all numeric become real features.  Columns with
    no numeric cells are integer-coded in first-appearance order.  A column
    mixing numbers and non-numeric text is an error, as is any missing or
    non-finite cell unless ``drop_missing`` is set, in which case the whole
    row is rejected.

    Numeric labels are coded by sorted value; string labels by first
    appearance.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if has_header:
        if not rows:
            raise DataError(f"{path}: empty file")
        header, rows = [h.strip() for h in rows[0]], rows[1:]
    else:
        header = [f"x{j}" for j in range(len(rows[0]))] if rows else []
    if not rows:
        raise DataError(f"{path}: no data rows")
    width = len(header)
    for i, r in enumerate(rows):
        if len(r) != width:
            raise DataError(f"{path}: row {i + 1} has {len(r)} cells, expected {width}")

    if isinstance(label_column, int) or (isinstance(label_column, str) and label_column.lstrip("-").isdigit() and label_column not in header):
        li = int(label_column)
        if li < 0:
            li += width
        if not 0 <= li < width:
            raise DataError(f"label column index {label_column} out of range")
    else:
        if label_column not in header:
            raise DataError(f"label column {label_column!r} not in header {header}")
        li = header.index(label_column)

    cells = [[c.strip() for c in r] for r in rows]
    keep = []
    for i, r in enumerate(cells):
        bad = [j for j, c in enumerate(r) if _is_missing(c) or (_parse_float(c) is not None and not math.isfinite(_parse_float(c)))]
        if bad:
            if drop_missing:
                continue
            j = bad[0]
            raise DataError(
                f"{path}: missing or non-finite value {r[j]!r} at row {i + 1}, column {header[j]!r}"
            )
        keep.append(r)
    if len(keep) < len(cells):
        log.warning("dropped %d rows with missing values", len(cells) - len(keep))
    if not keep:
        raise DataError(f"{path}: no complete rows")

    columns = []
    names = []
    cat_maps = {}
    for j in range(width):
        if j == li:
            continue
        col = [r[j] for r in keep]
        parsed = [_parse_float(c) for c in col]
        if all(p is not None for p in parsed):
            columns.append(np.array(parsed, dtype=np.float64))
        elif all(p is None for p in parsed):
            mapping: dict[str, int] = {}
            for c in col:
                mapping.setdefault(c, len(mapping))
            columns.append(np.array([mapping[c] for c in col], dtype=np.float64))
            cat_maps[header[j]] = mapping
        else:
            i = next(i for i, p in enumerate(parsed) if p is None)
            raise DataError(f"{path}: unparseable value {col[i]!r} at row {i + 1}, column {header[j]!r}")
        names.append(header[j])

    raw = [r[li] for r in keep]
    labels, label_map = _code_labels(raw)
    if len(label_map) < 2:
        raise DataError(f"{path}: label column {header[li]!r} has a single class")
    X = np.column_stack(columns) if columns else np.empty((len(keep), 0))
    return Dataset(X, labels, tuple(names), label_map=label_map, categorical_maps=cat_maps)


def _code_labels(raw: list[str]) -> tuple[np.ndarray, dict]:
    parsed = [_parse_float(v) for v in raw]
    if all(p is not None for p in parsed):
        values = sorted(set(parsed))
        index = {v: i for i, v in enumerate(values)}
        codes = np.array([index[p] for p in parsed], dtype=np.int64)
        label_map = {i: _fmt_number(v) for v, i in index.items()}
    else:
        mapping: dict[str, int] = {}
        for v in raw:
            mapping.setdefault(v, len(mapping))
        codes = np.array([mapping[v] for v in raw], dtype=np.int64)
        label_map = {i: v for v, i in mapping.items()}
    return codes, label_map


def _fmt_number(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(v)


def raw_label_values(d: Dataset) -> np.ndarray:
    """Decode label codes back to their original numeric values."""
    if not d.label_map:
        return d.labels.copy()
    lookup = np.array([float(d.label_map[i]) for i in range(len(d.label_map))])
    return lookup[d.labels]


def binarize_heart_labels(raw_labels) -> np.ndarray:
    """Collapse heart-disease severity 0..4 into absent (0) / present (1)."""
    raw = np.asarray(raw_labels)
    as_float = raw.astype(np.float64)
    if not np.all(np.isin(as_float, [0, 1, 2, 3, 4])):
        bad = as_float[~np.isin(as_float, [0, 1, 2, 3, 4])][0]
        raise DataError(f"heart label out of range 0..4: {bad}")
    return (as_float > 0).astype(np.int64)


def eeg_channel_stats(signal) -> np.ndarray:
    """Six summary statistics per channel of a ``(channels, T)`` recording.

    Order per channel: mean, max, min, population std, max and min of the
    signed successive differences ``s[t+1] - s[t]``.
    """
    s = np.atleast_2d(np.asarray(signal, dtype=np.float64))
    if s.ndim != 2:
        raise DataError(f"signal must be channels x time, got shape {s.shape}")
    if s.shape[1] < 2:
        raise DataError("need at least 2 time samples per channel")
    diff = np.diff(s, axis=1)
    stats = np.stack(
        [s.mean(axis=1), s.max(axis=1), s.min(axis=1), s.std(axis=1), diff.max(axis=1), diff.min(axis=1)],
        axis=1,
    )
    return stats.reshape(-1)


def eeg_feature_names(n_channels: int) -> list[str]:
    return [f"ch{c}_{stat}" for c in range(n_channels) for stat in EEG_STATS]


def standardize(d: Dataset) -> Dataset:
    """Center each feature and scale to unit sample std (ddof=1).

    Constant columns become all zeros and are reported with a warning.
    """
    X = d.features
    mean = X.mean(axis=0)
    centered = X - mean
    std = centered.std(axis=0, ddof=1)
    constant = std <= 1e-12 * np.maximum(1.0, np.abs(mean))
    if constant.any():
        log.warning("constant features mapped to zero: %s", [d.feature_names[j] for j in np.flatnonzero(constant)])
    scale = np.where(constant, 1.0, std)
    Z = np.where(constant, 0.0, centered / scale)
    return replace(d, features=Z)


def jitter(d: Dataset, cfg: PreprocessConfig) -> Dataset:
    """Add uniform noise in ``[-a*std_j, a*std_j]`` to break distance ties."""
    if cfg.jitter_amplitude == 0:
        return d
    rng = np.random.default_rng(cfg.rng_seed)
    X = d.features
    std = X.std(axis=0, ddof=1)
    std = np.where(std > 0, std, 1.0)
    noise = rng.uniform(-1.0, 1.0, size=X.shape) * (cfg.jitter_amplitude * std)
    return replace(d, features=X + noise)


def preprocess(d: Dataset, cfg: PreprocessConfig) -> Dataset:
    if cfg.standardize:
        d = standardize(d)
    return jitter(d, cfg)


def load_eeg_recordings(paths: Sequence, labels: Sequence[int]) -> Dataset:
    """Build a dataset from per-recording CSVs (rows = channels, cols = time)."""
    rows = []
    n_channels = None
    for p in paths:
        sig = np.loadtxt(p, delimiter=",", ndmin=2)
        if n_channels is None:
            n_channels = sig.shape[0]
        elif sig.shape[0] != n_channels:
            raise DataError(f"{p}: {sig.shape[0]} channels, expected {n_channels}")
        rows.append(eeg_channel_stats(sig))
    if not rows:
        raise DataError("no EEG recordings given")
    return Dataset(np.vstack(rows), np.asarray(labels), eeg_feature_names(n_channels))


def write_csv(d: Dataset, path, label_name: str = "label") -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*d.feature_names, label_name])
        for row, lab in zip(d.features, d.labels):
            w.writerow([repr(float(v)) for v in row] + [int(lab)])
