"""Greedy forward feature selection with MI-based scoring rules.

Every method shares one loop: at each step score all unselected features,
append the argmax (lowest index on ties), repeat ``m`` times.  The scoring
rules differ only in how they use joint MI estimates:

* ``mim``  - I(X; Y), ignores the selected set
* ``jmi``  - sum over selected s of I(X, s; Y)
* ``jmim`` - min over selected s of I(X, s; Y)
* ``gsa``  - I(S + X; Y), the full joint MI
* ``suri`` - (1 - beta) I(S + X; Y) + beta URI(X)

JMI and JMIM fall back to I(X; Y) while nothing is selected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from .data import Dataset
from .mi import DEFAULT_K, JointMICache
from .relevance import URITable, compute_uri_all

METHODS = ("mim", "jmi", "jmim", "gsa", "suri")
DEFAULT_BETA = 0.2
BENCHMARK_BETAS = (0.1, 0.2, 0.3)


@dataclass
class SelectionTrace:
    method: str
    order: list[int]
    step_scores: list[float]
    k: int
    beta: float | None = None
    feature_names: tuple[str, ...] = field(default=(), repr=False)

    def __post_init__(self):
        if len(set(self.order)) != len(self.order):
            raise ValueError("selection order contains duplicates")
        if len(self.order) != len(self.step_scores):
            raise ValueError("order and step_scores lengths differ")

    def to_dict(self) -> dict:
        names = [self.feature_names[i] for i in self.order] if self.feature_names else list(self.order)
        return {
            "method": self.method,
            "beta": self.beta,
            "k": self.k,
            "order": names,
            "indices": list(self.order),
            "step_scores": list(self.step_scores),
        }

    @classmethod
    def from_dict(cls, obj: dict, feature_names: Sequence[str] = ()) -> "SelectionTrace":
        if "indices" in obj:
            order = [int(i) for i in obj["indices"]]
        else:
            lookup = {name: i for i, name in enumerate(feature_names)}
            try:
                order = [lookup[name] for name in obj["order"]]
            except KeyError as exc:
                raise ValueError(f"trace names unknown feature {exc}") from None
        return cls(
            method=obj["method"],
            order=order,
            step_scores=[float(s) for s in obj["step_scores"]],
            k=int(obj["k"]),
            beta=obj.get("beta"),
            feature_names=tuple(feature_names),
        )


class Scorer(Protocol):
    method: str
    beta: float | None

    def __call__(self, candidate: int, selected: Sequence[int]) -> float: ...


def score_mim(table: URITable, candidate: int, selected: Sequence[int] = ()) -> float:
    return float(table.mi[candidate])


def score_jmi(jmi: JointMICache, table: URITable, candidate: int, selected: Sequence[int]) -> float:
    if not selected:
        return float(table.mi[candidate])
    return float(sum(jmi((candidate, s)) for s in selected))


def score_jmim(jmi: JointMICache, table: URITable, candidate: int, selected: Sequence[int]) -> float:
    if not selected:
        return float(table.mi[candidate])
    return float(min(jmi((candidate, s)) for s in selected))


def score_gsa(jmi: JointMICache, candidate: int, selected: Sequence[int]) -> float:
    return jmi((*selected, candidate))


def score_suri(
    jmi: JointMICache,
    candidate: int,
    selected: Sequence[int],
    beta: float,
    uri_table: URITable | None,
) -> float:
    if uri_table is None:
        raise ValueError("SURI needs a precomputed URI table")
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must lie in [0, 1], got {beta}")
    relevance = jmi((*selected, candidate)) if beta < 1.0 else 0.0
    return (1.0 - beta) * relevance + beta * float(uri_table.uri[candidate])


@dataclass
class MethodScorer:
    """Binds a scoring rule to a dataset's estimate cache and URI table."""

    method: str
    jmi: JointMICache
    table: URITable
    beta: float | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.method == "suri":
            if self.beta is None:
                self.beta = DEFAULT_BETA
            if not 0.0 <= self.beta <= 1.0:
                raise ValueError(f"beta must lie in [0, 1], got {self.beta}")
        else:
            self.beta = None

    def __call__(self, candidate: int, selected: Sequence[int]) -> float:
        if self.method == "mim":
            return score_mim(self.table, candidate)
        if self.method == "jmi":
            return score_jmi(self.jmi, self.table, candidate, selected)
        if self.method == "jmim":
            return score_jmim(self.jmi, self.table, candidate, selected)
        if self.method == "gsa":
            return score_gsa(self.jmi, candidate, selected)
        return score_suri(self.jmi, candidate, selected, self.beta, self.table)


def make_scorer(
    d: Dataset,
    method: str,
    k: int = DEFAULT_K,
    beta: float | None = None,
    cache: JointMICache | None = None,
    uri_table: URITable | None = None,
) -> MethodScorer:
    """Build a scorer, computing the URI/MI table once up front."""
    jmi = cache if cache is not None else JointMICache(d, k)
    if uri_table is None:
        uri_table = compute_uri_all(d, jmi.k, cache=jmi)
    return MethodScorer(method.lower(), jmi, uri_table, beta)


def greedy_select(n_features: int, scorer: Scorer, m: int, k: int = DEFAULT_K, feature_names=()) -> SelectionTrace:
    """Forward selection of ``m`` features maximising ``scorer`` at each step."""
    if not 1 <= m <= n_features:
        raise ValueError(f"m must be in [1, {n_features}], got {m}")
    selected: list[int] = []
    scores: list[float] = []
    remaining = list(range(n_features))
    for _ in range(m):
        vals = np.array([scorer(c, tuple(selected)) for c in remaining])
        best = int(np.argmax(vals))
        selected.append(remaining.pop(best))
        scores.append(float(vals[best]))
    k = getattr(getattr(scorer, "jmi", None), "k", k)
    return SelectionTrace(scorer.method, selected, scores, k, scorer.beta, tuple(feature_names))


def select(
    d: Dataset,
    method: str,
    m: int,
    k: int = DEFAULT_K,
    beta: float | None = None,
    cache: JointMICache | None = None,
    uri_table: URITable | None = None,
) -> SelectionTrace:
    scorer = make_scorer(d, method, k, beta, cache, uri_table)
    return greedy_select(d.n_features, scorer, m, feature_names=d.feature_names)
