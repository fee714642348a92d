"""Herding-based exemplar selection and the fixed-size exemplar memory."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import renormalized_mean
from .errors import (
    BudgetExhaustedError,
    InsufficientSamplesError,
    InvalidReductionError,
)


@dataclass
class ExemplarList:
    """Prioritized exemplars of one class.

    ``items`` holds the raw input vectors (never features), ``indices`` their
    row positions in the class's training set.  Earlier entries matter more;
    every prefix is itself a valid exemplar list.
    """

    class_id: int
    items: np.ndarray
    indices: np.ndarray

    def __post_init__(self):
        self.items = np.asarray(self.items, dtype=np.float64)
        self.indices = np.asarray(self.indices, dtype=np.int64)
        if self.items.ndim != 2 or self.items.shape[0] != self.indices.shape[0]:
            raise ValueError("items must be 2-D with one index per row")

    def __len__(self):
        return self.items.shape[0]

    def prefix(self, m: int) -> "ExemplarList":
        return ExemplarList(self.class_id, self.items[:m].copy(), self.indices[:m].copy())

    def equals(self, other: "ExemplarList") -> bool:
        return (
            self.class_id == other.class_id
            and np.array_equal(self.indices, other.indices)
            and self.items.tobytes() == other.items.tobytes()
        )


@dataclass
class ExemplarMemory:
    budget: int
    per_class: dict = field(default_factory=dict)

    def total(self) -> int:
        return sum(len(p) for p in self.per_class.values())

    def counts(self) -> dict:
        return {y: len(p) for y, p in sorted(self.per_class.items())}

    def copy(self) -> "ExemplarMemory":
        return ExemplarMemory(self.budget, {y: p.prefix(len(p)) for y, p in self.per_class.items()})


def per_class_budget(K: int, t: int) -> int:
    """Exemplars per class, floor(K / t); at least one is required."""
    if K < 1 or t < 1:
        raise ValueError("K and t must be >= 1")
    m = K // t
    if m == 0:
        raise BudgetExhaustedError(f"budget K={K} cannot hold one exemplar for each of {t} classes")
    return m


def herding_order(features, m: int, replace: bool = False) -> np.ndarray:
    """Greedy herding on unit feature rows; returns ``m`` row indices.

    Step k picks the row whose addition brings the renormalized running mean
    closest to the renormalized class mean.  Ties go to the lowest index.
    With ``replace=True`` rows may be picked more than once.
    """
    F = np.asarray(features, dtype=np.float64)
    n = F.shape[0]
    mu = renormalized_mean(F)
    running = np.zeros(F.shape[1])
    available = np.ones(n, dtype=bool)
    chosen = np.empty(m, dtype=np.int64)
    for k in range(m):
        cand = running[None, :] + F
        norms = np.sqrt(np.sum(cand * cand, axis=1))
        with np.errstate(divide="ignore", invalid="ignore"):
            diff = mu[None, :] - cand / norms[:, None]
            dist = np.sqrt(np.sum(diff * diff, axis=1))
        dist[~(norms >= 1e-12)] = np.inf
        if not replace:
            dist[~available] = np.inf
        i = int(np.argmin(dist))
        chosen[k] = i
        available[i] = False
        running = running + F[i]
    return chosen


def construct_exemplar_set(X, m: int, extract: Callable, class_id: int = 0,
                           replace: bool = False) -> ExemplarList:
    X = np.asarray(X, dtype=np.float64)
    if m < 1:
        raise ValueError("m must be >= 1")
    if m > X.shape[0] and not replace:
        raise InsufficientSamplesError(f"cannot pick {m} exemplars from {X.shape[0]} samples")
    idx = herding_order(extract(X), m, replace=replace)
    return ExemplarList(class_id, X[idx].copy(), idx)


def reduce_exemplar_set(P: ExemplarList, m: int) -> ExemplarList:
    """Keep only the first ``m`` exemplars."""
    if m < 0 or m > len(P):
        raise InvalidReductionError(f"cannot reduce a list of {len(P)} to {m}")
    return P.prefix(m)


def rebalance_memory(mem: ExemplarMemory, t: int) -> ExemplarMemory:
    """Cut every stored list to floor(K / t) (lists already shorter are kept)."""
    m = per_class_budget(mem.budget, t)
    out = ExemplarMemory(mem.budget)
    for y, P in sorted(mem.per_class.items()):
        out.per_class[y] = reduce_exemplar_set(P, min(m, len(P)))
    return out


def approximation_error(features, order) -> float:
    """Distance between the class mean and the mean of ``features[order]``."""
    F = np.asarray(features, dtype=np.float64)
    return float(np.linalg.norm(renormalized_mean(F) - renormalized_mean(F[order])))
