"""Prediction rules: nearest-mean-of-exemplars, nearest-class-mean, network argmax."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .core import renormalized_mean
from .errors import EmptyInputError, MissingDataError, MissingExemplarsError
from .net import ModelParams, network_outputs


@dataclass
class PrototypeSet:
    class_ids: np.ndarray
    prototypes: np.ndarray

    def __post_init__(self):
        ids = np.asarray(self.class_ids, dtype=np.int64)
        protos = np.asarray(self.prototypes, dtype=np.float64)
        order = np.argsort(ids, kind="stable")
        self.class_ids = ids[order]
        self.prototypes = protos[order]
        if np.any(np.diff(self.class_ids) <= 0):
            raise ValueError("class ids must be unique")

    def __len__(self):
        return self.class_ids.size


def prototypes_from_sets(sets: Mapping[int, np.ndarray], extract: Callable) -> PrototypeSet:
    ids, protos = [], []
    for y in sorted(sets):
        ids.append(y)
        protos.append(renormalized_mean(extract(sets[y])))
    return PrototypeSet(np.array(ids), np.array(protos))


def compute_prototypes(mem, extract: Callable) -> PrototypeSet:
    """Mean-of-exemplars prototypes under the *current* feature map."""
    if not mem.per_class:
        raise MissingExemplarsError("exemplar memory is empty")
    for y, P in mem.per_class.items():
        if len(P) == 0:
            raise MissingExemplarsError(f"class {y} has no exemplars")
    return prototypes_from_sets({y: P.items for y, P in mem.per_class.items()}, extract)


def nearest_prototype(features, protos: PrototypeSet) -> np.ndarray:
    """Label of the closest prototype for each feature row (lowest id on ties)."""
    F = np.atleast_2d(np.asarray(features, dtype=np.float64))
    diff = F[:, None, :] - protos.prototypes[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=2))
    return protos.class_ids[np.argmin(dist, axis=1)]


def classify(x, protos: PrototypeSet, extract: Callable):
    """Nearest-prototype label for one sample (int) or a batch (array)."""
    if len(protos) == 0:
        raise EmptyInputError("no prototypes")
    x = np.asarray(x, dtype=np.float64)
    labels = nearest_prototype(extract(np.atleast_2d(x)), protos)
    return int(labels[0]) if x.ndim == 1 else labels


def classify_by_dot(x, protos: PrototypeSet, extract: Callable):
    """argmax_y mu_y . phi(x); equivalent to :func:`classify` for unit vectors."""
    x = np.asarray(x, dtype=np.float64)
    scores = extract(np.atleast_2d(x)) @ protos.prototypes.T
    labels = protos.class_ids[np.argmax(scores, axis=1)]
    return int(labels[0]) if x.ndim == 1 else labels


def classify_by_network(x, params: ModelParams):
    """argmax of the sigmoid outputs, lowest index on ties."""
    x = np.asarray(x, dtype=np.float64)
    g = np.atleast_2d(network_outputs(params, x))
    labels = np.argmax(g, axis=1)
    return int(labels[0]) if x.ndim == 1 else labels


def ncm_classify(x, full_data: Mapping[int, np.ndarray], extract: Callable):
    """Nearest-class-mean over all retained training samples of each class."""
    if not full_data:
        raise MissingDataError("no class data")
    for y, X in full_data.items():
        if np.asarray(X).shape[0] == 0:
            raise MissingDataError(f"class {y} has no training samples")
    return classify(x, prototypes_from_sets(full_data, extract), extract)


def top_k_accuracy(scores, labels, k: int = 5) -> float:
    """Fraction of rows whose true label is among the ``k`` highest scores."""
    scores = np.asarray(scores)
    labels = np.asarray(labels)
    k = min(k, scores.shape[1])
    top = np.argsort(-scores, axis=1, kind="stable")[:, :k]
    return float(np.mean(np.any(top == labels[:, None], axis=1)))
