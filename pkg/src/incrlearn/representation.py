"""Representation update: combined training set, distillation targets, loss.

Class ids are 0-based here: old classes are ``0 .. s-1`` and the classes of
the current batch are ``s .. t-1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .core import RngStream
from .errors import ScheduleError
from .exemplars import ExemplarMemory
from .net import (
    ModelParams,
    TrainConfig,
    add_class_heads,
    binary_cross_entropy,
    loss_and_gradient,
    network_outputs,
    sgd_train,
)


@dataclass
class CombinedTrainingSet:
    X: np.ndarray
    labels: np.ndarray
    from_exemplar: np.ndarray

    def __len__(self):
        return self.labels.size


@dataclass(frozen=True)
class DistillationTargets:
    """Outputs of the old heads recorded before the update, shape (n, s)."""

    q: np.ndarray

    @property
    def num_old(self) -> int:
        return self.q.shape[1]


@dataclass(frozen=True)
class LossSpec:
    """Which heads get classification targets and which get distillation targets.

    With ``distill=False`` the old heads are trained on 0/1 indicators as well,
    i.e. the ordinary multi-class loss over all ``t`` heads.
    """

    s: int
    t: int
    targets: DistillationTargets | None = None
    distill: bool = True

    def __post_init__(self):
        if not 0 <= self.s < self.t:
            raise ValueError(f"need 0 <= s < t, got s={self.s}, t={self.t}")
        if self.distill and self.s > 0:
            if self.targets is None or self.targets.num_old != self.s:
                raise ValueError("distillation needs recorded targets for every old class")

    def target_matrix(self, labels) -> np.ndarray:
        labels = np.asarray(labels, dtype=np.int64)
        T = np.zeros((labels.size, self.t))
        T[np.arange(labels.size), labels] = 1.0
        if self.distill and self.s > 0:
            T[:, :self.s] = self.targets.q
        return T


def build_combined_set(new_data: Mapping[int, np.ndarray], mem: ExemplarMemory | None) -> CombinedTrainingSet:
    """New-class samples followed by all stored exemplars, with labels."""
    new_ids = sorted(new_data)
    old_ids = sorted(mem.per_class) if mem is not None else []
    if not new_ids:
        raise ScheduleError("no new classes")
    if set(new_ids) & set(old_ids):
        raise ScheduleError(f"classes {sorted(set(new_ids) & set(old_ids))} already have exemplars")
    if new_ids != list(range(new_ids[0], new_ids[0] + len(new_ids))):
        raise ScheduleError("new class ids must be contiguous")
    if old_ids and max(old_ids) >= new_ids[0]:
        raise ScheduleError("new class ids must follow the observed ones")
    xs, ys, flags = [], [], []
    for y in new_ids:
        X = np.asarray(new_data[y], dtype=np.float64)
        xs.append(X)
        ys.append(np.full(X.shape[0], y))
        flags.append(np.zeros(X.shape[0], dtype=bool))
    for y in old_ids:
        P = mem.per_class[y]
        xs.append(P.items)
        ys.append(np.full(len(P), y))
        flags.append(np.ones(len(P), dtype=bool))
    return CombinedTrainingSet(np.vstack(xs), np.concatenate(ys).astype(np.int64), np.concatenate(flags))


def record_targets(params_pre: ModelParams, D: CombinedTrainingSet, s: int) -> DistillationTargets:
    """Old-head outputs on every entry of D, under the pre-update parameters."""
    if s == 0:
        q = np.zeros((len(D), 0))
    else:
        q = np.array(network_outputs(params_pre, D.X)[:, :s], copy=True)
    q.setflags(write=False)
    return DistillationTargets(q)


def icarl_loss(params: ModelParams, D: CombinedTrainingSet, targets: DistillationTargets,
               s: int, t: int) -> float:
    """Classification terms on heads s..t-1 plus distillation terms on 0..s-1."""
    T = LossSpec(s, t, targets).target_matrix(D.labels)
    return binary_cross_entropy(network_outputs(params, D.X), T)


def icarl_loss_and_gradient(params, D, targets, s, t):
    return loss_and_gradient(params, D.X, LossSpec(s, t, targets).target_matrix(D.labels))


def update_representation(params: ModelParams, new_data: Mapping[int, np.ndarray],
                          mem: ExemplarMemory | None, cfg: TrainConfig, rng: RngStream, *,
                          distill: bool = True, freeze_features: bool = False,
                          freeze_old_heads: bool = False, history: list | None = None) -> ModelParams:
    """Grow heads for the new classes, then train on new data plus exemplars.

    Pass ``mem=None`` to train on the new data alone.
    """
    s = params.t
    D = build_combined_set(new_data, mem)
    q = record_targets(params, D, s)
    grown = add_class_heads(params, len(new_data), rng)
    spec = LossSpec(s, grown.t, q, distill=distill)
    return sgd_train(grown, D.X, spec.target_matrix(D.labels), cfg,
                     freeze_features=freeze_features,
                     frozen_heads=s if freeze_old_heads else 0,
                     history=history)
