"""Incremental training loop: update the representation, then manage exemplars."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .baselines import MEAN_OF_EXEMPLARS, NCM, NETWORK_OUTPUT, StrategySpec, strategy_for
from .classifier import classify, classify_by_network, compute_prototypes, ncm_classify
from .core import RngStream, derive_seed
from .errors import MissingDataError, NoClassesError, ScheduleError
from .exemplars import ExemplarMemory, construct_exemplar_set, per_class_budget, rebalance_memory
from .net import ModelParams, NetSpec, TrainConfig, extract_features, init_params
from .representation import update_representation


@dataclass
class LearnerState:
    """Everything a learner carries between incremental steps.

    ``registry[i]`` is the external dataset label of internal class ``i``.
    Past training batches are never stored here, only exemplars.
    """

    net_spec: NetSpec
    params: ModelParams
    memory: ExemplarMemory
    registry: list = field(default_factory=list)
    step_index: int = 0
    rng: RngStream = field(default_factory=lambda: RngStream(0))
    strategy: str = "icarl"

    @property
    def t(self) -> int:
        return self.params.t

    @property
    def spec(self) -> StrategySpec:
        return strategy_for(self.strategy)

    def extract(self, X):
        return extract_features(self.params, X)

    def label_to_id(self) -> dict:
        return {lab: i for i, lab in enumerate(self.registry)}


def new_state(net_spec: NetSpec, memory_k: int, seed: int, strategy: str = "icarl") -> LearnerState:
    strategy_for(strategy)
    rng = RngStream(seed)
    params = init_params(net_spec, rng.spawn(0))
    return LearnerState(net_spec, params, ExemplarMemory(memory_k), [], 0, RngStream(derive_seed(seed, 1)), strategy)


def incremental_train(state: LearnerState, batch: Mapping, cfg: TrainConfig,
                      spec: StrategySpec | None = None, history: list | None = None) -> LearnerState:
    """One step: representation update, exemplar reduction, exemplar construction.

    ``batch`` maps fresh external labels to their training samples; internal
    ids are assigned in the mapping's iteration order.
    """
    spec = spec or state.spec
    labels = list(batch)
    if not labels:
        raise ScheduleError("empty class batch")
    clash = [lab for lab in labels if lab in state.registry]
    if clash or len(set(labels)) != len(labels):
        raise ScheduleError(f"labels already observed or repeated: {clash or labels}")
    s = state.t
    t = s + len(labels)
    new_data = {s + i: np.asarray(batch[lab], dtype=np.float64) for i, lab in enumerate(labels)}
    K = state.memory.budget
    if spec.keeps_memory:
        m = per_class_budget(K, t)

    step_cfg = dataclasses.replace(cfg, shuffle_seed=derive_seed(cfg.shuffle_seed, state.step_index))
    rng = RngStream(state.rng.seed, state.rng.counter)
    params = update_representation(
        state.params, new_data,
        state.memory if spec.use_exemplars_in_training else None,
        step_cfg, rng,
        distill=spec.use_distillation,
        freeze_features=spec.freeze_features_after_first_batch and s > 0,
        freeze_old_heads=spec.freeze_old_heads,
        history=history,
    )

    if spec.keeps_memory:
        memory = rebalance_memory(state.memory, t)
        extract = lambda X: extract_features(params, X)
        for y, X in new_data.items():
            memory.per_class[y] = construct_exemplar_set(X, min(m, X.shape[0]), extract, class_id=y)
    else:
        memory = ExemplarMemory(K)
    return LearnerState(state.net_spec, params, memory, state.registry + labels,
                        state.step_index + 1, rng, spec.name)


def predict(state: LearnerState, x, kind: str | None = None, full_data: Mapping | None = None):
    """Internal class id(s) for ``x`` under the strategy's classifier.

    ``kind`` overrides the classifier; ``full_data`` (internal id -> samples)
    is needed for the NCM rule.
    """
    if state.t == 0:
        raise NoClassesError("no classes observed yet")
    kind = kind or state.spec.classifier_kind
    extract = state.extract
    if kind == MEAN_OF_EXEMPLARS:
        return classify(x, compute_prototypes(state.memory, extract), extract)
    if kind == NETWORK_OUTPUT:
        return classify_by_network(x, state.params)
    if kind == NCM:
        if full_data is None:
            raise MissingDataError("the NCM rule needs the full training data")
        return ncm_classify(x, full_data, extract)
    raise ValueError(f"unknown classifier kind {kind!r}")
