"""Comparison strategies expressed as flag tuples over the shared trainer.

=============  ============  =====================  ====================  ======================
name           distillation  exemplars in training  classifier            frozen parts
=============  ============  =====================  ====================  ======================
icarl          yes           yes                    mean-of-exemplars     none
finetuning     no            no                     network-output        none
fixed-repr     no            no                     network-output        features, old heads
lwf-mc         yes           no                     network-output        none
hybrid1        yes           yes                    network-output        none
hybrid2        no            yes                    mean-of-exemplars     none
hybrid3        no            yes                    network-output        none
ncm            yes           yes                    ncm (all train data)  none
=============  ============  =====================  ====================  ======================
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import UnknownStrategyError

MEAN_OF_EXEMPLARS = "mean-of-exemplars"
NETWORK_OUTPUT = "network-output"
NCM = "ncm"


@dataclass(frozen=True)
class StrategySpec:
    name: str
    use_distillation: bool
    use_exemplars_in_training: bool
    classifier_kind: str
    freeze_features_after_first_batch: bool = False
    freeze_old_heads: bool = False

    @property
    def keeps_memory(self) -> bool:
        """Whether an exemplar memory is maintained at all."""
        return self.use_exemplars_in_training or self.classifier_kind == MEAN_OF_EXEMPLARS

    @property
    def retains_training_data(self) -> bool:
        """True for NCM, which is not class-incremental: it keeps every sample."""
        return self.classifier_kind == NCM


STRATEGIES = {
    "icarl": StrategySpec("icarl", True, True, MEAN_OF_EXEMPLARS),
    "finetuning": StrategySpec("finetuning", False, False, NETWORK_OUTPUT),
    "fixed-repr": StrategySpec("fixed-repr", False, False, NETWORK_OUTPUT, True, True),
    "lwf-mc": StrategySpec("lwf-mc", True, False, NETWORK_OUTPUT),
    "hybrid1": StrategySpec("hybrid1", True, True, NETWORK_OUTPUT),
    "hybrid2": StrategySpec("hybrid2", False, True, MEAN_OF_EXEMPLARS),
    "hybrid3": StrategySpec("hybrid3", False, True, NETWORK_OUTPUT),
    "ncm": StrategySpec("ncm", True, True, NCM),
}


def strategy_for(name: str) -> StrategySpec:
    try:
        return STRATEGIES[name]
    except KeyError:
        raise UnknownStrategyError(
            f"unknown strategy {name!r}; valid names: {', '.join(STRATEGIES)}"
        ) from None


def run_strategy(spec: StrategySpec, state, batch, cfg):
    """One incremental step of ``state`` on ``batch`` following ``spec``'s flags."""
    from .trainer import incremental_train

    return incremental_train(state, batch, cfg, spec)
