"""Class-incremental learning: nearest-mean-of-exemplars classification,
herding exemplar selection and distillation-based representation learning."""

from .baselines import STRATEGIES, StrategySpec, run_strategy, strategy_for
from .benchmark import (
    ClassSchedule,
    Learner,
    RunReport,
    average_incremental_accuracy,
    confusion_matrix,
    evaluate_incremental,
    make_schedule,
    memory_sweep,
    summarize,
)
from .checkpoint import load_checkpoint, save_checkpoint
from .classifier import PrototypeSet, classify, classify_by_network, compute_prototypes, ncm_classify
from .core import RngStream, euclidean_distance, l2_normalize, renormalized_mean
from .data import Dataset, gen_synthetic, load_delimited, toy_ibench, write_delimited
from .exemplars import (
    ExemplarList,
    ExemplarMemory,
    construct_exemplar_set,
    per_class_budget,
    rebalance_memory,
    reduce_exemplar_set,
)
from .net import ModelParams, NetSpec, TrainConfig, extract_features, init_params, network_outputs
from .trainer import LearnerState, incremental_train, new_state, predict

__version__ = "0.1.0"
