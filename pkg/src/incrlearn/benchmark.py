"""Class-incremental evaluation protocol.

Classes are put in a seeded random order and fed in consecutive batches.
After every batch the learner is tested on the test samples of all classes
seen so far.  Test data is only ever passed to ``predict``.
"""

from __future__ import annotations

import csv
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .baselines import NCM, StrategySpec, strategy_for
from .core import RngStream, derive_seed
from .data import Dataset
from .errors import BudgetExhaustedError, EmptyInputError, ScheduleError
from .net import NetSpec, TrainConfig
from .trainer import LearnerState, incremental_train, new_state, predict

log = logging.getLogger(__name__)

# published full-scale figures for 100 classes in batches of 10; not reproduced by the toy task
REFERENCE_AVG_INCREMENTAL_ACCURACY = {"icarl": 0.641, "lwf-mc": 0.444}


@dataclass(frozen=True)
class ClassSchedule:
    order: tuple
    batch_size: int
    seed: int

    @property
    def batches(self) -> list:
        o = list(self.order)
        return [o[i:i + self.batch_size] for i in range(0, len(o), self.batch_size)]


def make_schedule(num_classes: int, batch_size: int, seed: int, classes: Sequence | None = None) -> ClassSchedule:
    """Seeded class order cut into consecutive batches (the last may be short)."""
    if num_classes < 1 or not 1 <= batch_size <= num_classes:
        raise ScheduleError(f"invalid schedule: {num_classes} classes in batches of {batch_size}")
    classes = list(range(num_classes)) if classes is None else list(classes)
    if len(classes) != num_classes:
        raise ScheduleError("class list does not match num_classes")
    perm = RngStream(derive_seed(seed, 0x5CED)).permutation(num_classes)
    return ClassSchedule(tuple(classes[i] for i in perm), batch_size, seed)


def average_incremental_accuracy(curve) -> float:
    curve = list(curve)
    if not curve:
        raise EmptyInputError("empty accuracy curve")
    return float(np.mean(curve))


def confusion_from_predictions(true_ids, pred_ids, t: int) -> np.ndarray:
    cm = np.zeros((t, t), dtype=np.int64)
    np.add.at(cm, (np.asarray(true_ids), np.asarray(pred_ids)), 1)
    return cm


def batch_prediction_mass(confusion, batch_size: int) -> np.ndarray:
    """Fraction of all predictions falling into each class batch's columns."""
    cols = np.asarray(confusion).sum(axis=0).astype(np.float64)
    edges = range(0, cols.size, batch_size)
    mass = np.array([cols[i:i + batch_size].sum() for i in edges])
    return mass / cols.sum()


class Learner:
    """A strategy bound to a learner state; the unit the protocol drives.

    Test stubs may replace it with any object offering ``learn(batch)`` and
    ``predict(X) -> dataset labels``.
    """

    def __init__(self, spec: StrategySpec, net_spec: NetSpec, cfg: TrainConfig,
                 memory_k: int, seed: int):
        self.spec = spec
        self.cfg = cfg
        self.state = new_state(net_spec, memory_k, seed, spec.name)
        # only the NCM oracle keeps every training sample
        self.full_data: dict = {}

    def learn(self, batch: dict) -> None:
        self.state = incremental_train(self.state, batch, self.cfg, self.spec)
        if self.spec.retains_training_data:
            ids = self.state.label_to_id()
            self.full_data.update({ids[lab]: X for lab, X in batch.items()})

    def predict_ids(self, X, kind: str | None = None) -> np.ndarray:
        kind = kind or self.spec.classifier_kind
        full = self.full_data if kind == NCM else None
        return np.atleast_1d(predict(self.state, X, kind=kind, full_data=full))

    def predict(self, X, kind: str | None = None) -> np.ndarray:
        reg = np.asarray(self.state.registry)
        return reg[self.predict_ids(X, kind)]


@dataclass
class RunReport:
    strategy: str
    seed: int
    order: tuple
    batch_size: int
    accuracies: list = field(default_factory=list)
    classes_seen: list = field(default_factory=list)
    wall_ms: list = field(default_factory=list)
    confusion: np.ndarray | None = None
    config: dict = field(default_factory=dict)
    error: str | None = None
    final_state: LearnerState | None = None

    @property
    def average_incremental_accuracy(self) -> float:
        return average_incremental_accuracy(self.accuracies)

    @property
    def final_accuracy(self) -> float:
        return self.accuracies[-1]

    @property
    def ok(self) -> bool:
        return self.error is None


def _learner_factory(strategy, net_spec, cfg, memory_k):
    if callable(strategy) and not isinstance(strategy, (str, StrategySpec)):
        return strategy
    spec = strategy if isinstance(strategy, StrategySpec) else strategy_for(strategy)
    return lambda seed: Learner(spec, net_spec, cfg, memory_k, seed)


def _strategy_name(strategy) -> str:
    if isinstance(strategy, str):
        return strategy
    if isinstance(strategy, StrategySpec):
        return strategy.name
    return getattr(strategy, "__name__", "custom")


def run_once(strategy, dataset: Dataset, schedule: ClassSchedule, cfg: TrainConfig,
             memory_k: int = 100, net_spec: NetSpec | None = None,
             keep_state: bool = False) -> RunReport:
    """Train through ``schedule`` once, testing after every batch."""
    net_spec = net_spec or NetSpec(dataset.input_dim)
    learner = _learner_factory(strategy, net_spec, cfg, memory_k)(schedule.seed)
    report = RunReport(_strategy_name(strategy), schedule.seed, schedule.order, schedule.batch_size,
                       config=dict(memory_k=memory_k, net_spec=net_spec, train=cfg))
    seen: list = []
    try:
        for batch in schedule.batches:
            t0 = time.perf_counter()
            learner.learn({c: dataset.train[c] for c in batch})
            report.wall_ms.append((time.perf_counter() - t0) * 1e3)
            seen += batch
            X = np.vstack([dataset.test[c] for c in seen])
            y = np.concatenate([np.full(dataset.test[c].shape[0], c) for c in seen])
            pred = np.asarray(learner.predict(X))
            report.accuracies.append(float(np.mean(pred == y)))
            report.classes_seen.append(len(seen))
        pos = {c: i for i, c in enumerate(seen)}
        report.confusion = confusion_from_predictions(
            [pos[c] for c in y], [pos[c] for c in pred.tolist()], len(seen))
        if keep_state:
            report.final_state = getattr(learner, "state", None)
    except Exception as exc:  # recorded per repeat; the remaining repeats still run
        log.warning("repeat with seed %d failed: %s", schedule.seed, exc)
        report.error = f"{type(exc).__name__}: {exc}"
    return report


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("INCRLEARN_THREADS", "1")))
    except ValueError:
        return 1


def repeat_schedule(schedule: ClassSchedule, r: int) -> ClassSchedule:
    """Schedule of repeat ``r``: repeat 0 is ``schedule`` itself."""
    if r == 0:
        return schedule
    seed = derive_seed(schedule.seed, r)
    perm = RngStream(derive_seed(seed, 0x5CED)).permutation(len(schedule.order))
    classes = sorted(schedule.order)
    return ClassSchedule(tuple(classes[i] for i in perm), schedule.batch_size, seed)


def evaluate_incremental(strategy, dataset: Dataset, schedule: ClassSchedule, cfg: TrainConfig,
                         repeats: int = 1, memory_k: int = 100,
                         net_spec: NetSpec | None = None) -> list:
    """One :class:`RunReport` per repeat; repeats differ in their class order seed.

    Repeats run in up to ``INCRLEARN_THREADS`` worker processes when the
    strategy is given by name; results are always in repeat order.
    """
    dataset.validate()
    schedules = [repeat_schedule(schedule, r) for r in range(repeats)]
    workers = min(_threads(), repeats)
    if workers > 1 and isinstance(strategy, (str, StrategySpec)):
        with ProcessPoolExecutor(workers) as pool:
            futs = [pool.submit(run_once, strategy, dataset, s, cfg, memory_k, net_spec) for s in schedules]
            return [f.result() for f in futs]
    return [run_once(strategy, dataset, s, cfg, memory_k, net_spec) for s in schedules]


def summarize(reports: Sequence[RunReport]) -> dict:
    """Mean and standard deviation over the successful repeats."""
    good = [r for r in reports if r.ok]
    if not good:
        return {"n": 0, "failed": len(reports)}
    curves = np.array([r.accuracies for r in good])
    avg = np.array([r.average_incremental_accuracy for r in good])
    return {
        "n": len(good),
        "failed": len(reports) - len(good),
        "curve_mean": curves.mean(axis=0).tolist(),
        "curve_std": curves.std(axis=0).tolist(),
        "final_mean": float(curves[:, -1].mean()),
        "final_std": float(curves[:, -1].std()),
        "avg_mean": float(avg.mean()),
        "avg_std": float(avg.std()),
    }


def confusion_matrix(state: LearnerState, test_data: dict, full_data: dict | None = None) -> np.ndarray:
    """Counts[true][predicted] over internal ids, for labels the state has seen."""
    ids = state.label_to_id()
    true, pred = [], []
    for lab, X in test_data.items():
        if lab not in ids:
            continue
        p = np.atleast_1d(predict(state, X, full_data=full_data))
        true += [ids[lab]] * len(p)
        pred += p.tolist()
    return confusion_from_predictions(true, pred, state.t)


@dataclass
class SweepReport:
    budgets: list
    results: dict  # strategy name -> list (per K) of list of RunReport

    def avg_accuracy(self, strategy: str) -> np.ndarray:
        """Array (len(budgets), repeats) of average incremental accuracies."""
        return np.array([[r.average_incremental_accuracy if r.ok else np.nan for r in reps]
                         for reps in self.results[strategy]])


def memory_sweep(strategies: Sequence[str], dataset: Dataset, schedule: ClassSchedule,
                 budgets: Sequence[int], cfg: TrainConfig, repeats: int = 1,
                 net_spec: NetSpec | None = None) -> SweepReport:
    budgets = [int(k) for k in budgets]
    if any(k < 1 for k in budgets) or budgets != sorted(budgets):
        raise ValueError("budgets must be positive and ascending")
    if budgets[0] < dataset.num_classes:
        raise BudgetExhaustedError(f"K={budgets[0]} is below the number of classes ({dataset.num_classes})")
    results = {}
    for name in strategies:
        results[name] = [evaluate_incremental(name, dataset, schedule, cfg, repeats, k, net_spec)
                         for k in budgets]
    return SweepReport(budgets, results)


def write_accuracy_csv(reports: Sequence[RunReport], path) -> None:
    """One row per step per repeat.  Contents are deterministic (no timings)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["repeat", "seed", "step", "t", "accuracy"])
        for i, r in enumerate(reports):
            for step, (t, acc) in enumerate(zip(r.classes_seen, r.accuracies), start=1):
                w.writerow([i, r.seed, step, t, repr(acc)])


def write_timing_csv(reports: Sequence[RunReport], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["repeat", "seed", "step", "wall_ms"])
        for i, r in enumerate(reports):
            for step, ms in enumerate(r.wall_ms, start=1):
                w.writerow([i, r.seed, step, f"{ms:.3f}"])


def write_confusion_csv(confusion, path, labels: Sequence | None = None) -> None:
    cm = np.asarray(confusion)
    labels = list(labels) if labels is not None else list(range(cm.shape[0]))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["true\\pred"] + labels)
        for lab, row in zip(labels, cm):
            w.writerow([lab] + row.tolist())


def write_sweep_csv(sweep: SweepReport, strategy: str, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["memory_k", "repeat", "seed", "avg_incremental_accuracy", "final_accuracy"])
        for k, reps in zip(sweep.budgets, sweep.results[strategy]):
            for i, r in enumerate(reps):
                if r.ok:
                    w.writerow([k, i, r.seed, repr(r.average_incremental_accuracy), repr(r.final_accuracy)])
                else:
                    w.writerow([k, i, r.seed, "nan", "nan"])
