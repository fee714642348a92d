import numpy as np
import pytest

from incrlearn.errors import BudgetExhaustedError, NoClassesError, ScheduleError
from incrlearn.exemplars import construct_exemplar_set
from incrlearn.net import NetSpec, TrainConfig, extract_features
from incrlearn.trainer import incremental_train, new_state, predict

CFG = TrainConfig.with_epochs(5, minibatch_size=32)


@pytest.fixture
def data():
    g = np.random.default_rng(0)
    centers = g.normal(size=(5, 12)) * 3
    return {c: centers[c] + g.normal(size=(20, 12)) for c in range(5)}


def fresh(K=10, strategy="icarl"):
    return new_state(NetSpec(12, (16,), 8), K, seed=7, strategy=strategy)


def test_exemplar_counts_follow_budget(data):
    s = incremental_train(fresh(), {10: data[0], 11: data[1]}, CFG)
    assert s.t == 2 and s.memory.counts() == {0: 5, 1: 5}
    s = incremental_train(s, {12: data[2], 13: data[3], 14: data[4]}, CFG)
    assert s.t == 5 and s.memory.counts() == {y: 2 for y in range(5)}
    assert s.registry == [10, 11, 12, 13, 14]
    assert s.memory.total() <= 10


def test_predict_covers_all_classes(data):
    s = incremental_train(fresh(), {0: data[0], 1: data[1]}, CFG)
    s = incremental_train(s, {2: data[2]}, CFG)
    X = np.vstack([data[c] for c in range(3)])
    pred = predict(s, X)
    assert set(pred.tolist()) <= {0, 1, 2}
    for y in range(3):
        assert len(s.memory.per_class[y]) == 3


def test_predict_matches_brute_force(data):
    s = incremental_train(fresh(), {0: data[0], 1: data[1], 2: data[2]}, CFG)
    X = np.vstack([data[3], data[4]])
    phi = extract_features(s.params, X)
    means = []
    for y in range(3):
        m = extract_features(s.params, s.memory.per_class[y].items).mean(axis=0)
        means.append(m / np.linalg.norm(m))
    expected = [int(np.argmin([np.linalg.norm(f - m) for m in means])) for f in phi]
    assert predict(s, X).tolist() == expected


def test_predict_without_classes():
    with pytest.raises(NoClassesError):
        predict(fresh(), np.zeros(12))


def test_new_exemplars_use_updated_features(data):
    s0 = fresh()
    s1 = incremental_train(s0, {0: data[0]}, CFG)
    extract = lambda X: extract_features(s1.params, X)
    expected = construct_exemplar_set(data[0], 10, extract, class_id=0)
    assert s1.memory.per_class[0].equals(expected)


def test_schedule_collision(data):
    s = incremental_train(fresh(), {0: data[0]}, CFG)
    with pytest.raises(ScheduleError):
        incremental_train(s, {0: data[1]}, CFG)


def test_budget_exhausted(data):
    with pytest.raises(BudgetExhaustedError):
        incremental_train(fresh(K=2), {0: data[0], 1: data[1], 2: data[2]}, CFG)


def test_deterministic(data):
    a = incremental_train(incremental_train(fresh(), {0: data[0], 1: data[1]}, CFG), {2: data[2]}, CFG)
    b = incremental_train(incremental_train(fresh(), {0: data[0], 1: data[1]}, CFG), {2: data[2]}, CFG)
    assert a.params.equals(b.params)
    assert all(a.memory.per_class[y].equals(b.memory.per_class[y]) for y in range(3))


def test_small_classes_keep_all_samples(data):
    s = incremental_train(fresh(K=100), {0: data[0][:4], 1: data[1]}, CFG)
    assert s.memory.counts() == {0: 4, 1: 20}
