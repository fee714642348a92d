"""Acceptance suite; one PASS/FAIL line per criterion is printed after the run."""

import time

import numpy as np
import pytest

from conftest import tiny_params
from incrlearn.benchmark import (Learner, batch_prediction_mass, evaluate_incremental, make_schedule,
                                 repeat_schedule, summarize)
from incrlearn.baselines import strategy_for
from incrlearn.checkpoint import decode_state, encode_state
from incrlearn.classifier import PrototypeSet, nearest_prototype
from incrlearn.cli import main
from incrlearn.core import RngStream, l2_normalize
from incrlearn.data import gen_synthetic, toy_ibench
from incrlearn.exemplars import approximation_error, construct_exemplar_set, herding_order, reduce_exemplar_set
from incrlearn.net import NetSpec, TrainConfig, extract_features, finite_diff_gradient, init_params
from incrlearn.representation import CombinedTrainingSet, icarl_loss, icarl_loss_and_gradient, record_targets

CFG = TrainConfig.with_epochs(70)
STRATEGIES = ("icarl", "lwf-mc", "finetuning", "ncm")


def max_rel_error(a, b, floor=1e-8):
    a, b = a.flatten(), b.flatten()
    mask = np.maximum(np.abs(a), np.abs(b)) > floor
    return float(np.max(np.abs(a - b)[mask] / np.maximum(np.abs(a), np.abs(b))[mask]))


def test_01_gradient_oracle(record):
    start = time.perf_counter()
    worst = 0.0
    for seed in range(20):
        g = np.random.default_rng(seed)
        pre = tiny_params(seed + 100, t=2)
        params = tiny_params(seed)
        # two old classes distilled, two new ones classified
        D = CombinedTrainingSet(g.normal(size=(4, 8)), g.integers(0, 4, size=4), np.zeros(4, dtype=bool))
        q = record_targets(pre, D, 2)
        _, grad = icarl_loss_and_gradient(params, D, q, 2, 4)
        fd = finite_diff_gradient(params, lambda p: icarl_loss(p, D, q, 2, 4), 1e-5)
        worst = max(worst, max_rel_error(grad.flatten(), fd.flatten()))
    elapsed = time.perf_counter() - start
    record(1, "gradient oracle", worst < 1e-4 and elapsed < 30,
           f"max rel error {worst:.2e}, {elapsed:.1f}s")


def test_02_prefix_consistency(record):
    start = time.perf_counter()
    mismatches = 0
    for seed in range(50):
        X = np.random.default_rng(seed).normal(size=(40, 16)) + 0.3
        built = {m: construct_exemplar_set(X, m, l2_normalize) for m in range(1, 21)}
        for m2 in range(1, 21):
            for m in range(1, m2 + 1):
                mismatches += not reduce_exemplar_set(built[m2], m).equals(built[m])
    elapsed = time.perf_counter() - start
    record(2, "herding prefix consistency", mismatches == 0 and elapsed < 10,
           f"{mismatches} mismatches over 50 classes, {elapsed:.1f}s")


def test_03_herding_beats_random(record):
    start = time.perf_counter()
    ks = (1, 5, 10, 20)
    ds = gen_synthetic(num_classes=20, dim=16, n_train=200, n_test=1, seed=11)
    params = init_params(NetSpec(16, (32,), 16), RngStream(11))
    herd, rand = {k: [] for k in ks}, {k: [] for k in ks}
    for c in ds.classes:
        F = extract_features(params, ds.train[c])
        order = herding_order(F, max(ks))
        g = np.random.default_rng(c)
        for k in ks:
            herd[k].append(approximation_error(F, order[:k]))
            rand[k] += [approximation_error(F, g.choice(len(F), k, replace=False)) for _ in range(50)]
    elapsed = time.perf_counter() - start
    ok = all(np.mean(herd[k]) <= np.mean(rand[k]) for k in ks) and elapsed < 20
    detail = ", ".join(f"k={k}: {np.mean(herd[k]):.4f} vs {np.mean(rand[k]):.4f}" for k in ks)
    record(3, "herding beats random", ok, f"{detail}, {elapsed:.1f}s")


@pytest.fixture(scope="module")
def bench_runs():
    """Shared run for criteria 4 to 6: toy benchmark, batches of 2, 10 repeats, K=100."""
    start = time.perf_counter()
    ds = toy_ibench(seed=0)
    schedule = make_schedule(10, 2, seed=1)
    reports = {s: evaluate_incremental(s, ds, schedule, CFG, repeats=10, memory_k=100) for s in STRATEGIES}
    return reports, time.perf_counter() - start


def test_04_forgetting_ordering(record, bench_runs):
    reports, elapsed = bench_runs
    final = {s: summarize(reports[s])["final_mean"] for s in STRATEGIES}
    failed = sum(summarize(reports[s])["failed"] for s in STRATEGIES)
    ok = (failed == 0 and final["icarl"] > final["lwf-mc"] > final["finetuning"]
          and final["icarl"] - final["finetuning"] >= 0.15 and elapsed < 600)
    record(4, "forgetting ordering", ok,
           f"final icarl {final['icarl']:.3f} > lwf-mc {final['lwf-mc']:.3f} > "
           f"finetuning {final['finetuning']:.3f}, {elapsed:.0f}s for all strategies")


def test_05_confusion_signatures(record, bench_runs):
    reports, _ = bench_runs
    # every repeat must show the signature, not only the average
    ft = min(batch_prediction_mass(r.confusion, 2)[-1] for r in reports["finetuning"])
    cvs = []
    for r in reports["icarl"]:
        mass = batch_prediction_mass(r.confusion, 2)
        cvs.append(mass.std() / mass.mean())
    record(5, "confusion signatures", ft >= 0.9 and max(cvs) <= 0.5,
           f"finetuning last-batch mass >= {ft:.3f}, icarl mass CV <= {max(cvs):.3f} over 10 repeats")


def test_06_ncm_gap(record, bench_runs):
    reports, _ = bench_runs
    avg = {s: summarize(reports[s])["avg_mean"] for s in ("icarl", "ncm")}
    gap = abs(avg["ncm"] - avg["icarl"])
    record(6, "NCM gap", gap <= 0.05, f"ncm {avg['ncm']:.4f}, icarl {avg['icarl']:.4f}, gap {gap:.4f}")


def test_07_memory_monotonicity(record):
    ds = toy_ibench(seed=0)
    schedule = make_schedule(10, 2, seed=1)
    all_data = ds.num_train()
    budgets = [20, 50, 100, 200, all_data]
    acc = np.array([[r.average_incremental_accuracy
                     for r in evaluate_incremental("icarl", ds, schedule, CFG, repeats=5, memory_k=k)]
                    for k in budgets])
    means = acc.mean(axis=1)
    pooled = float(np.sqrt(np.mean(acc.var(axis=1, ddof=1))))
    monotone = all(b >= a - pooled for a, b in zip(means, means[1:]))

    # with K holding every sample the exemplar means are the class means
    mismatches = total = 0
    for r in range(5):
        sched = repeat_schedule(schedule, r)
        icarl = Learner(strategy_for("icarl"), NetSpec(ds.input_dim), CFG, all_data, sched.seed)
        ncm = Learner(strategy_for("ncm"), NetSpec(ds.input_dim), CFG, all_data, sched.seed)
        seen = []
        for batch in sched.batches:
            icarl.learn({c: ds.train[c] for c in batch})
            ncm.learn({c: ds.train[c] for c in batch})
            seen += batch
            X = np.vstack([ds.test[c] for c in seen])
            a, b = icarl.predict_ids(X), ncm.predict_ids(X)
            mismatches += int(np.sum(a != b))
            total += a.size
    detail = ", ".join(f"K={k}: {m:.4f}" for k, m in zip(budgets, means))
    record(7, "memory monotonicity", monotone and mismatches == 0,
           f"{detail}; pooled std {pooled:.4f}; K=all decision mismatches {mismatches}/{total}")


def test_08_distance_dot_equivalence(record):
    g = np.random.default_rng(8)
    disagreements = 0
    for _ in range(10_000):
        c, d = int(g.integers(2, 11)), int(g.integers(2, 33))
        protos = l2_normalize(g.normal(size=(c, d)))
        q = l2_normalize(g.normal(size=d))
        by_dist = int(np.argmin(np.linalg.norm(protos - q, axis=1)))
        by_dot = int(np.argmax(protos @ q))
        via_lib = int(nearest_prototype(q[None], PrototypeSet(list(range(c)), protos))[0])
        disagreements += not (by_dist == by_dot == via_lib)
    record(8, "distance/dot equivalence", disagreements == 0, f"{disagreements} disagreements in 10^4 pairs")


def test_09_persistence(record):
    ds = toy_ibench(seed=0)
    sched = make_schedule(10, 2, seed=2)
    spec, net = strategy_for("icarl"), NetSpec(ds.input_dim)
    straight = Learner(spec, net, CFG, 100, sched.seed)
    resumed = Learner(spec, net, CFG, 100, sched.seed)
    pred_diff = 0
    seen = []
    for i, batch in enumerate(sched.batches):
        straight.learn({c: ds.train[c] for c in batch})
        resumed.learn({c: ds.train[c] for c in batch})
        if i == 1:  # interrupt: only the checkpoint bytes survive
            blob = encode_state(resumed.state)
            resumed = Learner(spec, net, CFG, 100, sched.seed)
            resumed.state = decode_state(blob)
        seen += batch
        X = np.vstack([ds.test[c] for c in seen])
        pred_diff += int(np.sum(straight.predict(X) != resumed.predict(X)))
    same_bytes = encode_state(straight.state) == encode_state(resumed.state)
    record(9, "persistence", same_bytes and pred_diff == 0,
           f"checkpoint bytes identical: {same_bytes}, prediction differences: {pred_diff}")


def test_10_cmd_run_determinism(record, tmp_path):
    same = True
    for strategy in ("icarl", "lwf-mc"):
        outs = []
        for i in range(2):
            out = tmp_path / f"{strategy}-{i}"
            assert main(["run", "--strategy", strategy, "--repeats", "2", "--out-dir", str(out)]) == 0
            outs.append(out)
        for name in ("accuracy.csv", "confusion.csv"):
            same &= (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
    record(10, "cmd_run determinism", same, "accuracy.csv and confusion.csv byte-identical across reruns")
