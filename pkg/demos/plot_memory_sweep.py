"""
Accuracy as a function of the memory budget
===========================================

More stored exemplars give better class means.  With room for every sample
the exemplar means coincide with the full class means and icarl decides
exactly like the NCM oracle.
"""

from incrlearn import TrainConfig, make_schedule, memory_sweep, toy_ibench

ds = toy_ibench(seed=0)
budgets = [20, 50, 100, 200, ds.num_train()]
sweep = memory_sweep(["icarl", "ncm"], ds, make_schedule(10, 2, seed=1), budgets,
                     TrainConfig.with_epochs(70), repeats=2)

for name in ("icarl", "ncm"):
    acc = sweep.avg_accuracy(name).mean(axis=1)
    print(name.ljust(6), "  ".join(f"K={k}: {a:.3f}" for k, a in zip(budgets, acc)))
