"""
Class-incremental benchmark on the toy task
===========================================

Ten synthetic classes arrive two at a time.  Finetuning forgets the old
classes, LwF.MC forgets less, and keeping exemplars (icarl) forgets least.
Figures are written to ``demo_out/``.
"""

from pathlib import Path

import numpy as np

from incrlearn import TrainConfig, evaluate_incremental, make_schedule, summarize, toy_ibench
from incrlearn.benchmark import batch_prediction_mass
from incrlearn.svg import heatmap, line_plot

out = Path("demo_out")
out.mkdir(exist_ok=True)
ds = toy_ibench(seed=0)
schedule = make_schedule(10, 2, seed=1)
cfg = TrainConfig.with_epochs(70)

curves = {}
for name in ("icarl", "lwf-mc", "finetuning"):
    reports = evaluate_incremental(name, ds, schedule, cfg, repeats=3, memory_k=100)
    s = summarize(reports)
    curves[name] = (reports[0].classes_seen, s["curve_mean"], s["curve_std"])
    mass = batch_prediction_mass(reports[0].confusion, 2)
    print(f"{name:10s} avg {s['avg_mean']:.3f}  final {s['final_mean']:.3f}  "
          f"prediction mass per batch {np.round(mass, 2).tolist()}")
    heatmap(reports[0].confusion, out / f"confusion_{name}.svg", title=name)

line_plot(curves, out / "accuracy.svg", title="toy benchmark, batches of 2",
          xlabel="number of classes", ylabel="accuracy")
print("figures in", out.resolve())
