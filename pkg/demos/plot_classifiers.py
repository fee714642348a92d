"""
Nearest-mean-of-exemplars versus the network's own output
=========================================================

After two incremental steps the same learner is asked to classify with
three rules: the mean of its exemplars, its sigmoid heads, and the class
means over all training data (an oracle that keeps everything).
"""

import numpy as np

from incrlearn import Learner, NetSpec, TrainConfig, strategy_for, toy_ibench
from incrlearn.baselines import MEAN_OF_EXEMPLARS, NCM, NETWORK_OUTPUT

ds = toy_ibench(seed=0)
learner = Learner(strategy_for("ncm"), NetSpec(ds.input_dim), TrainConfig.with_epochs(70),
                  memory_k=20, seed=1)

batches = [[0, 1, 2, 3, 4], [5, 6, 7, 8, 9]]
for step, batch in enumerate(batches, start=1):
    learner.learn({c: ds.train[c] for c in batch})
    seen = [c for b in batches[:step] for c in b]
    X = np.vstack([ds.test[c] for c in seen])
    y = np.repeat(seen, [len(ds.test[c]) for c in seen])
    for kind in (MEAN_OF_EXEMPLARS, NETWORK_OUTPUT, NCM):
        acc = np.mean(learner.predict(X, kind=kind) == y)
        print(f"step {step}  {kind:18s} accuracy {acc:.3f}")

# with K=20 only two exemplars per class remain after step 2
print("exemplars per class:", learner.state.memory.counts())
