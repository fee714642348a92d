"""
Stopping and resuming an incremental learner
============================================

A learner state (network, exemplars, class registry, RNG position) is
saved after two steps, reloaded, and trained further.  The result is
bitwise identical to never having stopped.
"""

import tempfile
from pathlib import Path

from incrlearn import NetSpec, TrainConfig, incremental_train, new_state, toy_ibench
from incrlearn.checkpoint import encode_state, load_checkpoint, save_checkpoint

ds = toy_ibench(seed=0)
cfg = TrainConfig.with_epochs(30)
batches = [{c: ds.train[c] for c in pair} for pair in ([0, 1], [2, 3], [4, 5])]


def fresh():
    return new_state(NetSpec(ds.input_dim), memory_k=40, seed=5)


straight = fresh()
for b in batches:
    straight = incremental_train(straight, b, cfg)

state = fresh()
for b in batches[:2]:
    state = incremental_train(state, b, cfg)
path = Path(tempfile.mkdtemp()) / "learner.ckpt"
save_checkpoint(state, path)
print(f"saved {path.stat().st_size} bytes after t={state.t} classes")

state = load_checkpoint(path)
state = incremental_train(state, batches[2], cfg)
print("identical to the uninterrupted run:", encode_state(state) == encode_state(straight))
print("exemplars per class:", state.memory.counts())
