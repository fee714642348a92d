"""
Herding: prioritized exemplar selection
=======================================

Herding picks samples one by one so that the running mean of the chosen
features stays as close as possible to the class mean.  Any prefix of the
resulting list is itself a small exemplar set.
"""

import numpy as np

from incrlearn import NetSpec, RngStream, gen_synthetic, init_params
from incrlearn.exemplars import approximation_error, herding_order
from incrlearn.net import extract_features

# one class of a synthetic mixture, mapped through a random feature net
ds = gen_synthetic(num_classes=1, dim=16, n_train=200, n_test=1, seed=4)
params = init_params(NetSpec(16, (32,), 16), RngStream(4))
F = extract_features(params, ds.train[0])

order = herding_order(F, 20)
print("first ten herding picks:", order[:10].tolist())

# compare against random subsets of the same size
g = np.random.default_rng(0)
print(" k   herding   random (mean of 50)")
for k in (1, 2, 5, 10, 20):
    rand = np.mean([approximation_error(F, g.choice(200, k, replace=False)) for _ in range(50)])
    print(f"{k:2d}   {approximation_error(F, order[:k]):.4f}    {rand:.4f}")
