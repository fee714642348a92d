"""Feature extractor, sigmoid heads, analytic backprop and minibatch SGD.

The backbone is a ReLU multilayer perceptron whose last linear layer is
followed by L2 normalization, giving features on the unit sphere.  Each
observed class owns a weight vector ``w_y`` and the network output for that
class is ``sigmoid(w_y . phi(x))`` (no bias).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import NORM_FLOOR, RngStream, derive_seed
from .errors import (
    DegenerateVectorError,
    DivergenceError,
    EmptyInputError,
    InvalidTargetError,
    NoClassesError,
    ShapeError,
)

# clamp applied to sigmoid outputs inside the log terms of the loss
PROB_CLAMP = 1e-7


@dataclass(frozen=True)
class NetSpec:
    input_dim: int
    hidden: tuple = (64,)
    feature_dim: int = 32

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if self.input_dim < 1 or any(h < 1 for h in self.hidden):
            raise ValueError("all layer widths must be >= 1")
        if self.feature_dim < 2:
            raise ValueError("feature_dim must be >= 2")

    @property
    def layer_dims(self):
        dims = (self.input_dim,) + self.hidden + (self.feature_dim,)
        return list(zip(dims[:-1], dims[1:]))


@dataclass
class ModelParams:
    """Feature-extractor layers plus one weight vector per observed class.

    ``weights[i]`` has shape ``(fan_out, fan_in)``; ``class_weights`` has
    shape ``(t, feature_dim)``.
    """

    weights: list
    biases: list
    class_weights: np.ndarray

    @property
    def t(self) -> int:
        return self.class_weights.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.class_weights.shape[1]

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[1]

    def arrays(self):
        """All parameter arrays in canonical order."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        out.append(self.class_weights)
        return out

    def copy(self) -> "ModelParams":
        return ModelParams(
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            self.class_weights.copy(),
        )

    def flatten(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.arrays()])

    def unflatten(self, vec) -> "ModelParams":
        """New params with this object's shapes, filled from ``vec``."""
        vec = np.asarray(vec, dtype=np.float64)
        parts, pos = [], 0
        for a in self.arrays():
            parts.append(vec[pos:pos + a.size].reshape(a.shape).copy())
            pos += a.size
        if pos != vec.size:
            raise ShapeError("flat vector length does not match parameters")
        n = len(self.weights)
        return ModelParams(parts[0:2 * n:2], parts[1:2 * n:2], parts[-1])

    @property
    def num_params(self) -> int:
        return sum(a.size for a in self.arrays())

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in self.arrays())

    def equals(self, other: "ModelParams") -> bool:
        """Bitwise equality of every array."""
        mine, theirs = self.arrays(), other.arrays()
        return len(mine) == len(theirs) and all(
            a.shape == b.shape and a.tobytes() == b.tobytes() for a, b in zip(mine, theirs)
        )


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 70
    minibatch_size: int = 128
    base_learning_rate: float = 2.0
    lr_drop_epochs: tuple = (49, 63)
    lr_drop_factor: float = 5.0
    weight_decay: float = 1e-5
    shuffle_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "lr_drop_epochs", tuple(int(e) for e in self.lr_drop_epochs))
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.minibatch_size < 1:
            raise ValueError("minibatch_size must be >= 1")
        if not self.lr_drop_factor > 1:
            raise ValueError("lr_drop_factor must be > 1")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be >= 0")

    @classmethod
    def with_epochs(cls, epochs: int, **kw) -> "TrainConfig":
        """Config whose learning rate drops at 7/10 and 9/10 of ``epochs``."""
        drops = (int(epochs * 7 // 10), int(epochs * 9 // 10))
        return cls(epochs=epochs, lr_drop_epochs=drops, **kw)

    def learning_rate(self, epoch: int) -> float:
        passed = sum(1 for e in self.lr_drop_epochs if epoch >= e)
        return self.base_learning_rate / self.lr_drop_factor**passed


def init_params(spec: NetSpec, rng: RngStream) -> ModelParams:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases, no heads."""
    weights, biases = [], []
    for fan_in, fan_out in spec.layer_dims:
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform_range(-bound, bound, (fan_out, fan_in)))
        biases.append(rng.uniform_range(-bound, bound, (fan_out,)))
    return ModelParams(weights, biases, np.zeros((0, spec.feature_dim)))


def add_class_heads(params: ModelParams, count: int, rng: RngStream) -> ModelParams:
    """Append ``count`` new class weight vectors; existing arrays are untouched."""
    if count < 1:
        raise ValueError("count must be >= 1")
    d = params.feature_dim
    bound = 1.0 / np.sqrt(d)
    new = rng.uniform_range(-bound, bound, (count, d))
    return ModelParams(
        [w.copy() for w in params.weights],
        [b.copy() for b in params.biases],
        np.vstack([params.class_weights, new]),
    )


def _as_batch(params: ModelParams, x):
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    X = x[None, :] if single else x
    if X.ndim != 2 or X.shape[1] != params.input_dim:
        raise ShapeError(f"expected input of dimension {params.input_dim}, got shape {x.shape}")
    return X, single


def _forward(params: ModelParams, X):
    acts = [X]
    pre = []
    h = X
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = h @ w.T + b
        pre.append(z)
        h = np.maximum(z, 0.0) if i < last else z
        acts.append(h)
    u = acts[-1]
    norms = np.sqrt(np.sum(u * u, axis=1, keepdims=True))
    if np.any(~(norms >= NORM_FLOOR)):
        raise DegenerateVectorError("feature map produced a zero vector")
    phi = u / norms
    return acts, pre, norms, phi


def extract_features(params: ModelParams, x) -> np.ndarray:
    """L2-normalized features for one sample or a batch of row samples."""
    X, single = _as_batch(params, x)
    phi = _forward(params, X)[3]
    return phi[0] if single else phi


def sigmoid(a):
    return 0.5 * (1.0 + np.tanh(0.5 * a))


def network_outputs(params: ModelParams, x) -> np.ndarray:
    """Sigmoid outputs g_1..g_t for one sample (shape (t,)) or a batch (n, t)."""
    if params.t == 0:
        raise NoClassesError("network has no class heads")
    X, single = _as_batch(params, x)
    g = sigmoid(_forward(params, X)[3] @ params.class_weights.T)
    return g[0] if single else g


def binary_cross_entropy(g, targets):
    """Summed clamped binary cross-entropy between outputs and soft targets."""
    p = np.clip(g, PROB_CLAMP, 1.0 - PROB_CLAMP)
    return float(-np.sum(targets * np.log(p) + (1.0 - targets) * np.log1p(-p)))


def check_targets(targets, n, t):
    targets = np.asarray(targets, dtype=np.float64)
    if targets.shape != (n, t):
        raise ShapeError(f"targets must have shape {(n, t)}, got {targets.shape}")
    if np.any(~((targets >= 0.0) & (targets <= 1.0))):
        raise InvalidTargetError("targets must lie in [0, 1]")
    return targets


def loss_and_gradient(params: ModelParams, X, targets):
    """Summed loss over the batch and its exact gradient.

    ``targets[i, y]`` is the desired output of head ``y`` on sample ``i``:
    a 0/1 indicator for classification terms or a recorded output for
    distillation terms.  The loss is

        -sum_i sum_y  T_iy log g_y(x_i) + (1 - T_iy) log(1 - g_y(x_i))

    with g clamped to [1e-7, 1 - 1e-7]; clamped entries have zero gradient.
    """
    if params.t == 0:
        raise NoClassesError("network has no class heads")
    X, _ = _as_batch(params, X)
    if X.shape[0] == 0:
        raise EmptyInputError("empty batch")
    T = check_targets(targets, X.shape[0], params.t)
    acts, pre, norms, phi = _forward(params, X)
    a = phi @ params.class_weights.T
    g = sigmoid(a)
    loss = binary_cross_entropy(g, T)

    inside = (g > PROB_CLAMP) & (g < 1.0 - PROB_CLAMP)
    d_a = np.where(inside, g - T, 0.0)
    g_cls = d_a.T @ phi
    d_phi = d_a @ params.class_weights
    # backprop through u -> u / ||u||
    d_u = (d_phi - phi * np.sum(phi * d_phi, axis=1, keepdims=True)) / norms

    n_layers = len(params.weights)
    g_w = [None] * n_layers
    g_b = [None] * n_layers
    delta = d_u
    for i in range(n_layers - 1, -1, -1):
        g_w[i] = delta.T @ acts[i]
        g_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ params.weights[i]) * (pre[i - 1] > 0)
    return loss, ModelParams(g_w, g_b, g_cls)


def batch_loss(params: ModelParams, X, targets) -> float:
    X, _ = _as_batch(params, X)
    T = check_targets(targets, X.shape[0], params.t)
    return binary_cross_entropy(network_outputs(params, X), T)


def finite_diff_gradient(params: ModelParams, loss_fn: Callable[[ModelParams], float],
                         epsilon: float = 1e-5) -> ModelParams:
    """Central-difference estimate of d loss_fn / d theta for every parameter."""
    if not 1e-7 <= epsilon <= 1e-3:
        raise ValueError("epsilon must lie in [1e-7, 1e-3]")
    theta = params.flatten()
    grad = np.empty_like(theta)
    for k in range(theta.size):
        orig = theta[k]
        theta[k] = orig + epsilon
        up = loss_fn(params.unflatten(theta))
        theta[k] = orig - epsilon
        down = loss_fn(params.unflatten(theta))
        theta[k] = orig
        grad[k] = (up - down) / (2.0 * epsilon)
    return params.unflatten(grad)


def sgd_train(params: ModelParams, X, targets, cfg: TrainConfig, *,
              freeze_features: bool = False, frozen_heads: int = 0,
              history: list | None = None) -> ModelParams:
    """Minibatch SGD on the summed-target loss of :func:`loss_and_gradient`.

    Each step moves along the minibatch-mean gradient plus ``weight_decay``
    times the weights (biases are not decayed).  Epoch ``e`` visits samples in
    the order of a permutation drawn from ``derive_seed(cfg.shuffle_seed, e)``.
    ``freeze_features`` holds the extractor fixed; ``frozen_heads`` holds the
    first that-many class weight vectors fixed.  Mean loss per sample of each
    epoch is appended to ``history`` when given.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if n == 0:
        raise EmptyInputError("no training data")
    T = check_targets(targets, n, params.t)
    p = params.copy()
    lam = cfg.weight_decay
    step = 0
    for epoch in range(cfg.epochs):
        lr = cfg.learning_rate(epoch)
        order = RngStream(derive_seed(cfg.shuffle_seed, epoch)).permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, cfg.minibatch_size):
            idx = order[start:start + cfg.minibatch_size]
            loss, grad = loss_and_gradient(p, X[idx], T[idx])
            if not np.isfinite(loss):
                raise DivergenceError(epoch, step, loss)
            epoch_loss += loss
            scale = lr / idx.size
            if not freeze_features:
                for i in range(len(p.weights)):
                    p.weights[i] -= scale * grad.weights[i] + lr * lam * p.weights[i]
                    p.biases[i] -= scale * grad.biases[i]
            live = slice(frozen_heads, None)
            p.class_weights[live] -= scale * grad.class_weights[live] + lr * lam * p.class_weights[live]
            if not p.is_finite():
                raise DivergenceError(epoch, step, loss)
            step += 1
        if history is not None:
            history.append(epoch_loss / n)
    return p


def count_parameters(params: ModelParams) -> dict:
    feat = sum(w.size + b.size for w, b in zip(params.weights, params.biases))
    return {"feature": feat, "heads": params.class_weights.size, "total": feat + params.class_weights.size}
