"""Dense feedforward networks trained by per-sample SGD on mean-squared error.

Everything is float64 numpy. Weight matrix ``weights[l]`` maps layer ``l`` to
layer ``l + 1`` and has shape ``(layer_sizes[l + 1], layer_sizes[l])``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptyDataset, InvalidArchitecture, InvalidConfig, NumericError, ShapeError

log = logging.getLogger(__name__)

TANH = "tanh"
LINEAR = "linear"
ACTIVATIONS = (TANH, LINEAR)


@dataclass
class Network:
    layer_sizes: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activations: tuple[str, ...]

    def __post_init__(self):
        self.layer_sizes = tuple(int(s) for s in self.layer_sizes)
        self.activations = tuple(self.activations)
        n_layers = len(self.layer_sizes) - 1
        if n_layers < 1 or min(self.layer_sizes) < 1:
            raise InvalidArchitecture(f"bad layer sizes {self.layer_sizes}")
        if len(self.weights) != n_layers or len(self.biases) != n_layers:
            raise ShapeError("need one weight matrix and bias vector per non-input layer")
        if len(self.activations) != n_layers or any(a not in ACTIVATIONS for a in self.activations):
            raise InvalidArchitecture(f"bad activation plan {self.activations}")
        for l in range(n_layers):
            w = self.weights[l] = np.asarray(self.weights[l], dtype=np.float64)
            b = self.biases[l] = np.asarray(self.biases[l], dtype=np.float64)
            if w.shape != (self.layer_sizes[l + 1], self.layer_sizes[l]):
                raise ShapeError(f"weights[{l}] has shape {w.shape}")
            if b.shape != (self.layer_sizes[l + 1],):
                raise ShapeError(f"biases[{l}] has shape {b.shape}")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise NumericError(f"non-finite parameters in layer {l}")

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def copy(self) -> "Network":
        return Network(
            self.layer_sizes,
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            self.activations,
        )

    def same_as(self, other: "Network") -> bool:
        """Bitwise equality of architecture and every parameter."""
        return (
            self.layer_sizes == other.layer_sizes
            and self.activations == other.activations
            and all(np.array_equal(a, b) for a, b in zip(self.weights, other.weights))
            and all(np.array_equal(a, b) for a, b in zip(self.biases, other.biases))
        )


@dataclass
class Gradients:
    weight_grads: list[np.ndarray]
    bias_grads: list[np.ndarray]

    @classmethod
    def zeros_like(cls, net: Network) -> "Gradients":
        return cls([np.zeros_like(w) for w in net.weights], [np.zeros_like(b) for b in net.biases])

    def check_congruent(self, net: Network):
        if len(self.weight_grads) != len(net.weights) or len(self.bias_grads) != len(net.biases):
            raise ShapeError("gradient layer count does not match network")
        for gw, w, gb, b in zip(self.weight_grads, net.weights, self.bias_grads, net.biases):
            if gw.shape != w.shape or gb.shape != b.shape:
                raise ShapeError("gradient shapes do not match network")


@dataclass
class TrainConfig:
    learning_rate: float = 0.05
    epochs: int = 500
    shuffle_seed: int = 0
    momentum: float = 0.9
    loss_log_every: int = 50

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise InvalidConfig(f"learning_rate must be > 0, got {self.learning_rate}")
        if int(self.epochs) != self.epochs or self.epochs < 1:
            raise InvalidConfig(f"epochs must be a positive integer, got {self.epochs}")
        if not 0 <= self.momentum < 1:
            raise InvalidConfig(f"momentum must lie in [0, 1), got {self.momentum}")
        if self.loss_log_every < 1:
            raise InvalidConfig("loss_log_every must be >= 1")


def _activation_plan(plan, n_layers: int) -> tuple[str, ...]:
    if isinstance(plan, str):
        return (plan,) * n_layers
    plan = tuple(plan)
    if len(plan) != n_layers:
        raise InvalidArchitecture(f"activation plan has {len(plan)} entries, need {n_layers}")
    return plan


def init_network(layer_sizes: Sequence[int], activation_plan=TANH, seed: int = 0) -> Network:
    """Uniform +-1/sqrt(fan_in) weights, zero biases, from a seeded generator."""
    sizes = [int(s) for s in layer_sizes]
    if len(sizes) < 2 or min(sizes) < 1:
        raise InvalidArchitecture(f"need at least two layers of size >= 1, got {list(layer_sizes)}")
    plan = _activation_plan(activation_plan, len(sizes) - 1)
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return Network(tuple(sizes), weights, biases, plan)


def _apply(kind: str, z: np.ndarray) -> np.ndarray:
    return np.tanh(z) if kind == TANH else z


def _check_vector(x, size: int, what: str) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (size,):
        raise ShapeError(f"{what} has shape {x.shape}, expected ({size},)")
    if not np.all(np.isfinite(x)):
        raise NumericError(f"{what} contains non-finite values")
    return x


def _forward(net: Network, x: np.ndarray, start: int = 0) -> list[np.ndarray]:
    acts = [x]
    for l in range(start, len(net.weights)):
        acts.append(_apply(net.activations[l], net.weights[l] @ acts[-1] + net.biases[l]))
    return acts


def forward(net: Network, x) -> list[np.ndarray]:
    """Activations of every layer; ``[0]`` is the input and ``[-1]`` the output."""
    return _forward(net, _check_vector(x, net.layer_sizes[0], "input"))


def forward_from(net: Network, layer: int, h) -> np.ndarray:
    """Run the layers after ``layer`` starting from that layer's activation ``h``."""
    h = _check_vector(h, net.layer_sizes[layer], f"layer {layer} activation")
    return _forward(net, h, start=layer)[-1]


def _backprop(net: Network, x: np.ndarray, t: np.ndarray) -> tuple[float, Gradients]:
    acts = _forward(net, x)
    err = acts[-1] - t
    loss = float(err @ err) / err.size
    delta = (2.0 / err.size) * err
    n = len(net.weights)
    gw: list = [None] * n
    gb: list = [None] * n
    for l in range(n - 1, -1, -1):
        if net.activations[l] == TANH:
            delta = delta * (1.0 - acts[l + 1] ** 2)
        gw[l] = np.outer(delta, acts[l])
        gb[l] = delta
        if l:
            delta = net.weights[l].T @ delta
    return loss, Gradients(gw, gb)


def backprop(net: Network, x, target) -> tuple[float, Gradients]:
    """MSE loss ``mean((output - target)**2)`` and its exact parameter gradients."""
    x = _check_vector(x, net.layer_sizes[0], "input")
    t = _check_vector(target, net.layer_sizes[-1], "target")
    return _backprop(net, x, t)


def loss(net: Network, x, target) -> float:
    out = forward(net, x)[-1]
    t = _check_vector(target, net.layer_sizes[-1], "target")
    return float(np.mean((out - t) ** 2))


def sgd_step(net: Network, grads: Gradients, config: TrainConfig, velocity: Gradients):
    """Classical momentum update, applied to ``net`` and ``velocity`` in place.

    ``velocity <- momentum * velocity - lr * grads``; ``params <- params + velocity``.
    Returns ``(net, velocity)`` for convenience.
    """
    grads.check_congruent(net)
    velocity.check_congruent(net)
    _sgd_step(net, grads, config.learning_rate, config.momentum, velocity)
    return net, velocity


def _sgd_step(net, grads, lr, momentum, velocity):
    for params, g, v in (
        (net.weights, grads.weight_grads, velocity.weight_grads),
        (net.biases, grads.bias_grads, velocity.bias_grads),
    ):
        for p, gl, vl in zip(params, g, v):
            vl *= momentum
            vl -= lr * gl
            p += vl


def _stack(vectors, size: int, what: str) -> np.ndarray:
    arr = np.asarray(vectors, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != size:
        raise ShapeError(f"{what} must be a list of length-{size} vectors, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"{what} contain non-finite values")
    return arr


def train_epochs(net: Network, inputs, targets, config: TrainConfig) -> tuple[Network, list[float]]:
    """Per-sample SGD over seeded shuffles of the data.

    The input network is left untouched; a trained copy is returned together
    with the mean (pre-update) sample loss of every epoch.
    """
    if len(inputs) == 0:
        raise EmptyDataset("no training samples")
    if len(inputs) != len(targets):
        raise ShapeError(f"{len(inputs)} inputs but {len(targets)} targets")
    X = _stack(inputs, net.layer_sizes[0], "inputs")
    T = _stack(targets, net.layer_sizes[-1], "targets")

    net = net.copy()
    velocity = Gradients.zeros_like(net)
    rng = np.random.default_rng(config.shuffle_seed)
    lr, mom = config.learning_rate, config.momentum
    history = []
    for epoch in range(config.epochs):
        total = 0.0
        for i in rng.permutation(len(X)):
            sample_loss, grads = _backprop(net, X[i], T[i])
            total += sample_loss
            _sgd_step(net, grads, lr, mom, velocity)
        history.append(total / len(X))
        if not np.isfinite(history[-1]):
            raise NumericError(f"training diverged at epoch {epoch + 1}")
        if (epoch + 1) % config.loss_log_every == 0:
            log.debug("epoch %d loss %.6g", epoch + 1, history[-1])
    return net, history


def check_gradients(net: Network, x, target, fd_step: float = 1e-5) -> float:
    """Largest relative gap between analytic and central-difference gradients."""
    if not fd_step > 0:
        raise ValueError("fd_step must be positive")
    _, grads = backprop(net, x, target)
    analytic = {id(w): g for w, g in zip(net.weights, grads.weight_grads)}
    analytic.update({id(b): g for b, g in zip(net.biases, grads.bias_grads)})

    probe = net.copy()
    pairs = list(zip(net.weights + net.biases, probe.weights + probe.biases))
    worst = 0.0
    for orig, p in pairs:
        a_grad = analytic[id(orig)]
        for idx in np.ndindex(p.shape):
            saved = p[idx]
            p[idx] = saved + fd_step
            up = loss(probe, x, target)
            p[idx] = saved - fd_step
            down = loss(probe, x, target)
            p[idx] = saved
            numeric = (up - down) / (2 * fd_step)
            a = a_grad[idx]
            worst = max(worst, abs(a - numeric) / max(1e-8, abs(a) + abs(numeric)))
    return worst
