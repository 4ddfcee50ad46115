"""Mirroring networks: three-layer converging-diverging autoencoders.

The bottleneck activations are the compressed feature set of an input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArchitecture, ShapeError
from .ingestion import check_unit_range
from .neural import TANH, Network, TrainConfig, forward, forward_from, init_network, train_epochs


@dataclass
class MirrorNet:
    net: Network
    bottleneck_index: int = 1

    def __post_init__(self):
        sizes = self.net.layer_sizes
        if len(sizes) < 3 or sizes[0] != sizes[-1]:
            raise InvalidArchitecture(f"mirror layers must start and end at the same width: {sizes}")
        if not 0 < self.bottleneck_index < len(sizes) - 1:
            raise InvalidArchitecture("bottleneck must be a hidden layer")
        if sizes[self.bottleneck_index] != min(sizes):
            raise InvalidArchitecture("bottleneck must be the narrowest layer")

    @property
    def input_dim(self) -> int:
        return self.net.layer_sizes[0]

    @property
    def bottleneck_dim(self) -> int:
        return self.net.layer_sizes[self.bottleneck_index]


def new_mirror(input_dim: int, bottleneck_dim: int, seed: int = 0, *, allow_no_compression=False) -> MirrorNet:
    """A ``[input_dim, bottleneck_dim, input_dim]`` tanh mirror net.

    ``allow_no_compression`` admits ``bottleneck_dim == input_dim`` for tests.
    """
    if bottleneck_dim < 1 or bottleneck_dim > input_dim:
        raise InvalidArchitecture(f"need 1 <= bottleneck ({bottleneck_dim}) < input ({input_dim})")
    if bottleneck_dim == input_dim and not allow_no_compression:
        raise InvalidArchitecture(f"bottleneck {bottleneck_dim} does not compress input {input_dim}")
    return MirrorNet(init_network([input_dim, bottleneck_dim, input_dim], TANH, seed))


def train_mirror(mnn: MirrorNet, inputs, config: TrainConfig) -> tuple[MirrorNet, list[float]]:
    X = np.asarray(inputs, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != mnn.input_dim:
        raise ShapeError(f"inputs must be length-{mnn.input_dim} vectors, got shape {X.shape}")
    check_unit_range(X, "mirror training inputs")
    net, history = train_epochs(mnn.net, X, X, config)
    return MirrorNet(net, mnn.bottleneck_index), history


def encode(mnn: MirrorNet, x) -> np.ndarray:
    return forward(mnn.net, x)[mnn.bottleneck_index]


def decode(mnn: MirrorNet, f) -> np.ndarray:
    """Run only the layers after the bottleneck."""
    return forward_from(mnn.net, mnn.bottleneck_index, f)


def reconstruction_error(mnn: MirrorNet, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    return float(np.mean((x - decode(mnn, encode(mnn, x))) ** 2))
