import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mnn_assoc import neural
from mnn_assoc.errors import EmptyDataset, InvalidArchitecture, InvalidConfig, NumericError, ShapeError
from mnn_assoc.neural import Gradients, Network, TrainConfig

from conftest import zero_network


def scalar_net(w, b=0.0, activation="linear"):
    return Network((1, 1), [np.array([[w]])], [np.array([b])], (activation,))


def loop_forward(net, x):
    """Straight-line forward pass with python floats, no numpy linear algebra."""
    act = [float(v) for v in x]
    for W, b, kind in zip(net.weights, net.biases, net.activations):
        nxt = []
        for i in range(W.shape[0]):
            z = float(b[i]) + sum(float(W[i, j]) * act[j] for j in range(W.shape[1]))
            nxt.append(math.tanh(z) if kind == "tanh" else z)
        act = nxt
    return act


def loop_loss(net, x, t):
    out = loop_forward(net, x)
    return sum((o - tt) ** 2 for o, tt in zip(out, t)) / len(out)


def random_net(shape, seed, bias_scale=0.5):
    rng = np.random.default_rng(seed)
    net = neural.init_network(shape, "tanh", seed)
    net.biases = [rng.uniform(-bias_scale, bias_scale, b.shape) for b in net.biases]
    return net


# -- init_network --------------------------------------------------------------


def test_init_full_size_shape():
    net = neural.init_network([510, 20, 510], "tanh", seed=7)
    assert [w.shape for w in net.weights] == [(20, 510), (510, 20)]
    assert [b.shape for b in net.biases] == [(20,), (510,)]
    assert np.abs(net.weights[0]).max() <= 1 / math.sqrt(510)
    assert np.abs(net.weights[1]).max() <= 1 / math.sqrt(20)


def test_init_single_unit():
    net = neural.init_network([1, 1], "tanh", seed=123)
    assert -1 <= net.weights[0][0, 0] <= 1
    assert net.biases[0][0] == 0.0


def test_init_is_deterministic():
    a = neural.init_network([2, 3, 2], "tanh", seed=42)
    b = neural.init_network([2, 3, 2], "tanh", seed=42)
    assert a.same_as(b)
    assert not a.same_as(neural.init_network([2, 3, 2], "tanh", seed=43))


@pytest.mark.parametrize("sizes", [[], [5], [3, 0, 3]])
def test_init_rejects_bad_architecture(sizes):
    with pytest.raises(InvalidArchitecture):
        neural.init_network(sizes, "tanh", 0)


def test_network_rejects_non_finite():
    with pytest.raises(NumericError):
        Network((1, 1), [np.array([[np.nan]])], [np.zeros(1)], ("tanh",))


# -- forward -------------------------------------------------------------------


def test_forward_zero_net_gives_zeros():
    out = neural.forward(zero_network([4, 3, 4]), [0.3, -1, 0.2, 0.9])[-1]
    assert np.array_equal(out, np.zeros(4))


def test_forward_linear_scalar():
    assert neural.forward(scalar_net(0.5), [2.0])[-1].tolist() == [1.0]


def test_forward_matches_loop_oracle():
    net = random_net((5, 3, 5), seed=11)
    got = neural.forward(net, np.ones(5))
    assert [a.shape for a in got] == [(5,), (3,), (5,)]
    np.testing.assert_allclose(got[-1], loop_forward(net, np.ones(5)), rtol=0, atol=1e-14)


def test_forward_shape_error():
    with pytest.raises(ShapeError):
        neural.forward(zero_network([3, 2]), [1.0, 2.0])


# -- backprop ------------------------------------------------------------------


def test_backprop_at_minimum():
    net = random_net((3, 2, 3), seed=5)
    x = np.array([0.1, -0.4, 0.7])
    target = neural.forward(net, x)[-1]
    loss, g = neural.backprop(net, x, target)
    assert loss == 0.0
    assert all(not a.any() for a in g.weight_grads + g.bias_grads)


def test_backprop_hand_differentiated_scalar():
    loss, g = neural.backprop(scalar_net(1.0), [1.0], [0.0])
    assert loss == 1.0
    assert g.weight_grads[0][0, 0] == 2.0
    assert g.bias_grads[0][0] == 2.0


def test_backprop_against_independent_finite_differences():
    net = random_net((5, 3, 5), seed=3)
    rng = np.random.default_rng(0)
    x, t = rng.uniform(-1, 1, 5), rng.uniform(-1, 1, 5)
    loss, g = neural.backprop(net, x, t)
    assert loss == pytest.approx(loop_loss(net, x, t), rel=1e-12)
    h = 1e-5
    for arr, grad in zip(net.weights + net.biases, g.weight_grads + g.bias_grads):
        for idx in np.ndindex(arr.shape):
            saved = arr[idx]
            arr[idx] = saved + h
            up = loop_loss(net, x, t)
            arr[idx] = saved - h
            down = loop_loss(net, x, t)
            arr[idx] = saved
            numeric = (up - down) / (2 * h)
            assert abs(grad[idx] - numeric) <= 1e-4 * max(1e-8, abs(grad[idx]) + abs(numeric))


def test_backprop_errors():
    net = zero_network([2, 2])
    with pytest.raises(ShapeError):
        neural.backprop(net, [1.0], [0.0, 0.0])
    with pytest.raises(ShapeError):
        neural.backprop(net, [1.0, 0.0], [0.0])
    with pytest.raises(NumericError):
        neural.backprop(net, [np.inf, 0.0], [0.0, 0.0])


# -- sgd_step ------------------------------------------------------------------


def test_sgd_zero_gradient_is_fixed_point():
    net = random_net((3, 2, 3), seed=1)
    before = net.copy()
    neural.sgd_step(net, Gradients.zeros_like(net), TrainConfig(), Gradients.zeros_like(net))
    assert net.same_as(before)


def test_sgd_plain_step():
    net = scalar_net(1.0)
    g = Gradients([np.array([[2.0]])], [np.zeros(1)])
    neural.sgd_step(net, g, TrainConfig(learning_rate=0.1, momentum=0.0), Gradients.zeros_like(net))
    assert net.weights[0][0, 0] == pytest.approx(0.8, abs=1e-15)


def test_sgd_momentum_unrolled():
    net = scalar_net(0.0)
    cfg = TrainConfig(learning_rate=0.1, momentum=0.5)
    g = Gradients([np.array([[1.0]])], [np.zeros(1)])
    v = Gradients.zeros_like(net)
    neural.sgd_step(net, g, cfg, v)
    assert net.weights[0][0, 0] == pytest.approx(-0.1, abs=1e-15)
    neural.sgd_step(net, g, cfg, v)
    assert net.weights[0][0, 0] == pytest.approx(-0.25, abs=1e-15)


def test_sgd_shape_mismatch():
    net = scalar_net(0.0)
    bad = Gradients([np.zeros((2, 1))], [np.zeros(1)])
    with pytest.raises(ShapeError):
        neural.sgd_step(net, bad, TrainConfig(), Gradients.zeros_like(net))


# -- TrainConfig / train_epochs -----------------------------------------------


@pytest.mark.parametrize(
    "kwargs", [dict(epochs=0), dict(learning_rate=0.0), dict(momentum=1.0), dict(momentum=-0.1)]
)
def test_train_config_validation(kwargs):
    with pytest.raises(InvalidConfig):
        TrainConfig(**kwargs)


def test_train_single_sample_at_optimum():
    net = random_net((3, 4, 2), seed=9)
    x = np.array([0.5, -0.5, 0.25])
    target = neural.forward(net, x)[-1]
    trained, hist = neural.train_epochs(net, [x], [target], TrainConfig(epochs=5))
    assert hist == [0.0] * 5
    assert trained.same_as(net)


def test_train_leaves_input_network_alone():
    net = random_net((3, 2, 3), seed=2)
    before = net.copy()
    X = np.random.default_rng(0).uniform(-1, 1, (4, 3))
    trained, _ = neural.train_epochs(net, X, X, TrainConfig(epochs=3))
    assert net.same_as(before)
    assert not trained.same_as(before)


def test_train_errors():
    net = zero_network([2, 2])
    with pytest.raises(EmptyDataset):
        neural.train_epochs(net, [], [], TrainConfig(epochs=1))
    with pytest.raises(ShapeError):
        neural.train_epochs(net, [[0, 0]], [[0, 0], [1, 1]], TrainConfig(epochs=1))


def test_train_full_width_reduces_loss():
    rng = np.random.default_rng(1)
    protos = rng.uniform(-0.8, 0.8, (3, 510))
    X = np.clip(protos[np.arange(30) % 3] + rng.normal(0, 0.1, (30, 510)), -1, 1)
    net = neural.init_network([510, 20, 510], "tanh", seed=0)
    _, hist = neural.train_epochs(net, X, X, TrainConfig(learning_rate=0.05, epochs=200))
    assert len(hist) == 200
    assert hist[-1] < 0.5 * hist[0]


def test_train_is_deterministic():
    X = np.random.default_rng(4).uniform(-1, 1, (10, 6))
    net = neural.init_network([6, 3, 6], "tanh", seed=4)
    cfg = TrainConfig(epochs=20, shuffle_seed=8)
    a, ha = neural.train_epochs(net, X, X, cfg)
    b, hb = neural.train_epochs(net, X, X, cfg)
    assert a.same_as(b) and ha == hb


# -- check_gradients -----------------------------------------------------------


def test_check_gradients_zero_case():
    assert neural.check_gradients(zero_network([3, 2, 3]), np.zeros(3), np.zeros(3), 1e-5) == 0.0


@pytest.mark.parametrize("shape", [(5, 3, 5), (20, 20, 20)])
def test_check_gradients_random(shape):
    rng = np.random.default_rng(sum(shape))
    net = random_net(shape, seed=sum(shape))
    d = neural.check_gradients(net, rng.uniform(-1, 1, shape[0]), rng.uniform(-1, 1, shape[-1]), 1e-5)
    assert d < 1e-4


def test_check_gradients_rejects_bad_step():
    with pytest.raises(ValueError):
        neural.check_gradients(zero_network([1, 1]), [0.0], [0.0], 0.0)


# -- properties ----------------------------------------------------------------

small_shapes = st.lists(st.integers(1, 5), min_size=2, max_size=4).filter(
    lambda s: sum(a * b + b for a, b in zip(s[:-1], s[1:])) <= 100
)


@settings(max_examples=40, deadline=None)
@given(small_shapes, st.integers(0, 2**31 - 1))
def test_gradient_exactness_property(shape, seed):
    rng = np.random.default_rng(seed)
    net = random_net(shape, seed)
    x, t = rng.uniform(-1, 1, shape[0]), rng.uniform(-1, 1, shape[-1])
    assert neural.check_gradients(net, x, t, 1e-5) < 1e-4


@settings(max_examples=40, deadline=None)
@given(small_shapes, st.integers(0, 2**31 - 1), st.floats(1e-6, 1e-3))
def test_single_step_descends(shape, seed, lr):
    rng = np.random.default_rng(seed)
    net = random_net(shape, seed)
    x, t = rng.uniform(-1, 1, shape[0]), rng.uniform(-1, 1, shape[-1])
    before, g = neural.backprop(net, x, t)
    neural.sgd_step(net, g, TrainConfig(learning_rate=lr, momentum=0.0), Gradients.zeros_like(net))
    assert neural.loss(net, x, t) <= before + 1e-15


@settings(max_examples=30, deadline=None)
@given(small_shapes, st.integers(0, 2**31 - 1))
def test_shape_closure(shape, seed):
    net = random_net(shape, seed)
    x = np.random.default_rng(seed).uniform(-1, 1, shape[0])
    assert [a.size for a in neural.forward(net, x)] == list(shape)
    _, g = neural.backprop(net, x, np.zeros(shape[-1]))
    assert [w.shape for w in g.weight_grads] == [w.shape for w in net.weights]
    assert [b.shape for b in g.bias_grads] == [b.shape for b in net.biases]
