import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mnn_assoc import mirror, neural
from mnn_assoc.errors import DomainError, InvalidArchitecture, ShapeError
from mnn_assoc.ingestion import SyntheticSpec, generate_synthetic
from mnn_assoc.mirror import MirrorNet
from mnn_assoc.neural import TrainConfig

from conftest import zero_network


@pytest.fixture(scope="module")
def voice_vectors():
    pairs = generate_synthetic(SyntheticSpec(pairs_per_group=50))
    return np.array([p.voice for p in pairs]), [p.group for p in pairs]


@pytest.fixture(scope="module")
def trained(voice_vectors):
    X, _ = voice_vectors
    return mirror.train_mirror(mirror.new_mirror(510, 20, seed=1), X, TrainConfig(epochs=60))


def test_new_mirror_full_size_shape():
    m = mirror.new_mirror(510, 20, seed=0)
    assert m.net.layer_sizes == (510, 20, 510)
    assert (m.input_dim, m.bottleneck_dim, m.bottleneck_index) == (510, 20, 1)


def test_new_mirror_minimal():
    assert mirror.new_mirror(2, 1, seed=0).net.layer_sizes == (2, 1, 2)


def test_new_mirror_requires_compression():
    with pytest.raises(InvalidArchitecture):
        mirror.new_mirror(20, 20, seed=0)
    with pytest.raises(InvalidArchitecture):
        mirror.new_mirror(20, 0, seed=0)
    assert mirror.new_mirror(20, 20, seed=0, allow_no_compression=True).bottleneck_dim == 20


def test_mirror_rejects_non_mirrored_network():
    with pytest.raises(InvalidArchitecture):
        MirrorNet(zero_network([4, 2, 3]))
    with pytest.raises(InvalidArchitecture):
        MirrorNet(zero_network([4, 5, 4]))


def test_train_zero_data_on_zero_net():
    m = MirrorNet(zero_network([8, 3, 8]))
    _, hist = mirror.train_mirror(m, np.zeros((5, 8)), TrainConfig(epochs=4))
    assert hist == [0.0] * 4


def test_train_reduces_loss(trained):
    _, hist = trained
    assert hist[-1] < 0.2 * hist[0]


def test_training_trend_last_tenth_below_first(trained):
    _, hist = trained
    tenth = max(1, len(hist) // 10)
    assert np.mean(hist[-tenth:]) < np.mean(hist[:tenth])


def test_train_input_validation():
    m = mirror.new_mirror(510, 20, seed=0)
    with pytest.raises(ShapeError):
        mirror.train_mirror(m, np.zeros((3, 509)), TrainConfig(epochs=1))
    with pytest.raises(DomainError):
        mirror.train_mirror(m, np.full((3, 510), 1.5), TrainConfig(epochs=1))


def test_encode_gives_bottleneck(trained):
    m, _ = trained
    x = np.random.default_rng(0).uniform(-1, 1, 510)
    f = mirror.encode(m, x)
    assert f.shape == (20,)
    assert np.array_equal(f, neural.forward(m.net, x)[1])


def test_zero_net_encode_decode():
    m = MirrorNet(zero_network([6, 2, 6]))
    assert np.array_equal(mirror.encode(m, np.linspace(-1, 1, 6)), np.zeros(2))
    assert np.array_equal(mirror.decode(m, np.zeros(2)), np.zeros(6))


def test_decode_of_trained_image_net_in_range(trained):
    m, _ = trained
    out = mirror.decode(m, np.random.default_rng(1).uniform(-1, 1, 20))
    assert out.shape == (510,)
    assert np.all(np.abs(out) < 1)


def test_encode_decode_shape_errors():
    m = mirror.new_mirror(6, 2, seed=0)
    with pytest.raises(ShapeError):
        mirror.encode(m, np.zeros(5))
    with pytest.raises(ShapeError):
        mirror.decode(m, np.zeros(3))


def test_reconstruction_error_zero_net():
    m = MirrorNet(zero_network([4, 2, 4]))
    x = np.array([0.5, -1.0, 0.25, 0.0])
    assert mirror.reconstruction_error(m, np.zeros(4)) == 0.0
    assert mirror.reconstruction_error(m, x) == pytest.approx(np.mean(x**2), rel=1e-15)


def test_reconstruction_separates_trained_class():
    rng = np.random.default_rng(5)
    a, b = rng.uniform(-0.8, 0.8, (2, 60))
    X = np.clip(a + rng.normal(0, 0.05, (40, 60)), -1, 1)
    m, _ = mirror.train_mirror(mirror.new_mirror(60, 4, seed=2), X, TrainConfig(epochs=100))
    inside = np.clip(a + rng.normal(0, 0.05, 60), -1, 1)
    outside = np.clip(b + rng.normal(0, 0.05, 60), -1, 1)
    assert mirror.reconstruction_error(m, inside) < mirror.reconstruction_error(m, outside)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 30), st.integers(0, 2**31 - 1), st.data())
def test_composition_identity(dim, seed, data):
    bottleneck = data.draw(st.integers(1, dim - 1))
    m = mirror.new_mirror(dim, bottleneck, seed)
    m.net.biases = [np.random.default_rng(seed).uniform(-1, 1, b.shape) for b in m.net.biases]
    x = np.random.default_rng(seed + 1).uniform(-1, 1, dim)
    assert np.array_equal(mirror.decode(m, mirror.encode(m, x)), neural.forward(m.net, x)[-1])
    f = mirror.encode(m, x)
    assert np.all((f > -1) & (f < 1))
