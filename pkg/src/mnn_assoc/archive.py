"""Plain-text model archives (``MNN-ASSOC v1``).

Layout::

    MNN-ASSOC v1
    [config]
    k_groups 3
    ...
    [mirror voice]
    layers 510 20 510
    activations tanh tanh
    bottleneck 1
    matrix weight0 20 510
    <one line per row>
    vector bias0 20
    <one line>
    ...
    [kmeans voice]
    matrix centroids 3 20
    ...
    inertia <float>
    group 0 face
    [mapper face]
    ...
    checksum sha256 <hex digest of every byte above this line>

Floats are written with 17 significant digits so they read back bit-exactly.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np

from .clustering import KMeansModel
from .errors import ArchiveParseError, IntegrityError, UnsupportedVersion
from .hierarchy import HierarchyConfig, HierarchyModel
from .mirror import MirrorNet
from .neural import Network, TrainConfig

MAGIC = "MNN-ASSOC"
FORMAT_VERSION = 1


def _f(x) -> str:
    return format(float(x), ".17g")


def _row(values) -> str:
    return " ".join(_f(v) for v in values)


def _train_cfg(cfg: TrainConfig) -> str:
    return f"{_f(cfg.learning_rate)} {cfg.epochs} {cfg.shuffle_seed} {_f(cfg.momentum)} {cfg.loss_log_every}"


def _network_lines(net: Network) -> list[str]:
    out = [
        "layers " + " ".join(map(str, net.layer_sizes)),
        "activations " + " ".join(net.activations),
    ]
    for l, (w, b) in enumerate(zip(net.weights, net.biases)):
        out.append(f"matrix weight{l} {w.shape[0]} {w.shape[1]}")
        out.extend(_row(r) for r in w)
        out.append(f"vector bias{l} {b.size}")
        out.append(_row(b))
    return out


def _check_label(label: str):
    if not label or any(c.isspace() for c in label):
        raise ValueError(f"group label {label!r} cannot be archived (empty or contains whitespace)")


def dumps(model: HierarchyModel) -> str:
    cfg = model.config
    lines = [
        f"{MAGIC} v{FORMAT_VERSION}",
        "[config]",
        f"n_categories {cfg.n_categories}",
        f"k_groups {cfg.k_groups}",
        f"input_dim {cfg.input_dim}",
        f"feature_dim {cfg.feature_dim}",
        f"mapper_hidden_dim {cfg.mapper_hidden_dim}",
        f"level1_train {_train_cfg(cfg.level1_train)}",
        f"level2_train {_train_cfg(cfg.level2_train)}",
        f"route_by {cfg.route_by}",
        f"kmeans_restarts {cfg.kmeans_restarts}",
        f"seed {cfg.seed}",
    ]
    for cat in ("voice", "image"):
        mnn: MirrorNet = getattr(model, f"{cat}_mnn")
        lines.append(f"[mirror {cat}]")
        lines.extend(_network_lines(mnn.net))
        lines.append(f"bottleneck {mnn.bottleneck_index}")
    for cat in ("voice", "image"):
        km: KMeansModel = getattr(model, f"{cat}_clusters")
        lines.append(f"[kmeans {cat}]")
        lines.append(f"matrix centroids {km.centroids.shape[0]} {km.centroids.shape[1]}")
        lines.extend(_row(r) for r in km.centroids)
        lines.append(f"inertia {_f(km.inertia)}")
        for j in range(km.k):
            _check_label(km.cluster_to_group[j])
            lines.append(f"group {j} {km.cluster_to_group[j]}")
    for g in model.groups:
        _check_label(g)
        lines.append(f"[mapper {g}]")
        lines.extend(_network_lines(model.mappers[g]))
    body = "\n".join(lines) + "\n"
    digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
    return body + f"checksum sha256 {digest}\n"


def save_model(model: HierarchyModel, path):
    Path(path).write_text(dumps(model), encoding="utf-8")


class _Section:
    """Cursor over the lines of one ``[section]``."""

    def __init__(self, name: str, lines: list[str]):
        self.name = name
        self.lines = lines
        self.pos = 0

    def fail(self, msg: str):
        raise ArchiveParseError(self.name, msg)

    def take(self, key: str, nargs: int | None = None) -> list[str]:
        if self.pos >= len(self.lines):
            self.fail(f"expected '{key}', found end of section")
        parts = self.lines[self.pos].split()
        if not parts or parts[0] != key:
            self.fail(f"expected '{key}', found {self.lines[self.pos][:40]!r}")
        if nargs is not None and len(parts) - 1 != nargs:
            self.fail(f"'{key}' needs {nargs} values, found {len(parts) - 1}")
        self.pos += 1
        return parts[1:]

    def floats(self, count: int) -> np.ndarray:
        if self.pos >= len(self.lines):
            self.fail("unexpected end of numeric block")
        try:
            row = np.array(self.lines[self.pos].split(), dtype=np.float64)
        except ValueError:
            self.fail(f"non-numeric value on line {self.pos + 1}")
        if row.size != count:
            self.fail(f"expected {count} values, found {row.size}")
        self.pos += 1
        return row

    def matrix(self, name: str) -> np.ndarray:
        label, *shape = self.take("matrix", 3)
        if label != name:
            self.fail(f"expected matrix {name!r}, found {label!r}")
        rows, cols = self.ints(shape, "matrix shape")
        return np.array([self.floats(cols) for _ in range(rows)]).reshape(rows, cols)

    def vector(self, name: str) -> np.ndarray:
        label, size = self.take("vector", 2)
        if label != name:
            self.fail(f"expected vector {name!r}, found {label!r}")
        (size,) = self.ints([size], "vector size")
        return self.floats(size)

    def ints(self, values, what) -> list[int]:
        try:
            return [int(v) for v in values]
        except ValueError:
            self.fail(f"bad {what}: {values}")

    def done(self):
        if self.pos != len(self.lines):
            self.fail(f"unexpected trailing line {self.lines[self.pos][:40]!r}")


def _read_network(sec: _Section) -> Network:
    sizes = sec.ints(sec.take("layers"), "layer sizes")
    acts = sec.take("activations", len(sizes) - 1)
    weights, biases = [], []
    for l in range(len(sizes) - 1):
        weights.append(sec.matrix(f"weight{l}"))
        biases.append(sec.vector(f"bias{l}"))
    try:
        return Network(tuple(sizes), weights, biases, tuple(acts))
    except ValueError as exc:
        sec.fail(str(exc))


def _read_train_cfg(sec: _Section, key: str) -> TrainConfig:
    lr, epochs, seed, mom, log_every = sec.take(key, 5)
    try:
        return TrainConfig(float(lr), int(epochs), int(seed), float(mom), int(log_every))
    except ValueError as exc:
        sec.fail(f"{key}: {exc}")


def _read_config(sec: _Section) -> HierarchyConfig:
    def one_int(key):
        return sec.ints(sec.take(key, 1), key)[0]

    n_categories = one_int("n_categories")
    k_groups = one_int("k_groups")
    input_dim = one_int("input_dim")
    feature_dim = one_int("feature_dim")
    mapper_hidden_dim = one_int("mapper_hidden_dim")
    l1 = _read_train_cfg(sec, "level1_train")
    l2 = _read_train_cfg(sec, "level2_train")
    (route_by,) = sec.take("route_by", 1)
    restarts = one_int("kmeans_restarts")
    seed = one_int("seed")
    sec.done()
    try:
        return HierarchyConfig(
            k_groups, input_dim, feature_dim, mapper_hidden_dim, l1, l2, route_by, restarts, seed, n_categories
        )
    except ValueError as exc:
        sec.fail(str(exc))


def _read_kmeans(sec: _Section, k: int) -> KMeansModel:
    centroids = sec.matrix("centroids")
    (inertia,) = sec.take("inertia", 1)
    mapping = {}
    while sec.pos < len(sec.lines):
        j, label = sec.take("group", 2)
        mapping[sec.ints([j], "cluster index")[0]] = label
    try:
        model = KMeansModel(centroids, mapping, float(inertia))
    except ValueError as exc:
        sec.fail(str(exc))
    if model.k != k:
        sec.fail(f"{model.k} centroids but k_groups={k}")
    return model


def loads(text: str) -> HierarchyModel:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or not lines[0].startswith(MAGIC + " "):
        raise ArchiveParseError("header", f"missing '{MAGIC}' header")
    version = lines[0].split()[1]
    if version != f"v{FORMAT_VERSION}":
        raise UnsupportedVersion(f"archive version {version} unsupported (need v{FORMAT_VERSION})")
    tail = lines[-1].split()
    if len(tail) != 3 or tail[:2] != ["checksum", "sha256"]:
        raise IntegrityError("missing checksum line")
    body = "\n".join(lines[:-1]) + "\n"
    if hashlib.sha256(body.encode("utf-8")).hexdigest() != tail[2]:
        raise IntegrityError("checksum mismatch")

    sections: dict[str, _Section] = {}
    order: list[str] = []
    current = None
    for line in lines[1:-1]:
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1]
            if current in sections:
                raise ArchiveParseError(current, "duplicate section")
            sections[current] = _Section(current, [])
            order.append(current)
        elif current is None:
            raise ArchiveParseError("header", "content before first section")
        else:
            sections[current].lines.append(line)

    def need(name):
        if name not in sections:
            raise ArchiveParseError(name, "section missing")
        return sections[name]

    config = _read_config(need("config"))
    mnns = {}
    for cat in ("voice", "image"):
        sec = need(f"mirror {cat}")
        net = _read_network(sec)
        (b,) = sec.ints(sec.take("bottleneck", 1), "bottleneck")
        sec.done()
        try:
            mnns[cat] = MirrorNet(net, b)
        except ValueError as exc:
            sec.fail(str(exc))
    clusters = {cat: _read_kmeans(need(f"kmeans {cat}"), config.k_groups) for cat in ("voice", "image")}
    mappers = {}
    for name in order:
        if name.startswith("mapper "):
            sec = sections[name]
            mappers[name[len("mapper "):]] = _read_network(sec)
            sec.done()
    try:
        return HierarchyModel(
            mnns["voice"], mnns["image"], clusters["voice"], clusters["image"], mappers, config
        )
    except ValueError as exc:
        raise ArchiveParseError("mapper", str(exc)) from exc


def load_model(path) -> HierarchyModel:
    return loads(Path(path).read_text(encoding="utf-8"))
