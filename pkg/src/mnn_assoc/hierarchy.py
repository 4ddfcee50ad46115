"""Two-level associative architecture.

Level I: one mirror net + k-means model per sensory category (voice, image).
Level II: one small mapper network per pattern group, trained to turn voice
features into the paired image features.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import clustering, mirror
from .clustering import KMeansModel
from .errors import EmptyDataset, InsufficientData, InvalidConfig, MissingGroupData, ShapeError
from .ingestion import INPUT_DIM, SamplePair, check_unit_range
from .mirror import MirrorNet
from .neural import TANH, Network, TrainConfig, forward, init_network, train_epochs

log = logging.getLogger(__name__)

ROUTE_TRUE_LABEL = "true-label"
ROUTE_PREDICTED = "predicted-cluster"

# Published reference operating points, kept for side-by-side reporting.
REFERENCE_VOICE_ACCURACY = 0.916
REFERENCE_IMAGE_ACCURACY = 0.953
REFERENCE_OVERALL_EFFICIENCY = 0.916


@dataclass
class HierarchyConfig:
    k_groups: int = 3
    input_dim: int = INPUT_DIM
    feature_dim: int = 20
    mapper_hidden_dim: int = 20
    level1_train: TrainConfig = field(default_factory=TrainConfig)
    level2_train: TrainConfig = field(default_factory=TrainConfig)
    route_by: str = ROUTE_TRUE_LABEL
    kmeans_restarts: int = 20
    seed: int = 0
    n_categories: int = 2

    def __post_init__(self):
        if self.n_categories != 2:
            raise InvalidConfig("only the voice/image pair of categories is supported")
        if self.k_groups < 2:
            raise InvalidConfig(f"k_groups must be >= 2, got {self.k_groups}")
        if min(self.input_dim, self.feature_dim, self.mapper_hidden_dim) < 1:
            raise InvalidConfig("all dimensions must be positive")
        if not self.feature_dim < self.input_dim:
            raise InvalidConfig("feature_dim must be smaller than input_dim")
        if self.route_by not in (ROUTE_TRUE_LABEL, ROUTE_PREDICTED):
            raise InvalidConfig(f"unknown route_by {self.route_by!r}")
        if self.kmeans_restarts < 1:
            raise InvalidConfig("kmeans_restarts must be >= 1")


@dataclass
class Level1:
    voice_mnn: MirrorNet
    image_mnn: MirrorNet
    voice_clusters: KMeansModel
    image_clusters: KMeansModel
    voice_history: list[float] = field(default_factory=list)
    image_history: list[float] = field(default_factory=list)


@dataclass
class HierarchyModel:
    voice_mnn: MirrorNet
    image_mnn: MirrorNet
    voice_clusters: KMeansModel
    image_clusters: KMeansModel
    mappers: dict[str, Network]
    config: HierarchyConfig
    histories: dict[str, list[float]] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        labels = set(self.mappers)
        if len(labels) != self.config.k_groups:
            raise ShapeError(f"{len(labels)} mappers for k_groups={self.config.k_groups}")
        for name, km in (("voice", self.voice_clusters), ("image", self.image_clusters)):
            if not km.groups <= labels:
                raise ShapeError(f"{name} clusters name groups without a mapper: {km.groups - labels}")
        fd = self.config.feature_dim
        for g, net in self.mappers.items():
            if net.layer_sizes[0] != fd or net.layer_sizes[-1] != fd:
                raise ShapeError(f"mapper {g!r} has layers {net.layer_sizes}, need {fd} in and out")

    @property
    def groups(self) -> list[str]:
        return sorted(self.mappers)


@dataclass
class PairRecord:
    id: str
    group: str
    voice_group: str
    image_group: str
    mapped_group: str
    correct: bool


@dataclass
class EvalReport:
    voice_accuracy: float
    image_accuracy: float
    overall_efficiency: float
    labels: list[str]
    voice_confusion: list[list[int]]
    image_confusion: list[list[int]]
    mapping_confusion: list[list[int]]
    records: list[PairRecord]

    def metrics(self) -> dict[str, float]:
        return {
            "voice_accuracy": self.voice_accuracy,
            "image_accuracy": self.image_accuracy,
            "overall_efficiency": self.overall_efficiency,
        }


def _check_pairs(pairs: Sequence[SamplePair], input_dim: int):
    for p in pairs:
        p.validate(input_dim)


def _seeds(config: HierarchyConfig) -> dict[str, int]:
    """Independent sub-seeds for every randomised component, derived from ``config.seed``."""
    names = ("voice_init", "image_init", "voice_shuffle", "image_shuffle", "voice_kmeans", "image_kmeans", "mappers")
    ss = np.random.SeedSequence(config.seed).spawn(len(names))
    return {n: int(s.generate_state(1)[0]) for n, s in zip(names, ss)}


def _with_seed(cfg: TrainConfig, seed: int) -> TrainConfig:
    return TrainConfig(cfg.learning_rate, cfg.epochs, seed, cfg.momentum, cfg.loss_log_every)


def encode_all(mnn: MirrorNet, vectors) -> np.ndarray:
    return np.array([mirror.encode(mnn, v) for v in vectors])


def train_level1(pairs: Sequence[SamplePair], config: HierarchyConfig) -> Level1:
    if len(pairs) < config.k_groups:
        raise InsufficientData(f"{len(pairs)} pairs cannot form {config.k_groups} groups")
    _check_pairs(pairs, config.input_dim)
    seeds = _seeds(config)
    labels = [p.group for p in pairs]
    parts = {}
    for cat in ("voice", "image"):
        X = np.array([getattr(p, cat) for p in pairs])
        mnn = mirror.new_mirror(config.input_dim, config.feature_dim, seeds[f"{cat}_init"])
        mnn, hist = mirror.train_mirror(mnn, X, _with_seed(config.level1_train, seeds[f"{cat}_shuffle"]))
        log.info("%s mirror: loss %.4g -> %.4g", cat, hist[0], hist[-1])
        feats = encode_all(mnn, X)
        km = clustering.fit_kmeans_model(
            feats, labels, config.k_groups, config.kmeans_restarts, seeds[f"{cat}_kmeans"]
        )
        parts[cat] = (mnn, km, hist)
    return Level1(
        parts["voice"][0], parts["image"][0], parts["voice"][1], parts["image"][1],
        parts["voice"][2], parts["image"][2],
    )


def train_level2(level1: Level1, pairs: Sequence[SamplePair], config: HierarchyConfig):
    """Train one ``[feature, hidden, feature]`` mapper per group; returns ``(mappers, histories)``."""
    _check_pairs(pairs, config.input_dim)
    voice_f = encode_all(level1.voice_mnn, [p.voice for p in pairs])
    image_f = encode_all(level1.image_mnn, [p.image for p in pairs])
    if config.route_by == ROUTE_TRUE_LABEL:
        routes = [p.group for p in pairs]
    else:
        routes = [clustering.classify(level1.voice_clusters, f)[0] for f in voice_f]

    groups = sorted(set(p.group for p in pairs) | level1.voice_clusters.groups | level1.image_clusters.groups)
    if len(groups) != config.k_groups:
        raise InvalidConfig(f"data has {len(groups)} group labels but k_groups={config.k_groups}")
    base = _seeds(config)["mappers"]
    mappers, histories = {}, {}
    for gi, g in enumerate(groups):
        idx = [i for i, r in enumerate(routes) if r == g]
        if not idx:
            raise MissingGroupData(g)
        net = init_network(
            [config.feature_dim, config.mapper_hidden_dim, config.feature_dim], TANH, base + 2 * gi
        )
        net, hist = train_epochs(net, voice_f[idx], image_f[idx], _with_seed(config.level2_train, base + 2 * gi + 1))
        log.info("mapper %s: %d pairs, loss %.4g -> %.4g", g, len(idx), hist[0], hist[-1])
        mappers[g], histories[g] = net, hist
    return mappers, histories


def train_full(pairs: Sequence[SamplePair], config: HierarchyConfig) -> HierarchyModel:
    """Level I first, then Level II on the frozen Level I features."""
    lvl1 = train_level1(pairs, config)
    mappers, hists = train_level2(lvl1, pairs, config)
    histories = {"voice_mnn": lvl1.voice_history, "image_mnn": lvl1.image_history}
    histories.update({f"mapper:{g}": h for g, h in hists.items()})
    return HierarchyModel(
        lvl1.voice_mnn, lvl1.image_mnn, lvl1.voice_clusters, lvl1.image_clusters, mappers, config, histories
    )


@dataclass
class Association:
    group: str
    voice_features: np.ndarray
    image_features: np.ndarray
    image: np.ndarray

    def __iter__(self):
        return iter((self.group, self.image_features, self.image))


def associate(model: HierarchyModel, voice) -> Association:
    """Voice vector -> predicted group, mapped image features, reconstructed image vector."""
    voice = np.asarray(voice, dtype=np.float64)
    if voice.shape != (model.config.input_dim,):
        raise ShapeError(f"voice has shape {voice.shape}, expected ({model.config.input_dim},)")
    check_unit_range(voice, "voice input")
    f = mirror.encode(model.voice_mnn, voice)
    group, _ = clustering.classify(model.voice_clusters, f)
    m = forward(model.mappers[group], f)[-1]
    return Association(group, f, m, mirror.decode(model.image_mnn, m))


def _confusion(labels: list[str], truth, predicted) -> list[list[int]]:
    pos = {g: i for i, g in enumerate(labels)}
    mat = [[0] * len(labels) for _ in labels]
    for t, p in zip(truth, predicted):
        mat[pos[t]][pos[p]] += 1
    return mat


def evaluate(model: HierarchyModel, test_pairs: Sequence[SamplePair]) -> EvalReport:
    """Level I accuracies plus overall efficiency.

    A pair counts toward overall efficiency only if its voice is routed to the
    right group and the mapped features fall nearest an image centroid named
    after that group.
    """
    if not test_pairs:
        raise EmptyDataset("no test pairs")
    _check_pairs(test_pairs, model.config.input_dim)
    records = []
    for p in test_pairs:
        a = associate(model, p.voice)
        image_group = clustering.classify(model.image_clusters, mirror.encode(model.image_mnn, p.image))[0]
        mapped_group = clustering.classify(model.image_clusters, a.image_features)[0]
        records.append(
            PairRecord(p.id, p.group, a.group, image_group, mapped_group,
                       a.group == p.group and mapped_group == p.group)
        )
    n = len(records)
    labels = sorted(set(model.groups) | {r.group for r in records})
    truth = [r.group for r in records]
    return EvalReport(
        voice_accuracy=sum(r.voice_group == r.group for r in records) / n,
        image_accuracy=sum(r.image_group == r.group for r in records) / n,
        overall_efficiency=sum(r.correct for r in records) / n,
        labels=labels,
        voice_confusion=_confusion(labels, truth, [r.voice_group for r in records]),
        image_confusion=_confusion(labels, truth, [r.image_group for r in records]),
        mapping_confusion=_confusion(labels, truth, [r.mapped_group for r in records]),
        records=records,
    )
