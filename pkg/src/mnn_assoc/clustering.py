"""Forgy-initialised k-means, majority-vote cluster naming and nearest-centroid classification."""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import EmptyDataset, InsufficientData, ShapeError


@dataclass
class KMeansRun:
    assignments: np.ndarray
    centroids: np.ndarray
    inertia: float
    seed: int
    inertia_trace: list[float] = field(default_factory=list)
    iterations: int = 0

    def __iter__(self):
        return iter((self.assignments, self.centroids, self.inertia))


@dataclass
class KMeansModel:
    centroids: np.ndarray
    cluster_to_group: dict[int, str]
    inertia: float

    def __post_init__(self):
        self.centroids = np.asarray(self.centroids, dtype=np.float64)
        if self.centroids.ndim != 2 or len(self.centroids) < 1:
            raise ShapeError("centroids must be a non-empty (k, d) array")
        if not np.all(np.isfinite(self.centroids)):
            raise ShapeError("centroids must be finite")
        if set(self.cluster_to_group) != set(range(self.k)):
            raise ShapeError("cluster_to_group must name every cluster 0..k-1")

    @property
    def k(self) -> int:
        return len(self.centroids)

    @property
    def groups(self) -> set[str]:
        return set(self.cluster_to_group.values())


def _as_points(points) -> np.ndarray:
    P = np.asarray(points, dtype=np.float64)
    if P.ndim == 1:
        P = P[:, None]
    if P.ndim != 2:
        raise ShapeError(f"points must be a list of equal-length vectors, got shape {P.shape}")
    return P


def _sq_dists(P: np.ndarray, C: np.ndarray) -> np.ndarray:
    return ((P[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)


def sse(points, assignments, centroids) -> float:
    P = _as_points(points)
    C = _as_points(centroids)
    return float(((P - C[np.asarray(assignments)]) ** 2).sum())


def _repair_empty(assign: np.ndarray, d2: np.ndarray, k: int) -> np.ndarray:
    """Give each empty cluster the point farthest from its own centroid."""
    assign = assign.copy()
    for j in range(k):
        counts = np.bincount(assign, minlength=k)
        if counts[j]:
            continue
        own = d2[np.arange(len(assign)), assign]
        own = np.where(counts[assign] > 1, own, -np.inf)
        assign[int(np.argmax(own))] = j
    return assign


def forgy_kmeans(points, k: int, seed: int = 0, max_iters: int = 100) -> KMeansRun:
    """Lloyd iterations from ``k`` distinct data points picked uniformly at random.

    Stops when assignments repeat or after ``max_iters`` assignment/update
    rounds. Nearest-centroid ties go to the lowest cluster index.
    """
    P = _as_points(points)
    n = len(P)
    if k < 1:
        raise ValueError("k must be positive")
    if n < k:
        raise InsufficientData(f"{n} points cannot form {k} clusters")
    rng = np.random.default_rng(seed)
    C = P[rng.choice(n, size=k, replace=False)].copy()
    assign = None
    trace = []
    it = 0
    for it in range(1, max_iters + 1):
        d2 = _sq_dists(P, C)
        new = _repair_empty(np.argmin(d2, axis=1), d2, k)
        if assign is not None and np.array_equal(new, assign):
            break
        assign = new
        C = np.array([P[assign == j].mean(axis=0) for j in range(k)])
        trace.append(sse(P, assign, C))
    return KMeansRun(assign, C, sse(P, assign, C), seed, trace, it)


def kmeans_restarts(points, k: int, restarts: int = 20, seed: int = 0, max_iters: int = 100) -> KMeansRun:
    """Best of ``restarts`` Forgy runs with seeds ``seed, seed+1, ...``; lowest inertia, then lowest seed."""
    if restarts < 1:
        raise ValueError("restarts must be positive")
    runs = [forgy_kmeans(points, k, seed + r, max_iters) for r in range(restarts)]
    return min(runs, key=lambda r: (r.inertia, r.seed))


def _majority(labels: Sequence[str]) -> str:
    counts = Counter(labels)
    top = max(counts.values())
    return min(lab for lab, c in counts.items() if c == top)


def assign_groups(assignments, true_labels, k: int | None = None) -> dict[int, str]:
    """Name each cluster after its most frequent true label (ties: smallest label)."""
    assignments = [int(a) for a in assignments]
    true_labels = list(true_labels)
    if len(assignments) != len(true_labels):
        raise ShapeError(f"{len(assignments)} assignments but {len(true_labels)} labels")
    if not true_labels:
        raise EmptyDataset("no labelled points")
    if k is None:
        k = max(assignments) + 1
    if any(not 0 <= a < k for a in assignments):
        raise ShapeError(f"cluster index outside 0..{k - 1}")
    fallback = _majority(true_labels)
    members: dict[int, list[str]] = {j: [] for j in range(k)}
    for a, lab in zip(assignments, true_labels):
        members[a].append(lab)
    return {j: _majority(labs) if labs else fallback for j, labs in members.items()}


def fit_kmeans_model(features, labels, k: int, restarts: int = 20, seed: int = 0, max_iters: int = 100) -> KMeansModel:
    run = kmeans_restarts(features, k, restarts, seed, max_iters)
    return KMeansModel(run.centroids, assign_groups(run.assignments, labels, k), run.inertia)


def classify(model: KMeansModel, f) -> tuple[str, int]:
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (model.centroids.shape[1],):
        raise ShapeError(f"feature has shape {f.shape}, centroids have dimension {model.centroids.shape[1]}")
    j = int(np.argmin(((model.centroids - f) ** 2).sum(axis=1)))
    return model.cluster_to_group[j], j


def accuracy(model: KMeansModel, features, labels) -> float:
    if len(features) != len(labels):
        raise ShapeError(f"{len(features)} features but {len(labels)} labels")
    if len(features) == 0:
        raise EmptyDataset("no items to score")
    hits = sum(classify(model, f)[0] == lab for f, lab in zip(features, labels))
    return hits / len(labels)


def brute_force_min_sse(points, k: int) -> float:
    """Global minimum within-cluster SSE over every labelling of the points into ``k`` clusters.

    Exponential (k**n); meant as a test oracle for n <= ~12.
    """
    P = _as_points(points)
    n = len(P)
    if n < k:
        raise InsufficientData(f"{n} points cannot form {k} clusters")
    labels = np.array(list(itertools.product(range(k), repeat=n)), dtype=np.int64)
    sq = (P**2).sum(axis=1)
    total = np.zeros(len(labels))
    for c in range(k):
        mask = (labels == c).astype(np.float64)
        cnt = mask.sum(axis=1)
        s = mask @ P
        with np.errstate(invalid="ignore", divide="ignore"):
            spread = np.where(cnt > 0, (s**2).sum(axis=1) / cnt, 0.0)
        total += mask @ sq - spread
    return float(max(total.min(), 0.0))
