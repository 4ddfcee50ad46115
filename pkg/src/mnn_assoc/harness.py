"""Experiment orchestration: train/evaluate runs, JSON run reports and the oracle suites."""

from __future__ import annotations

import dataclasses
import json
import time
from pathlib import Path

import numpy as np

from . import clustering, neural
from .hierarchy import (
    REFERENCE_IMAGE_ACCURACY,
    REFERENCE_OVERALL_EFFICIENCY,
    REFERENCE_VOICE_ACCURACY,
    EvalReport,
    HierarchyConfig,
    HierarchyModel,
    evaluate,
    train_full,
)

GRAD_SHAPES = ((5, 3, 5), (10, 4, 10), (20, 20, 20))


@dataclasses.dataclass
class RunReport:
    eval: EvalReport
    config: HierarchyConfig
    seeds: dict
    train_count: int
    test_count: int
    loss_histories: dict = dataclasses.field(default_factory=dict)
    timings: dict = dataclasses.field(default_factory=dict)

    def to_dict(self) -> dict:
        ev = dataclasses.asdict(self.eval)
        return {
            "metrics": self.eval.metrics(),
            "reference": {
                "voice_accuracy": REFERENCE_VOICE_ACCURACY,
                "image_accuracy": REFERENCE_IMAGE_ACCURACY,
                "overall_efficiency": REFERENCE_OVERALL_EFFICIENCY,
            },
            "split": {"train": self.train_count, "test": self.test_count},
            "labels": ev["labels"],
            "confusion": {
                "voice": ev["voice_confusion"],
                "image": ev["image_confusion"],
                "mapping": ev["mapping_confusion"],
            },
            "config": dataclasses.asdict(self.config),
            "seeds": self.seeds,
            "loss_histories": self.loss_histories,
            "timings_s": self.timings,
            "records": ev["records"],
        }

    def write(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


def format_table(report: EvalReport) -> str:
    rows = [
        ("voice_accuracy", report.voice_accuracy, REFERENCE_VOICE_ACCURACY),
        ("image_accuracy", report.image_accuracy, REFERENCE_IMAGE_ACCURACY),
        ("overall_efficiency", report.overall_efficiency, REFERENCE_OVERALL_EFFICIENCY),
    ]
    lines = [f"{'metric':<20}{'measured':>10}{'reference':>11}"]
    lines += [f"{name:<20}{got:>10.4f}{ref:>11.3f}" for name, got, ref in rows]
    return "\n".join(lines)


def run_experiment(train_pairs, test_pairs, config: HierarchyConfig, seeds: dict | None = None):
    """Train on ``train_pairs``, evaluate on ``test_pairs``; returns ``(model, RunReport)``."""
    t0 = time.perf_counter()
    model = train_full(train_pairs, config)
    t1 = time.perf_counter()
    report = evaluate(model, test_pairs)
    t2 = time.perf_counter()
    return model, RunReport(
        report,
        config,
        seeds or {"seed": config.seed},
        len(train_pairs),
        len(test_pairs),
        loss_histories=model.histories,
        timings={"train": t1 - t0, "evaluate": t2 - t1},
    )


def gradient_suite(n_nets: int = 20, seed: int = 0, fd_step: float = 1e-5) -> list[tuple[tuple, float]]:
    """Finite-difference check on ``n_nets`` random tanh nets cycling through GRAD_SHAPES."""
    rng = np.random.default_rng(seed)
    results = []
    for i in range(n_nets):
        shape = GRAD_SHAPES[i % len(GRAD_SHAPES)]
        net = neural.init_network(shape, neural.TANH, int(rng.integers(2**31)))
        net.biases = [rng.uniform(-0.5, 0.5, b.shape) for b in net.biases]
        x = rng.uniform(-1, 1, shape[0])
        t = rng.uniform(-1, 1, shape[-1])
        results.append((shape, neural.check_gradients(net, x, t, fd_step)))
    return results


def random_kmeans_instance(rng: np.random.Generator):
    k = int(rng.integers(1, 4))
    n = int(rng.integers(max(k, 2), 11))
    d = int(rng.integers(1, 4))
    return rng.uniform(-1, 1, (n, d)), k


def kmeans_oracle_suite(instances: int = 50, restarts: int = 20, seed: int = 0) -> list[dict]:
    """Compare best-of-restarts Forgy k-means with exhaustive enumeration on small random problems."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(instances):
        points, k = random_kmeans_instance(rng)
        best = clustering.kmeans_restarts(points, k, restarts, seed=i * restarts)
        optimum = clustering.brute_force_min_sse(points, k)
        out.append({"n": len(points), "d": points.shape[1], "k": k,
                    "kmeans": best.inertia, "optimum": optimum, "gap": best.inertia - optimum})
    return out


def model_summary(model: HierarchyModel) -> str:
    c = model.config
    return (
        f"voice/image mirrors {c.input_dim}-{c.feature_dim}-{c.input_dim}, "
        f"{len(model.mappers)} mappers {c.feature_dim}-{c.mapper_hidden_dim}-{c.feature_dim}, "
        f"groups {', '.join(model.groups)}"
    )
