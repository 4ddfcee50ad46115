"""How Level I accuracy and overall efficiency degrade as per-sample noise grows.

Uses a reduced training budget so the whole sweep runs in a few minutes.
"""

import argparse

from mnn_assoc import harness, ingestion
from mnn_assoc.hierarchy import HierarchyConfig
from mnn_assoc.ingestion import SyntheticSpec
from mnn_assoc.neural import TrainConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--noise", type=float, nargs="+", default=[0.5, 1.0, 2.0, 2.5, 3.0, 4.0])
    ap.add_argument("--separation", type=float, default=5.0)
    ap.add_argument("--epochs", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cfg = HierarchyConfig(seed=args.seed, level1_train=TrainConfig(epochs=args.epochs),
                          level2_train=TrainConfig(epochs=args.epochs))
    print(f"{'noise':>6}{'voice':>9}{'image':>9}{'overall':>9}")
    for noise in args.noise:
        spec = SyntheticSpec(prototype_seed=args.seed, noise_stddev=noise, prototype_separation=args.separation)
        train, test = ingestion.split(ingestion.generate_synthetic(spec), 300, args.seed)
        _, report = harness.run_experiment(train, test, cfg)
        m = report.eval.metrics()
        print(f"{noise:>6.2f}{m['voice_accuracy']:>9.3f}{m['image_accuracy']:>9.3f}{m['overall_efficiency']:>9.3f}")


if __name__ == "__main__":
    main()
