"""Full-size run: 450 synthetic pairs, 300 train / 150 test, k=3, 510-20-510 mirrors, 20-20-20 mappers.

    python scripts/reference_run.py --seeds 0 1 2 --report-dir runs/
"""

import argparse
import logging
from pathlib import Path

import numpy as np

from mnn_assoc import archive, harness, ingestion
from mnn_assoc.hierarchy import HierarchyConfig
from mnn_assoc.ingestion import SyntheticSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0])
    ap.add_argument("--noise", type=float, default=SyntheticSpec.noise_stddev)
    ap.add_argument("--report-dir", type=Path)
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)

    rows = []
    for seed in args.seeds:
        pairs = ingestion.generate_synthetic(SyntheticSpec(prototype_seed=seed, noise_stddev=args.noise))
        train, test = ingestion.split(pairs, 300, seed)
        model, report = harness.run_experiment(train, test, HierarchyConfig(seed=seed))
        rows.append(report.eval.metrics())
        print(f"seed {seed}  ({report.timings['train']:.1f}s train)")
        print(harness.format_table(report.eval))
        if args.report_dir:
            args.report_dir.mkdir(parents=True, exist_ok=True)
            report.write(args.report_dir / f"report_seed{seed}.json")
            archive.save_model(model, args.report_dir / f"model_seed{seed}.mnn")
    if len(rows) > 1:
        print("mean over seeds:")
        for key in rows[0]:
            vals = np.array([r[key] for r in rows])
            print(f"  {key:<20}{vals.mean():.4f} +- {vals.std():.4f}")


if __name__ == "__main__":
    main()
