"""Command line entry point: ``mnn-assoc <subcommand> ...``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path


from . import archive, harness, ingestion
from .errors import MNNError
from .hierarchy import HierarchyConfig, associate, evaluate
from .ingestion import SyntheticSpec
from .neural import TrainConfig


def _default_seed() -> int:
    try:
        return int(os.environ.get("MNN_ASSOC_SEED", "0"))
    except ValueError:
        return 0


def _add_synthetic_args(p: argparse.ArgumentParser):
    p.add_argument("--pairs", type=int, default=450, help="total synthetic pairs, split evenly over groups")
    p.add_argument("--groups", default="face,window,garden", help="comma-separated group labels")
    p.add_argument("--dim", type=int, default=ingestion.INPUT_DIM)
    p.add_argument("--noise", type=float, default=SyntheticSpec.noise_stddev)
    p.add_argument("--separation", type=float, default=SyntheticSpec.prototype_separation)


def _spec_from(args) -> SyntheticSpec:
    groups = tuple(g for g in args.groups.split(",") if g)
    if args.pairs % len(groups):
        raise MNNError(f"--pairs {args.pairs} is not divisible by {len(groups)} groups")
    return SyntheticSpec(groups, args.pairs // len(groups), args.dim, args.seed, args.noise, args.separation)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mnn-assoc", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def cmd(name, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--seed", type=int, default=_default_seed(),
                       help="master seed (default: $MNN_ASSOC_SEED or 0)")
        return p

    p = cmd("gen-data", "write a synthetic paired dataset (manifest + vector files)")
    _add_synthetic_args(p)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--format", choices=("rawvec", "media"), default="rawvec",
                   help="media writes 16-bit WAV voices and P5 PGM images (needs --dim 510)")
    p.add_argument("--train-count", type=int, help="also write train.txt / test.txt split manifests")

    p = cmd("train", "train the two-level model and evaluate it on the held-out split")
    _add_synthetic_args(p)
    p.add_argument("--manifest", type=Path, help="train from a manifest instead of synthetic data")
    p.add_argument("--train-count", type=int, default=300)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--features", type=int, default=20)
    p.add_argument("--mapper-hidden", type=int, default=20)
    p.add_argument("--epochs", type=int, default=500, help="Level I mirror epochs")
    p.add_argument("--mapper-epochs", type=int, default=500)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--route-by", choices=("true-label", "predicted-cluster"), default="true-label")
    p.add_argument("--out", type=Path, default=Path("model.mnn"))
    p.add_argument("--report", type=Path, help="write the JSON run report here")

    p = cmd("eval", "evaluate an archived model on a manifest")
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--manifest", required=True, type=Path)
    p.add_argument("--report", type=Path)

    p = cmd("predict", "associate one voice file with an image")
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--voice", required=True, type=Path, help=".wav or single-line RAWVEC file")
    p.add_argument("--out-prefix", type=Path, default=Path("associated"),
                   help="writes <prefix>.pgm and <prefix>.vec")

    p = cmd("check-grad", "finite-difference check of backprop on random nets")
    p.add_argument("--nets", type=int, default=20)
    p.add_argument("--step", type=float, default=1e-5)
    p.add_argument("--tol", type=float, default=1e-4)

    p = cmd("kmeans-oracle", "compare Forgy k-means against exhaustive enumeration")
    p.add_argument("--instances", type=int, default=50)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--tol", type=float, default=1e-9)
    return parser


def _gen_data(args) -> int:
    spec = _spec_from(args)
    if args.format == "media" and spec.dim != ingestion.INPUT_DIM:
        raise MNNError(f"media format needs --dim {ingestion.INPUT_DIM}")
    pairs = ingestion.generate_synthetic(spec)
    out: Path = args.out
    (out / "voice").mkdir(parents=True, exist_ok=True)
    (out / "image").mkdir(parents=True, exist_ok=True)
    records = {}
    for p in pairs:
        if args.format == "media":
            v, i = f"voice/{p.id}.wav", f"image/{p.id}.pgm"
            ingestion.write_wav(out / v, p.voice)
            ingestion.write_pgm(out / i, ingestion.vector_to_image(p.image))
        else:
            v, i = f"voice/{p.id}.vec", f"image/{p.id}.vec"
            ingestion.write_rawvec(out / v, p.voice)
            ingestion.write_rawvec(out / i, p.image)
        records[p.id] = (v, i, p.group)
    ingestion.write_manifest(out / "manifest.txt", list(records.values()))
    if args.train_count:
        train, test = ingestion.split(pairs, args.train_count, args.seed)
        ingestion.write_manifest(out / "train.txt", [records[p.id] for p in train])
        ingestion.write_manifest(out / "test.txt", [records[p.id] for p in test])
    print(f"wrote {len(pairs)} pairs to {out}")
    return 0


def _train(args) -> int:
    if args.manifest:
        pairs = ingestion.read_manifest(args.manifest, args.dim)
    else:
        pairs = ingestion.generate_synthetic(_spec_from(args))
    train, test = ingestion.split(pairs, args.train_count, args.seed)
    config = HierarchyConfig(
        k_groups=args.k,
        input_dim=args.dim,
        feature_dim=args.features,
        mapper_hidden_dim=args.mapper_hidden,
        level1_train=TrainConfig(args.lr, args.epochs, 0, args.momentum),
        level2_train=TrainConfig(args.lr, args.mapper_epochs, 0, args.momentum),
        route_by=args.route_by,
        kmeans_restarts=args.restarts,
        seed=args.seed,
    )
    model, report = harness.run_experiment(train, test, config, {"seed": args.seed, "split_seed": args.seed})
    archive.save_model(model, args.out)
    if args.report:
        report.write(args.report)
    print(f"trained on {len(train)} pairs, evaluated on {len(test)}; archive {args.out}")
    print(harness.format_table(report.eval))
    return 0


def _eval(args) -> int:
    model = archive.load_model(args.model)
    pairs = ingestion.read_manifest(args.manifest, model.config.input_dim)
    ev = evaluate(model, pairs)
    if args.report:
        harness.RunReport(ev, model.config, {"seed": model.config.seed}, 0, len(pairs)).write(args.report)
    print(f"evaluated {len(pairs)} pairs")
    print(harness.format_table(ev))
    return 0


def _predict(args) -> int:
    model = archive.load_model(args.model)
    voice = ingestion.load_vector(args.voice, "voice", model.config.input_dim)
    a = associate(model, voice)
    prefix: Path = args.out_prefix
    prefix.parent.mkdir(parents=True, exist_ok=True)
    ingestion.write_rawvec(prefix.with_suffix(".vec"), a.image)
    if a.image.size == ingestion.INPUT_DIM:
        ingestion.write_pgm(prefix.with_suffix(".pgm"), ingestion.vector_to_image(a.image))
    print(a.group)
    return 0


def _check_grad(args) -> int:
    results = harness.gradient_suite(args.nets, args.seed, args.step)
    worst = max(r for _, r in results)
    print(f"max relative discrepancy over {len(results)} nets: {worst:.3e}")
    return 0 if worst < args.tol else 1


def _kmeans_oracle(args) -> int:
    results = harness.kmeans_oracle_suite(args.instances, args.restarts, args.seed)
    worst = max(r["gap"] for r in results)
    misses = sum(r["gap"] > args.tol for r in results)
    print(f"max SSE gap over {len(results)} instances: {worst:.3e} ({misses} above {args.tol:g})")
    return 0 if misses == 0 else 1


COMMANDS = {
    "gen-data": _gen_data,
    "train": _train,
    "eval": _eval,
    "predict": _predict,
    "check-grad": _check_grad,
    "kmeans-oracle": _kmeans_oracle,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (MNNError, OSError) as exc:
        print(f"mnn-assoc: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
