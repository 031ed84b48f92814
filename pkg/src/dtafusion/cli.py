"""Command-line surface.

Subcommands: fetch-structures, featurize, train, evaluate, ablate, analyze,
export-bundle. Every run echoes the full model/train/split configuration into
its output files, so results are reproducible from the artifacts alone.

Config files are YAML with nested sections (see configs/default.yaml):

    model: {active_branches, gin_hidden, ...}   # ModelConfig fields
    train: {epochs, batch_size, ...}            # TrainConfig fields
    split: {seed, test_fraction}
    data:  {dataset_dir, structure_dir, cache_dir, contact_threshold}
"""

import argparse
import json
import logging
import os
import sys

import yaml

from .analysis import (
    DRUG_PROPERTIES,
    emit_plots,
    error_by_entity,
    error_vs_property,
    run_ablation_matrix,
    save_ablation_csv,
)
from .dataset import (
    SplitSpec,
    fetch_structures,
    find_structure_file,
    load_kiba,
    split_dataset,
    export_curated_bundle,
)
from .featurize import (
    FEATURIZATION_VERSION,
    FeaturizedDataset,
    featurize_drug,
    featurize_protein,
    load_entity_features,
    save_entity_features,
)
from .model import Model, ModelConfig, load_checkpoint, save_checkpoint
from .smiles import parse_smiles
from .trainer import (
    TrainConfig,
    evaluate,
    load_predictions_csv,
    save_history_csv,
    save_metrics_json,
    save_predictions_csv,
    train,
)

logger = logging.getLogger("dtafusion")


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return yaml.safe_load(fh) or {}


def _configs_from_file(cfg, seed_override=None):
    model_cfg = ModelConfig(**cfg.get("model", {}))
    train_cfg = TrainConfig(**cfg.get("train", {}))
    split_cfg = SplitSpec(**cfg.get("split", {}))
    if seed_override is not None:
        model_cfg = ModelConfig(**{**model_cfg.to_dict(), "seed": seed_override})
        train_cfg = TrainConfig(**{**train_cfg.to_dict(), "seed": seed_override})
        split_cfg = SplitSpec(seed=seed_override, test_fraction=split_cfg.test_fraction)
    return model_cfg, train_cfg, split_cfg


def _dataset_files(dataset_dir):
    paths = {name: os.path.join(dataset_dir, f"{name}.tsv")
             for name in ("affinities", "drugs", "proteins")}
    missing = [p for p in paths.values() if not os.path.exists(p)]
    if missing:
        raise FileNotFoundError(f"dataset dir {dataset_dir} is missing: {missing}")
    return paths


def _load_dataset(dataset_dir):
    paths = _dataset_files(dataset_dir)
    return load_kiba(paths["affinities"], paths["drugs"], paths["proteins"])


def _structure_search_dirs(dataset_dir, structure_dir=None):
    dirs = []
    if structure_dir:
        dirs.append(structure_dir)
    dirs.append(os.path.join(dataset_dir, "structures"))
    dirs.append(dataset_dir)
    return [d for d in dirs if os.path.isdir(d)]


def _find_structure(dirs, accession, protein_id):
    for d in dirs:
        path = find_structure_file(d, accession)
        if path:
            return path
    raise FileNotFoundError(
        f"no structure file for protein {protein_id} (accession {accession}) "
        f"in {dirs}; run fetch-structures first"
    )


def load_featurized(dataset_dir, structure_dir=None, cache_dir=None,
                    contact_threshold=8.0):
    """Featurized dataset for a dataset directory, via the cache when possible."""
    ds = _load_dataset(dataset_dir)
    dirs = _structure_search_dirs(dataset_dir, structure_dir)
    proteins = {}
    for rec in ds.proteins:
        feats = None
        if cache_dir:
            try:
                feats = load_entity_features(cache_dir, "proteins", rec.protein_id)
            except FileNotFoundError:
                feats = None
        if feats is None:
            pdb_path = _find_structure(dirs, rec.uniprot_accession, rec.protein_id)
            with open(pdb_path, encoding="utf-8") as fh:
                feats = featurize_protein(rec.sequence, fh.read(), contact_threshold)
            if cache_dir:
                save_entity_features(cache_dir, "proteins", rec.protein_id, feats)
        proteins[rec.protein_id] = feats

    drugs = {}
    molecules = {}
    for rec in ds.drugs:
        molecules[rec.drug_id] = parse_smiles(rec.smiles)
        feats = None
        if cache_dir:
            try:
                feats = load_entity_features(cache_dir, "drugs", rec.drug_id)
            except FileNotFoundError:
                feats = None
        if feats is None:
            feats, _mol = featurize_drug(rec.smiles)
            if cache_dir:
                save_entity_features(cache_dir, "drugs", rec.drug_id, feats)
        drugs[rec.drug_id] = feats
    return ds, FeaturizedDataset(
        examples=list(ds.examples), proteins=proteins, drugs=drugs, molecules=molecules
    )


# -- subcommands -----------------------------------------------------------------


def cmd_fetch_structures(args):
    ds_proteins = []
    with open(args.proteins, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        acc_col = header.index("uniprot")
        id_col = header.index("protein_id")
        for line in fh:
            fields = line.rstrip("\n").split("\t")
            if len(fields) > max(acc_col, id_col):
                ds_proteins.append((fields[id_col], fields[acc_col]))
    accessions = [acc for _pid, acc in ds_proteins]
    results = fetch_structures(accessions, args.cache, workers=args.threads)
    for acc, path in results.items():
        print(f"{acc}\t{path}")
    print(f"fetched/cached {len(results)} structures into {args.cache}")
    return 0


def cmd_featurize(args):
    _ds, fd = load_featurized(
        args.dataset, args.structures, cache_dir=args.cache,
        contact_threshold=args.contact_threshold,
    )
    print(
        f"featurized {len(fd.proteins)} proteins and {len(fd.drugs)} drugs "
        f"into {args.cache} (version {FEATURIZATION_VERSION})"
    )
    return 0


def _prepare_run(args):
    cfg = load_config(args.config)
    model_cfg, train_cfg, split_cfg = _configs_from_file(cfg, args.seed)
    data = cfg.get("data", {})
    dataset_dir = args.dataset or data.get("dataset_dir")
    if not dataset_dir:
        raise SystemExit("no dataset directory (flag --dataset or config data.dataset_dir)")
    ds, fd = load_featurized(
        dataset_dir,
        args.structures or data.get("structure_dir"),
        cache_dir=args.cache or data.get("cache_dir"),
        contact_threshold=data.get("contact_threshold", 8.0),
    )
    train_ds, test_ds = split_dataset(ds, split_cfg)
    return model_cfg, train_cfg, split_cfg, fd, train_ds, test_ds


def cmd_train(args):
    model_cfg, train_cfg, split_cfg, fd, train_ds, test_ds = _prepare_run(args)
    train_fd = fd.subset(train_ds.examples)
    test_fd = fd.subset(test_ds.examples)
    os.makedirs(args.out, exist_ok=True)

    model = Model(model_cfg)
    logger.info(
        "training %s branches, %d parameters, %d train / %d test examples",
        model_cfg.active_branches, model.parameter_count(),
        len(train_fd.examples), len(test_fd.examples),
    )
    model, history = train(
        model, train_fd, train_cfg,
        checkpoint_dir=os.path.join(args.out, "checkpoints")
        if train_cfg.checkpoint_every else None,
    )
    save_checkpoint(model, os.path.join(args.out, "checkpoint.npz"))
    save_history_csv(history, os.path.join(args.out, "history.csv"))
    predictions, report = evaluate(model, test_fd, batch_size=train_cfg.batch_size)
    save_predictions_csv(predictions, os.path.join(args.out, "predictions.csv"))
    save_metrics_json(
        report, os.path.join(args.out, "metrics.json"),
        model_config=model_cfg, train_config=train_cfg,
        extra={
            "split": {"seed": split_cfg.seed, "test_fraction": split_cfg.test_fraction},
            "featurization_version": FEATURIZATION_VERSION,
            "parameter_count": model.parameter_count(),
        },
    )
    print(f"test metrics: {report.to_json()}")
    return 0


def cmd_evaluate(args):
    model = load_checkpoint(args.checkpoint)
    _ds, fd = load_featurized(args.test, args.structures, cache_dir=args.cache)
    os.makedirs(args.out, exist_ok=True)
    predictions, report = evaluate(model, fd)
    save_predictions_csv(predictions, os.path.join(args.out, "predictions.csv"))
    save_metrics_json(
        report, os.path.join(args.out, "metrics.json"), model_config=model.config,
        extra={"featurization_version": FEATURIZATION_VERSION},
    )
    print(f"metrics: {report.to_json()}")
    return 0


def cmd_ablate(args):
    model_cfg, train_cfg, split_cfg, fd, train_ds, test_ds = _prepare_run(args)
    train_fd = fd.subset(train_ds.examples)
    test_fd = fd.subset(test_ds.examples)
    os.makedirs(args.out, exist_ok=True)
    rows = run_ablation_matrix(
        model_cfg, train_cfg, train_fd, test_fd,
        out_csv=os.path.join(args.out, "ablation.csv"),
    )
    for row in rows:
        label = "+".join(row["removed"]) or "-"
        if row["metrics"] is None:
            print(f"removed={label}: FAILED ({row['error']})")
        else:
            m = row["metrics"]
            print(
                f"removed={label}: ci={m.ci:.4f} rmse={m.rmse:.4f} mse={m.mse:.4f} "
                f"spearman={m.spearman:.4f} pearson={m.pearson:.4f}"
            )
    with open(os.path.join(args.out, "ablation_config.json"), "w", encoding="utf-8") as fh:
        json.dump(
            {
                "model_config": model_cfg.to_dict(),
                "train_config": train_cfg.to_dict(),
                "split": {"seed": split_cfg.seed, "test_fraction": split_cfg.test_fraction},
            },
            fh, indent=2, sort_keys=True,
        )
        fh.write("\n")
    return 0


def cmd_analyze(args):
    predictions = load_predictions_csv(args.predictions)
    breakdowns = [
        error_by_entity(predictions, "drug", squared=args.squared),
        error_by_entity(predictions, "protein", squared=args.squared),
    ]
    scatters = []
    if args.dataset:
        ds = _load_dataset(args.dataset)
        molecules = {d.drug_id: parse_smiles(d.smiles) for d in ds.drugs}
        for prop in DRUG_PROPERTIES:
            scatters.append(
                error_vs_property(predictions, molecules, prop, squared=args.squared)
            )
    images = emit_plots(breakdowns, scatters, args.out)
    for image in images:
        print(image)
    return 0


def cmd_export_bundle(args):
    ds = _load_dataset(args.dataset)
    manifest = export_curated_bundle(ds, args.structures, args.out)
    print(manifest)
    return 0


def main(argv=None):
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = argparse.ArgumentParser(
        prog="dtafusion",
        description="drug-target affinity pipeline: structure graphs + fingerprints",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="override every configured seed")
    common.add_argument("--threads", type=int, default=4,
                        help="worker threads for structure downloads")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fetch-structures", parents=[common],
                       help="download AlphaFold-DB structures for a proteins.tsv")
    p.add_argument("--proteins", required=True)
    p.add_argument("--cache", required=True)
    p.set_defaults(func=cmd_fetch_structures)

    p = sub.add_parser("featurize", parents=[common],
                       help="precompute features into a cache directory")
    p.add_argument("--dataset", required=True)
    p.add_argument("--cache", required=True)
    p.add_argument("--structures", default=None)
    p.add_argument("--contact-threshold", type=float, default=8.0)
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("train", parents=[common], help="train and evaluate one model")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dataset", default=None)
    p.add_argument("--structures", default=None)
    p.add_argument("--cache", default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", parents=[common],
                       help="evaluate a checkpoint on a dataset directory")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--structures", default=None)
    p.add_argument("--cache", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ablate", parents=[common], help="run the 7-row branch ablation matrix")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dataset", default=None)
    p.add_argument("--structures", default=None)
    p.add_argument("--cache", default=None)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("analyze", parents=[common],
                       help="error breakdowns and property scatters from predictions")
    p.add_argument("--predictions", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dataset", default=None,
                   help="dataset dir (enables drug-property scatters)")
    p.add_argument("--squared", action="store_true",
                   help="attribute squared error instead of absolute error")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("export-bundle", parents=[common],
                       help="export the curated dataset + structures + manifest")
    p.add_argument("--dataset", required=True)
    p.add_argument("--structures", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_bundle)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
