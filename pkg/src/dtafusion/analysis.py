"""Error attribution and the branch-ablation harness.

Error attribution groups per-example absolute errors by drug or protein
(sum-preserving: row totals add up to the overall absolute error exactly) and
relates per-drug error totals to molecular size properties. Squared error is
available behind a flag, matching the two labels in circulation, with
absolute error as the default.

The ablation harness trains the seven branch configurations (full model plus
six removals) on an identical split/seed and emits a CSV with the CI, RMSE,
MSE, Spearman, and Pearson columns.
"""

import csv
import logging
import os
from dataclasses import dataclass, replace

import numpy as np

from . import metrics as metrics_mod
from .model import Model, make_ablation_config
from .trainer import evaluate, train

logger = logging.getLogger(__name__)

ABLATION_ROWS = (
    (),
    ("P_G",),
    ("D_G",),
    ("P_F",),
    ("D_F",),
    ("D_F", "P_F"),
    ("D_F", "P_G"),
)

DRUG_PROPERTIES = ("atom_count", "aromatic_atom_count", "bond_count")


@dataclass(frozen=True)
class ErrorBreakdown:
    entity_kind: str  # "drug" | "protein"
    rows: list  # (entity_id, total_abs_error, example_count), sorted desc


@dataclass(frozen=True)
class PropertyScatter:
    property: str
    points: list  # (drug_id, property_value, total_abs_error)
    pearson_r: float | None  # None when undefined (zero variance)


def error_by_entity(predictions, kind, squared=False):
    """Groups |y_pred - y_true| (or squared error) by drug or protein."""
    if kind not in ("drug", "protein"):
        raise ValueError(f"kind must be 'drug' or 'protein', got {kind!r}")
    if not predictions:
        raise ValueError("empty prediction list")
    totals = {}
    counts = {}
    for pr in predictions:
        key = pr.drug_id if kind == "drug" else pr.protein_id
        err = abs(pr.y_pred - pr.y_true)
        if squared:
            err = err * err
        totals[key] = totals.get(key, 0.0) + err
        counts[key] = counts.get(key, 0) + 1
    rows = sorted(
        ((k, totals[k], counts[k]) for k in totals),
        key=lambda r: (-r[1], r[0]),
    )
    return ErrorBreakdown(entity_kind=kind, rows=rows)


def _property_value(mol, prop):
    if prop == "atom_count":
        return mol.num_atoms
    if prop == "aromatic_atom_count":
        return mol.aromatic_atom_count
    if prop == "bond_count":
        return mol.num_bonds
    raise ValueError(f"unknown property {prop!r}")


def error_vs_property(predictions, molecules, prop, squared=False):
    """Per-drug error totals against a molecular size property."""
    breakdown = error_by_entity(predictions, "drug", squared=squared)
    points = []
    for drug_id, total, _count in breakdown.rows:
        if drug_id not in molecules:
            raise KeyError(f"no molecule for drug {drug_id}")
        points.append((drug_id, _property_value(molecules[drug_id], prop), total))
    points.sort(key=lambda p: p[0])
    values = np.array([p[1] for p in points], dtype=float)
    errors = np.array([p[2] for p in points], dtype=float)
    try:
        r = metrics_mod.pearson(values, errors)
    except ValueError:
        r = None
    return PropertyScatter(property=prop, points=points, pearson_r=r)


def run_ablation_matrix(base_config, train_config, train_fd, test_fd, out_csv=None):
    """Seven configurations of removed branches, shared seed and split.

    Returns rows of {removed, metrics, train_mse, error}; a failing run
    aborts its row (recording the error), not the matrix.
    """
    rows = []
    for removed in ABLATION_ROWS:
        row = {"removed": removed, "metrics": None, "train_mse": None, "error": None}
        try:
            config = make_ablation_config(base_config, removed)
            model = Model(config)
            model, history = train(model, train_fd, train_config)
            _, train_report = evaluate(model, train_fd, batch_size=train_config.batch_size)
            row["train_mse"] = train_report.mse
            _, report = evaluate(model, test_fd, batch_size=train_config.batch_size)
            row["metrics"] = report
        except Exception as exc:  # pragma: no cover - exercised via fault test
            logger.error("ablation row removed=%s failed: %s", removed, exc)
            row["error"] = str(exc)
        rows.append(row)
    if out_csv:
        save_ablation_csv(rows, out_csv)
    return rows


def save_ablation_csv(rows, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["removed", "ci", "rmse", "mse", "spearman", "pearson", "train_mse"])
        for row in rows:
            label = "+".join(row["removed"]) if row["removed"] else "-"
            if row["metrics"] is None:
                writer.writerow([label, "error", "", "", "", "", row["error"]])
                continue
            m = row["metrics"]
            writer.writerow(
                [label, f"{m.ci!r}", f"{m.rmse!r}", f"{m.mse!r}",
                 f"{m.spearman!r}", f"{m.pearson!r}", f"{row['train_mse']!r}"]
            )


# -- plots ---------------------------------------------------------------------


def _write_breakdown_csv(breakdown, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["entity_id", "total_abs_error", "example_count"])
        for entity_id, total, count in breakdown.rows:
            writer.writerow([entity_id, f"{total!r}", count])


def _write_scatter_csv(scatter, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["drug_id", "property_value", "total_abs_error"])
        for drug_id, value, total in scatter.points:
            writer.writerow([drug_id, value, f"{total!r}"])


def emit_plots(breakdowns, scatters, out_dir, top_n=50):
    """One image + CSV twin per breakdown/scatter; deterministic filenames.

    Returns the list of image paths.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    os.makedirs(out_dir, exist_ok=True)
    images = []
    for breakdown in breakdowns:
        stem = f"error_by_{breakdown.entity_kind}"
        _write_breakdown_csv(breakdown, os.path.join(out_dir, stem + ".csv"))
        head = breakdown.rows[:top_n]
        fig, ax = plt.subplots(figsize=(10, 4))
        ax.bar(range(len(head)), [r[1] for r in head])
        ax.set_xticks(range(len(head)))
        ax.set_xticklabels([r[0] for r in head], rotation=90, fontsize=6)
        ax.set_ylabel("total absolute error")
        ax.set_title(f"error contribution by {breakdown.entity_kind}")
        fig.tight_layout()
        image = os.path.join(out_dir, stem + ".png")
        fig.savefig(image, dpi=150)
        plt.close(fig)
        images.append(image)

    for scatter in scatters:
        stem = f"error_vs_{scatter.property}"
        _write_scatter_csv(scatter, os.path.join(out_dir, stem + ".csv"))
        fig, ax = plt.subplots(figsize=(5, 4))
        ax.scatter([p[1] for p in scatter.points], [p[2] for p in scatter.points], s=12)
        ax.set_xlabel(scatter.property.replace("_", " "))
        ax.set_ylabel("total absolute error")
        label = "undefined" if scatter.pearson_r is None else f"{scatter.pearson_r:.3f}"
        ax.set_title(f"pearson r = {label}")
        fig.tight_layout()
        image = os.path.join(out_dir, stem + ".png")
        fig.savefig(image, dpi=150)
        plt.close(fig)
        images.append(image)
    return images
