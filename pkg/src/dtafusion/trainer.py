"""Training loop, evaluation, and result-file writers.

MSE regression with the Adam optimizer. Batches are reshuffled every epoch
with the epoch index folded into the seed, so a fixed TrainConfig.seed gives
bitwise-identical loss curves across runs (single-threaded numerics). The
final-layer bias is initialized to the training-target mean, putting the
untrained model's loss at roughly the target variance.
"""

import csv
import json
import logging
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .featurize import iter_batches, pack_batch
from .metrics import compute_report
from .model import Prediction, save_checkpoint

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 300
    batch_size: int = 512
    learning_rate: float = 5e-4
    seed: int = 42
    checkpoint_every: int = 0  # epochs; 0 = only the final checkpoint
    select_best: bool = False  # keep the lowest-train-loss parameters

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")

    def to_dict(self):
        return {
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "learning_rate": self.learning_rate,
            "seed": self.seed,
            "checkpoint_every": self.checkpoint_every,
            "select_best": self.select_best,
        }


@dataclass
class TrainHistory:
    train_mse: list = field(default_factory=list)
    val_reports: list = field(default_factory=list)


def train(model, train_fd, cfg, val_fd=None, checkpoint_dir=None, log_every=10):
    """Train in place; returns (model, TrainHistory).

    Aborts with diagnostics on a non-finite loss. Checkpoints (when a
    directory is given) are written atomically every ``checkpoint_every``
    epochs plus once at the end.
    """
    if not train_fd.examples:
        raise ValueError("empty training set")
    targets = np.array([ex.kiba_score for ex in train_fd.examples])
    model.set_output_bias(float(targets.mean()))

    optimizer = model.make_optimizer(cfg.learning_rate)
    dropout_rng = np.random.default_rng([cfg.seed, 0xD0])
    history = TrainHistory()
    best = (math.inf, None)

    for epoch in range(cfg.epochs):
        order_rng = np.random.default_rng([cfg.seed, epoch])
        sq_sum = 0.0
        seen = 0
        for batch_no, batch in enumerate(iter_batches(train_fd, cfg.batch_size, order_rng)):
            loss, grads = model.loss_and_grads(batch, training=True, rng=dropout_rng)
            if not math.isfinite(loss):
                raise RuntimeError(
                    f"non-finite loss at epoch {epoch}, batch {batch_no}, "
                    f"learning rate {cfg.learning_rate}"
                )
            optimizer.step(grads)
            sq_sum += loss * len(batch.examples)
            seen += len(batch.examples)
        epoch_mse = sq_sum / seen
        history.train_mse.append(epoch_mse)

        if val_fd is not None:
            _, report = evaluate(model, val_fd, batch_size=cfg.batch_size)
            history.val_reports.append(report)

        if cfg.select_best and epoch_mse < best[0]:
            best = (epoch_mse, [(n, p.copy()) for n, p in model.named_params()])

        if epoch % log_every == 0 or epoch == cfg.epochs - 1:
            logger.info("epoch %d train_mse %.6f", epoch, epoch_mse)
        if checkpoint_dir and cfg.checkpoint_every and (epoch + 1) % cfg.checkpoint_every == 0:
            save_checkpoint(model, os.path.join(checkpoint_dir, f"epoch_{epoch + 1}.npz"))

    if cfg.select_best and best[1] is not None:
        for (_, current), (_, stored) in zip(model.named_params(), best[1]):
            current[...] = stored
    if checkpoint_dir:
        os.makedirs(checkpoint_dir, exist_ok=True)
        save_checkpoint(model, os.path.join(checkpoint_dir, "final.npz"))
    return model, history


def evaluate(model, test_fd, batch_size=512):
    """Predictions + MetricsReport on a featurized set (eval mode, no dropout)."""
    if not test_fd.examples:
        raise ValueError("empty evaluation set")
    predictions = []
    for start in range(0, len(test_fd.examples), batch_size):
        chunk = test_fd.examples[start : start + batch_size]
        batch = pack_batch(test_fd, chunk)
        preds = model.predict(batch)
        predictions.extend(
            Prediction(ex.drug_id, ex.protein_id, ex.kiba_score, float(p))
            for ex, p in zip(chunk, preds)
        )
    p = np.array([pr.y_pred for pr in predictions])
    y = np.array([pr.y_true for pr in predictions])
    return predictions, compute_report(p, y)


# -- result files ----------------------------------------------------------------


def save_history_csv(history, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "train_mse"])
        for epoch, value in enumerate(history.train_mse):
            writer.writerow([epoch, f"{value!r}"])


def save_predictions_csv(predictions, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["drug_id", "protein_id", "y_true", "y_pred"])
        for pr in predictions:
            writer.writerow([pr.drug_id, pr.protein_id, f"{pr.y_true!r}", f"{pr.y_pred!r}"])


def load_predictions_csv(path):
    predictions = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            predictions.append(
                Prediction(
                    row["drug_id"], row["protein_id"],
                    float(row["y_true"]), float(row["y_pred"]),
                )
            )
    return predictions


def save_metrics_json(report, path, model_config=None, train_config=None, extra=None):
    """Metrics plus a full config echo, per the results-file contract."""
    payload = report.to_dict()
    if model_config is not None:
        payload["model_config"] = model_config.to_dict()
    if train_config is not None:
        payload["train_config"] = train_config.to_dict()
        payload["epochs"] = train_config.epochs
    if extra:
        payload.update(extra)
    tmp = str(path) + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)
