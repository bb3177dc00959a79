"""Training loop and evaluation report."""

from __future__ import annotations

import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, EmptyTestSetError, NonFiniteLossError, NumericError
from .metrics import RocCurve, confusion_matrix, roc_points
from .model import ModelParams, forward, loss_and_grads
from .optim import adam_init, adam_step
from .preprocess import ClassWeights, EncodedDataset


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 200
    batch_size: int = 32
    learning_rate: float = 1e-3
    seed: int = 0
    shuffle_each_epoch: bool = True
    log_every: int = 0  # epochs between stderr progress lines; 0 = silent

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")


@dataclass
class EvalReport:
    accuracy: float
    per_class: list[RocCurve]
    confusion: np.ndarray
    n_test: int

    def mean_auc(self) -> float:
        return float(np.mean([c.auc for c in self.per_class]))

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "n_test": self.n_test,
            "mean_auc": self.mean_auc(),
            "confusion": self.confusion.tolist(),
            "roc": [
                {
                    "stage": c.class_id,
                    "auc": c.auc,
                    "points": [[x, y] for x, y in c.points],
                }
                for c in self.per_class
            ],
        }


def align_class_weights(weights: ClassWeights, ds: EncodedDataset) -> np.ndarray:
    """Order stage-keyed weights by the dataset's contiguous class ids."""
    if set(weights.weights) != set(ds.class_map):
        raise ConfigError(
            f"class weights cover stages {sorted(weights.weights)}, "
            f"dataset has {sorted(ds.class_map)}"
        )
    return np.array(
        [weights.weights[ds.stage_for_class(cid)] for cid in range(ds.n_classes)]
    )


def train(
    train_ds: EncodedDataset,
    params: ModelParams,
    weights: ClassWeights,
    cfg: TrainConfig,
) -> tuple[ModelParams, list[float]]:
    """Optimize params on the training set; returns per-epoch mean loss.

    Deterministic for a fixed seed and dataset: batch order comes from a
    dedicated generator, and the moment updates run in a fixed parameter
    order. Aborts with NonFiniteLossError if the loss leaves the reals.
    """
    weight_vec = align_class_weights(weights, train_ds)
    params.class_weights = weight_vec
    state = adam_init(params)
    rng = np.random.default_rng(cfg.seed)
    n = len(train_ds)
    history: list[float] = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(n) if cfg.shuffle_each_epoch else np.arange(n)
        losses = []
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            batch = (train_ds.sequences[idx], train_ds.labels[idx])
            try:
                loss, grads = loss_and_grads(batch, params)
            except NumericError as exc:
                raise NonFiniteLossError(epoch) from exc
            if not np.isfinite(loss):
                raise NonFiniteLossError(epoch)
            adam_step(params, grads, state, cfg.learning_rate)
            losses.append(loss)
        history.append(float(np.mean(losses)))
        if cfg.log_every and (epoch + 1) % cfg.log_every == 0:
            print(
                f"epoch {epoch + 1}/{cfg.epochs} mean loss {history[-1]:.6f}",
                file=sys.stderr,
            )
    return params, history


def predict_probabilities(
    ds: EncodedDataset, params: ModelParams, threads: int = 1
) -> np.ndarray:
    """Inference probabilities per patient, (n, K).

    Each patient is evaluated independently, so the result is identical
    for any row order and for any thread count.
    """
    n = len(ds)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda i: forward(ds.sequences[i], params), range(n)))
    else:
        rows = [forward(ds.sequences[i], params) for i in range(n)]
    return np.vstack(rows)


def evaluate(test_ds: EncodedDataset, params: ModelParams, threads: int = 1) -> EvalReport:
    """Inference-mode evaluation: accuracy, confusion matrix, and a
    one-vs-rest ROC curve per stage using that stage's predicted
    probability as the score."""
    if len(test_ds) == 0:
        raise EmptyTestSetError("test set is empty")
    probs = predict_probabilities(test_ds, params, threads=threads)
    predicted = probs.argmax(axis=1)
    labels = test_ds.labels
    accuracy = float((predicted == labels).mean())
    confusion = confusion_matrix(labels, predicted, test_ds.n_classes)
    curves = []
    for cid in range(test_ds.n_classes):
        curves.append(
            roc_points(
                probs[:, cid],
                labels == cid,
                class_id=test_ds.stage_for_class(cid),
            )
        )
    return EvalReport(
        accuracy=accuracy,
        per_class=curves,
        confusion=confusion,
        n_test=len(test_ds),
    )
