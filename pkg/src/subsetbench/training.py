"""Training schedules, model fitting, and fixed-test-set evaluation.

Gradient models train with Adam on shuffled minibatches of 200 (a subset
smaller than one batch yields a single partial batch per epoch). Training
runs at least min_epochs and stops at the first epoch whose full-subset
training accuracy reaches the target, else at max_epochs. The learning
rate is a pure function of the epoch number: 1e-3 on epoch 1, 1e-4 from
epoch 2, 1e-5 from epoch 300. Classical models fit in one shot.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .idx import N_CLASSES, LabeledDataset
from .models import (
    ModelConfig,
    forest_fit,
    forest_predict,
    gnb_fit,
    gnb_predict,
    knn_predict,
    mlp_backward,
    mlp_forward,
    mlp_init,
    mlp_predict,
    adam_init,
    adam_step,
)

GRADIENT_KINDS = ("mlp",)
CLASSICAL_KINDS = ("gnb", "knn", "rforest")


class TrainingDiverged(RuntimeError):
    """Raised when a gradient run produces a non-finite loss."""


@dataclass(frozen=True)
class TrainingSchedule:
    batch_size: int = 200
    min_epochs: int = 50
    target_train_accuracy: float = 0.99
    max_epochs: int = 500
    lr_first_epoch: float = 1e-3
    lr_second_epoch: float = 1e-4
    lr_late: float = 1e-5
    late_epoch: int = 300

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not 1 <= self.min_epochs <= self.max_epochs:
            raise ValueError("need 1 <= min_epochs <= max_epochs")
        if not 2 <= self.late_epoch:
            raise ValueError("late_epoch must be >= 2")


def learning_rate_for_epoch(schedule: TrainingSchedule, epoch: int) -> float:
    """Learning rate for a 1-based epoch number."""
    if epoch < 1:
        raise ValueError("epochs are 1-based")
    if epoch == 1:
        return schedule.lr_first_epoch
    if epoch >= schedule.late_epoch:
        return schedule.lr_late
    return schedule.lr_second_epoch


@dataclass
class TrainHistory:
    epochs: list = field(default_factory=list)  # (epoch, lr, mean_loss, train_acc)


@dataclass
class FittedModel:
    config: ModelConfig
    params: object
    epochs_run: int
    final_train_accuracy: float
    history: TrainHistory

    def predict(self, images) -> np.ndarray:
        kind = self.config.kind
        if kind == "gnb":
            return gnb_predict(self.params, images)
        if kind == "knn":
            train_images, train_labels = self.params
            return knn_predict(train_images, train_labels, images, self.config.knn_k)
        if kind == "rforest":
            return forest_predict(self.params, images)
        return mlp_predict(self.params, images)


def train_gradient_model(
    config: ModelConfig, subset: LabeledDataset, schedule: TrainingSchedule, seed: int
) -> FittedModel:
    """Adam training loop with per-epoch seeded shuffling.

    The stop criterion is evaluated on the full subset after every epoch
    but can only trigger from min_epochs onward. Non-finite loss raises
    TrainingDiverged.
    """
    if config.kind not in GRADIENT_KINDS:
        raise ValueError(f"{config.kind} is not gradient-trainable")
    X, y = subset.images, subset.labels
    rng = np.random.default_rng(seed)
    params = mlp_init(config.mlp_depth, config.mlp_width, seed=int(rng.integers(2**63)))
    state = adam_init(params)
    history = TrainHistory()
    epochs_run = 0
    train_acc = 0.0
    for epoch in range(1, schedule.max_epochs + 1):
        lr = learning_rate_for_epoch(schedule, epoch)
        order = rng.permutation(len(X))
        losses = []
        for start in range(0, len(order), schedule.batch_size):
            batch = order[start : start + schedule.batch_size]
            grads, loss = mlp_backward(params, X[batch], y[batch])
            if not np.isfinite(loss):
                raise TrainingDiverged(f"non-finite loss at epoch {epoch}")
            adam_step(params, state, grads, lr)
            losses.append(loss)
        train_acc = float(np.mean(mlp_predict(params, X) == y))
        history.epochs.append((epoch, lr, float(np.mean(losses)), train_acc))
        epochs_run = epoch
        if epoch >= schedule.min_epochs and train_acc >= schedule.target_train_accuracy:
            break
    return FittedModel(
        config=config,
        params=params,
        epochs_run=epochs_run,
        final_train_accuracy=train_acc,
        history=history,
    )


def fit_classical(config: ModelConfig, subset: LabeledDataset, seed: int) -> FittedModel:
    """One-shot fit for gnb / knn / rforest; no schedule applies."""
    if config.kind not in CLASSICAL_KINDS:
        raise ValueError(f"{config.kind} is not a classical kind")
    if config.kind == "gnb":
        params = gnb_fit(subset)
    elif config.kind == "knn":
        params = (subset.images, subset.labels)
    else:
        params = forest_fit(subset.images, subset.labels, config.forest_trees, seed)
    preds = None
    if config.kind == "rforest":
        preds = forest_predict(params, subset.images)
    elif config.kind == "gnb":
        preds = gnb_predict(params, subset.images)
    if preds is not None:
        train_acc = float(np.mean(preds == subset.labels))
    else:
        train_acc = 1.0  # 1-NN memorizes; k>1 train accuracy is not consumed anywhere
    return FittedModel(
        config=config,
        params=params,
        epochs_run=0,
        final_train_accuracy=train_acc,
        history=TrainHistory(),
    )


def fit_model(config: ModelConfig, subset: LabeledDataset, schedule: TrainingSchedule, seed: int) -> FittedModel:
    if config.kind in GRADIENT_KINDS:
        return train_gradient_model(config, subset, schedule, seed)
    return fit_classical(config, subset, seed)


@dataclass
class PerformanceRecord:
    """One (model, subset) result row."""

    subset_id: str
    strategy: str
    direction: str
    n: int
    m: int
    replicate: int
    model: str
    seed: int
    epochs: int
    train_acc: float
    test_acc: float
    test_err: float
    class_acc: np.ndarray  # (10,)
    wall_ms: float


def evaluate(predict_fn, test: LabeledDataset):
    """Accuracy, error = 1 - accuracy, and per-class accuracies on the test set."""
    preds = predict_fn(test.images)
    correct = preds == test.labels
    accuracy = float(np.mean(correct))
    class_acc = np.empty(N_CLASSES)
    for k in range(N_CLASSES):
        positions = test.class_index[k]
        class_acc[k] = float(np.mean(correct[positions])) if len(positions) else np.nan
    return accuracy, 1.0 - accuracy, class_acc


def run_task(spec, parent: LabeledDataset, test: LabeledDataset, config: ModelConfig,
             schedule: TrainingSchedule, seed: int) -> PerformanceRecord:
    """Materialize the subset, fit one model, and evaluate on the test set."""
    started = time.perf_counter()
    subset = parent.subset(spec.all_indices())
    fitted = fit_model(config, subset, schedule, seed)
    accuracy, error, class_acc = evaluate(fitted.predict, test)
    wall_ms = (time.perf_counter() - started) * 1000.0
    return PerformanceRecord(
        subset_id=spec.subset_id,
        strategy=spec.strategy,
        direction=spec.direction,
        n=spec.n,
        m=spec.m,
        replicate=spec.replicate,
        model=config.model_id,
        seed=seed,
        epochs=fitted.epochs_run,
        train_acc=fitted.final_train_accuracy,
        test_acc=accuracy,
        test_err=error,
        class_acc=class_acc,
        wall_ms=wall_ms,
    )
