"""Mini-batch training loop with dev-set model selection.

One call to :func:`train` is strictly sequential and fully determined by
its config seed: parameter init, per-epoch batch order and every update
follow from it.  Independent runs share no mutable state and can execute
concurrently.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import NEGATIVE_LABEL, Dataset, SamplerKind, UniformSampler, batches
from .losses import Adaptive, LossStrategy, Vanilla, compute_loss, strategy_label
from .metrics import confusion_from_predictions, f_beta, precision, recall
from .model import Gradients, ModelParams, ModelSpec, backward, forward, init_params, predict

__all__ = [
    "SGD",
    "Adam",
    "Optimizer",
    "TrainConfig",
    "RunReport",
    "train",
    "evaluate",
    "report_to_dict",
    "write_run_report",
]


@dataclass(frozen=True)
class SGD:
    lr: float = 0.1
    momentum: float = 0.0

    def __post_init__(self) -> None:
        if self.lr <= 0.0:
            raise ValueError("lr must be positive")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError("momentum must lie in [0, 1)")


@dataclass(frozen=True)
class Adam:
    lr: float = 1e-3
    b1: float = 0.9
    b2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self) -> None:
        if self.lr <= 0.0:
            raise ValueError("lr must be positive")
        if not (0.0 <= self.b1 < 1.0 and 0.0 <= self.b2 < 1.0):
            raise ValueError("b1 and b2 must lie in [0, 1)")
        if self.eps <= 0.0:
            raise ValueError("eps must be positive")


Optimizer = SGD | Adam


class _OptimizerState:
    """Per-parameter buffers; updates params in place."""

    def __init__(self, optimizer: Optimizer, params: ModelParams) -> None:
        self.optimizer = optimizer
        arrays = params.weights + params.biases
        if isinstance(optimizer, SGD):
            self.velocity = [np.zeros_like(a) for a in arrays]
        else:
            self.m = [np.zeros_like(a) for a in arrays]
            self.v = [np.zeros_like(a) for a in arrays]
            self.t = 0

    def step(self, params: ModelParams, grads: Gradients) -> None:
        arrays = params.weights + params.biases
        g_arrays = grads.weights + grads.biases
        opt = self.optimizer
        if isinstance(opt, SGD):
            for i, (a, g) in enumerate(zip(arrays, g_arrays)):
                self.velocity[i] = opt.momentum * self.velocity[i] + g
                a -= opt.lr * self.velocity[i]
        else:
            self.t += 1
            bc1 = 1.0 - opt.b1**self.t
            bc2 = 1.0 - opt.b2**self.t
            for i, (a, g) in enumerate(zip(arrays, g_arrays)):
                self.m[i] = opt.b1 * self.m[i] + (1.0 - opt.b1) * g
                self.v[i] = opt.b2 * self.v[i] + (1.0 - opt.b2) * (g * g)
                a -= opt.lr * (self.m[i] / bc1) / (np.sqrt(self.v[i] / bc2) + opt.eps)


@dataclass(frozen=True)
class TrainConfig:
    optimizer: Optimizer = Adam()
    epochs: int = 30
    batch_size: int = 64
    sampler: SamplerKind = UniformSampler()
    strategy: LossStrategy = Vanilla()
    seed: int = 0
    eval_beta: float = 1.0
    early_stop_patience: int | None = None

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.eval_beta <= 0.0:
            raise ValueError("eval_beta must be positive")
        if self.early_stop_patience is not None and self.early_stop_patience < 1:
            raise ValueError("early_stop_patience must be >= 1 when set")


@dataclass
class RunReport:
    """Per-seed training outcome.

    ``wall_clock_s`` is informational only and deliberately excluded from
    the persisted JSON so that repeated runs produce byte-identical files.
    For invalid (aborted) runs the curves stop at the point of failure and
    test metrics are zeroed.
    """

    seed: int
    arm: str = ""
    strategy: str = ""
    eval_beta: float = 1.0
    epochs_run: int = 0
    best_epoch: int = -1
    best_dev_f: float = 0.0
    dev_precision: list[float] = field(default_factory=list)
    dev_recall: list[float] = field(default_factory=list)
    dev_f: list[float] = field(default_factory=list)
    loss_curve: list[float] = field(default_factory=list)
    w_history: list[float] = field(default_factory=list)
    skipped_steps: int = 0
    test_precision: float = 0.0
    test_recall: float = 0.0
    test_f: float = 0.0
    valid: bool = True
    failure: str | None = None
    wall_clock_s: float = 0.0


def evaluate(params: ModelParams, dataset: Dataset, beta: float = 1.0) -> tuple[float, float, float]:
    """Micro precision/recall/F-beta of hard predictions, negative label 0."""
    preds = predict(params, dataset.features)
    stats, _ = confusion_from_predictions(dataset.labels, preds, NEGATIVE_LABEL)
    return precision(stats), recall(stats), f_beta(stats, beta)


def _epoch_seed(seed: int, epoch: int) -> int:
    return int(np.random.SeedSequence((seed, 2, epoch)).generate_state(1)[0])


def _check_dims(train: Dataset, dev: Dataset, test: Dataset, spec: ModelSpec) -> None:
    for name, ds in (("train", train), ("dev", dev), ("test", test)):
        if ds.d != spec.input_dim:
            raise ValueError(f"{name} dataset width {ds.d} != model input_dim {spec.input_dim}")
        if ds.k != spec.n_classes:
            raise ValueError(f"{name} dataset k {ds.k} != model n_classes {spec.n_classes}")


def train(
    train_ds: Dataset,
    dev_ds: Dataset,
    test_ds: Dataset,
    model_spec: ModelSpec,
    config: TrainConfig,
) -> tuple[ModelParams, RunReport]:
    """Run batched updates for the configured epochs; keep the best-dev model.

    After every epoch the dev set is scored with micro F at
    ``config.eval_beta`` on hard predictions; the parameters with the best
    dev F are retained (ties keep the earlier epoch) and final test metrics
    come from those retained parameters.  A non-finite loss aborts the run
    and flags the report invalid instead of raising.
    """
    _check_dims(train_ds, dev_ds, test_ds, model_spec)
    start = time.perf_counter()

    init_seed = int(np.random.SeedSequence((config.seed, 1)).generate_state(1)[0])
    params = init_params(model_spec, init_seed)
    opt_state = _OptimizerState(config.optimizer, params)
    adaptive = isinstance(config.strategy, Adaptive)

    report = RunReport(
        seed=config.seed,
        strategy=strategy_label(config.strategy),
        eval_beta=config.eval_beta,
    )
    best_params = params.copy()

    for epoch in range(config.epochs):
        step_losses = []
        for idx in batches(train_ds, config.sampler, config.batch_size, _epoch_seed(config.seed, epoch)):
            x = train_ds.features[idx]
            y = train_ds.labels[idx]
            fwd = forward(params, x)
            out = compute_loss(config.strategy, fwd, y, NEGATIVE_LABEL)
            if not np.isfinite(out.loss):
                report.failure = (
                    f"non-finite loss at epoch {epoch}, step {len(step_losses)}"
                )
                report.valid = False
                report.epochs_run = epoch
                report.wall_clock_s = time.perf_counter() - start
                return best_params, report
            step_losses.append(out.loss)
            if adaptive:
                report.w_history.append(float(out.w_used))
                if not np.any(y != NEGATIVE_LABEL):
                    report.skipped_steps += 1
            grads = backward(params, fwd, y, out.instance_weights)
            opt_state.step(params, grads)

        # an undersampled epoch can be empty when the dataset has no positives
        report.loss_curve.append(float(np.mean(step_losses)) if step_losses else 0.0)
        dev_p, dev_r, dev_f = evaluate(params, dev_ds, config.eval_beta)
        report.dev_precision.append(dev_p)
        report.dev_recall.append(dev_r)
        report.dev_f.append(dev_f)
        report.epochs_run = epoch + 1
        if dev_f > report.best_dev_f or report.best_epoch < 0:
            report.best_dev_f = dev_f
            report.best_epoch = epoch
            best_params = params.copy()
        elif (
            config.early_stop_patience is not None
            and epoch - report.best_epoch >= config.early_stop_patience
        ):
            break

    test_p, test_r, test_f = evaluate(best_params, test_ds, config.eval_beta)
    report.test_precision = test_p
    report.test_recall = test_r
    report.test_f = test_f
    report.wall_clock_s = time.perf_counter() - start
    return best_params, report


def report_to_dict(report: RunReport) -> dict:
    """Canonical JSON payload for a run (timing excluded, see RunReport)."""
    return {
        "seed": report.seed,
        "arm": report.arm,
        "strategy": report.strategy,
        "eval_beta": report.eval_beta,
        "epochs_run": report.epochs_run,
        "best_epoch": report.best_epoch,
        "best_dev_f": report.best_dev_f,
        "dev_precision": report.dev_precision,
        "dev_recall": report.dev_recall,
        "dev_f": report.dev_f,
        "loss_curve": report.loss_curve,
        "w_history": report.w_history,
        "skipped_steps": report.skipped_steps,
        "test_precision": report.test_precision,
        "test_recall": report.test_recall,
        "test_f": report.test_f,
        "valid": report.valid,
        "failure": report.failure,
    }


def write_run_report(report: RunReport, path) -> None:
    Path(path).write_text(
        json.dumps(report_to_dict(report), sort_keys=True, indent=2, allow_nan=False) + "\n"
    )
