"""Loss strategies, each reduced to per-instance weights on cross-entropy.

Every strategy produces a weight per instance; the batch loss is the
weighted mean of -log p(gold class) and the model's backward pass consumes
the same weights.  That keeps the optimizer, sampler and evaluation code
byte-identical across strategies: switching strategy changes nothing but
the weights.

Strategies:

    Vanilla     plain cross-entropy, all weights 1
    Static(c)   constant cost c on negative instances
    Focal(g)    weight (1 - p)^g, down-weighting well-classified instances
    Adaptive(b) weight 1 on positives, batch-estimated scaling weight on
                negatives, refreshed every step from the current batch
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ForwardResult
from .scaling import BatchPrediction, w_batch

__all__ = [
    "Vanilla",
    "Adaptive",
    "Static",
    "Focal",
    "LossStrategy",
    "LossOutput",
    "compute_loss",
    "strategy_label",
]


@dataclass(frozen=True)
class Vanilla:
    pass


@dataclass(frozen=True)
class Adaptive:
    beta: float = 1.0

    def __post_init__(self) -> None:
        if not np.isfinite(self.beta) or self.beta <= 0.0:
            raise ValueError("beta must be a positive real")


@dataclass(frozen=True)
class Static:
    negative_cost: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.negative_cost) or self.negative_cost <= 0.0:
            raise ValueError("negative_cost must be a positive real")


@dataclass(frozen=True)
class Focal:
    gamma: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.gamma) or self.gamma < 0.0:
            raise ValueError("gamma must be a non-negative real")


LossStrategy = Vanilla | Adaptive | Static | Focal


def strategy_label(strategy: LossStrategy) -> str:
    """Short deterministic text tag used in reports and filenames."""
    if isinstance(strategy, Vanilla):
        return "vanilla"
    if isinstance(strategy, Adaptive):
        return f"adaptive(beta={strategy.beta:g})"
    if isinstance(strategy, Static):
        return f"static(negative_cost={strategy.negative_cost:g})"
    if isinstance(strategy, Focal):
        return f"focal(gamma={strategy.gamma:g})"
    raise TypeError(f"unknown strategy {strategy!r}")


@dataclass
class LossOutput:
    """Scalar batch loss, the per-instance weights behind it, and the
    adaptive weight applied this step (None for non-adaptive strategies)."""

    loss: float
    instance_weights: np.ndarray
    w_used: float | None = None


def compute_loss(
    strategy: LossStrategy, fwd: ForwardResult, gold, negative_label: int = 0
) -> LossOutput:
    """Evaluate a strategy on one batch.

    The loss is the mean over the batch of weight[i] * (-log p_i) with p_i
    the gold-class probability of row i.  Weights are treated as constants
    of the model parameters: for Focal the modulating factor and for
    Adaptive the scaling weight are both frozen at their current-step
    values, so gradients flow only through the log-probabilities.

    An adaptive batch with no positive instances is valid and yields
    w_used = 0.0: every instance gets weight zero, the loss is 0 and the
    step contributes no gradient.
    """
    probs = fwd.probs
    batch = probs.shape[0]
    if batch == 0:
        raise ValueError("batch must contain at least one instance")
    gold_arr = np.asarray(gold)
    if gold_arr.shape != (batch,):
        raise ValueError("gold labels must have one entry per batch row")
    if gold_arr.size and (gold_arr.min() < 0 or gold_arr.max() >= probs.shape[1]):
        raise ValueError("gold labels out of range")

    gold_probs = probs[np.arange(batch), gold_arr]
    is_negative = gold_arr == negative_label
    w_used: float | None = None

    if isinstance(strategy, Vanilla):
        weights = np.ones(batch)
    elif isinstance(strategy, Static):
        weights = np.where(is_negative, strategy.negative_cost, 1.0)
    elif isinstance(strategy, Focal):
        weights = (1.0 - gold_probs) ** strategy.gamma
    elif isinstance(strategy, Adaptive):
        if np.all(is_negative):
            w_used = 0.0
        else:
            batch_pred = BatchPrediction(gold_probs=gold_probs, is_positive=~is_negative)
            w_used = w_batch(batch_pred, strategy.beta)
        weights = np.where(is_negative, w_used, 1.0)
    else:
        raise TypeError(f"unknown strategy {strategy!r}")

    # a gold probability can underflow to exactly 0 under extreme parameters;
    # the resulting non-finite loss is the divergence signal the trainer checks
    with np.errstate(divide="ignore", invalid="ignore"):
        loss = float(np.mean(weights * -np.log(gold_probs)))
    return LossOutput(loss=loss, instance_weights=weights, w_used=w_used)
