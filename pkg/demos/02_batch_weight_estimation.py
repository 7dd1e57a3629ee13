"""Estimating the scaling weight from a single batch.

The exact weight needs full-dataset confusion counts, which are not
available mid-training.  The batch estimator replaces tp and tn with
expected counts (sums of gold-class softmax probabilities inside the
batch), so every optimization step can refresh the weight for free.
"""

import numpy as np

from adascale import BatchPrediction, ConfusionStats, batch_expected_counts, w_batch, w_exact

rng = np.random.default_rng(0)

# ---------------------------------------------------------------------
# Hard 0/1 confidences reduce the estimator to plain counting: it then
# matches the exact weight computed from the induced confusion counts.
# ---------------------------------------------------------------------
flags = np.array([True] * 4 + [False] * 16)
hard = (rng.random(20) < 0.7).astype(float)
batch = BatchPrediction(hard, flags)
tp_b, tn_b, p_b, n_b = batch_expected_counts(batch)
stats = ConfusionStats(p=p_b, n=n_b, tp=tp_b, tn=tn_b, pe=0)
print(f"hard batch:  w_batch={w_batch(batch):.6f}  w_exact={w_exact(stats):.6f}")
print()

# ---------------------------------------------------------------------
# Soft probabilities: simulate a model sharpening over training and watch
# the estimated weight climb toward 1.
# ---------------------------------------------------------------------
print("confidence   expected tp   expected tn    w_batch")
for confidence in (0.3, 0.5, 0.7, 0.9, 0.99):
    pos_probs = rng.uniform(confidence - 0.2, confidence, size=8).clip(0.05, 1.0)
    neg_probs = rng.uniform(confidence, min(confidence + 0.1, 1.0), size=56)
    batch = BatchPrediction(
        np.concatenate([pos_probs, neg_probs]),
        np.array([True] * 8 + [False] * 56),
    )
    tp_b, tn_b, p_b, n_b = batch_expected_counts(batch)
    print(f"   {confidence:4.2f}      {tp_b:7.3f}      {tn_b:8.3f}     {w_batch(batch):.4f}")
print()
print("-> early batches barely weight negatives; near convergence they count fully")

# ---------------------------------------------------------------------
# The beta knob: favoring precision (beta < 1) raises the weight, favoring
# recall (beta > 1) lowers it.
# ---------------------------------------------------------------------
batch = BatchPrediction(
    rng.uniform(0.4, 0.9, size=64), np.array([True] * 6 + [False] * 58)
)
print()
print("beta  w_batch")
for beta in (0.5, 1.0, 2.0, 4.0):
    print(f" {beta:3g}  {w_batch(batch, beta):.4f}")
