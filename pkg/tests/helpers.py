"""Shared randomized-input builders for the test suite."""

from __future__ import annotations

import numpy as np

from adascale.metrics import ConfusionStats


def random_integer_stats(rng: np.random.Generator, max_p: int = 50, max_n: int = 200) -> ConfusionStats:
    """Valid integer confusion stats, degenerate corners included."""
    while True:
        p = int(rng.integers(0, max_p + 1))
        n = int(rng.integers(0, max_n + 1))
        if p + n > 0:
            break
    tp = int(rng.integers(0, p + 1))
    pe = int(rng.integers(0, p - tp + 1))
    tn = int(rng.integers(0, n + 1))
    return ConfusionStats(p=p, n=n, tp=tp, tn=tn, pe=pe)


def random_interior_stats(rng: np.random.Generator, margin: float = 0.5) -> ConfusionStats:
    """Real-valued stats kept away from the boundary so small perturbations
    of tp and tn stay valid (used by finite-difference checks)."""
    p = float(rng.uniform(2.0, 100.0))
    n = float(rng.uniform(2.0, 300.0))
    tp = float(rng.uniform(margin, p - margin))
    pe = float(rng.uniform(0.0, max(p - tp - margin, 0.0)))
    tn = float(rng.uniform(0.0, n - margin))
    return ConfusionStats(p=p, n=n, tp=tp, tn=tn, pe=pe)


def random_labels(rng: np.random.Generator, length: int, k: int) -> np.ndarray:
    return rng.integers(0, k, size=length).astype(np.int64)
