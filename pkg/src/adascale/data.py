"""Synthetic sparse-detection datasets, file ingestion and batch sampling.

Label convention throughout the package: 0 is the background (negative)
class, labels 1..k-1 are the positive classes.

The generator builds Gaussian clusters: one per positive class and a
configurable number of modes for the negative class, so the background has
internal structure that a sampler can destroy but a reweighting scheme
cannot.  The positive count is exact (``round(positive_rate * n)``), not
Bernoulli, so prevalence is deterministic.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "Dataset",
    "GeneratorConfig",
    "GenerationDetails",
    "UniformSampler",
    "StratifiedSampler",
    "UnderSampler",
    "SamplerKind",
    "StratificationWarning",
    "generate",
    "generate_with_structure",
    "save",
    "load",
    "batches",
]

NEGATIVE_LABEL = 0


class StratificationWarning(UserWarning):
    """Raised-as-warning when a stratified epoch cannot honor its quota."""


@dataclass(frozen=True)
class Dataset:
    """Immutable feature matrix plus integer labels in [0, k-1]."""

    features: np.ndarray
    labels: np.ndarray
    k: int

    def __post_init__(self) -> None:
        feats = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels)
        if feats.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        if labels.ndim != 1 or labels.shape[0] != feats.shape[0]:
            raise ValueError("labels must be one per feature row")
        if feats.shape[0] < 1:
            raise ValueError("dataset must contain at least one instance")
        if not np.all(np.isfinite(feats)):
            raise ValueError("features must be finite")
        if labels.size and not np.issubdtype(labels.dtype, np.integer):
            as_int = labels.astype(np.int64)
            if not np.array_equal(as_int, labels):
                raise ValueError("labels must be integers")
            labels = as_int
        labels = labels.astype(np.int64)
        if int(self.k) < 2:
            raise ValueError("k must be >= 2")
        if labels.min() < 0 or labels.max() >= int(self.k):
            raise ValueError(f"labels must lie in [0, {int(self.k) - 1}]")
        feats = feats.copy()
        labels = labels.copy()
        feats.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "k", int(self.k))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class GeneratorConfig:
    """Synthetic benchmark knobs.

    Defaults describe the standard sparse benchmark: 10k instances in 20
    dimensions, 4 classes with 2% positives, and a 3-mode negative class.
    ``class_separation`` is the distance of each cluster center from the
    origin along mutually orthogonal directions (centers are then
    sqrt(2) * class_separation apart); ``noise_scale`` is the within-cluster
    standard deviation.
    """

    n: int = 10_000
    d: int = 20
    k: int = 4
    positive_rate: float = 0.02
    negative_modes: int = 3
    class_separation: float = 3.6
    noise_scale: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n < 1 or self.d < 1:
            raise ValueError("n and d must be >= 1")
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if not 0.0 < self.positive_rate < 1.0:
            raise ValueError("positive_rate must lie in (0, 1)")
        if self.negative_modes < 1:
            raise ValueError("negative_modes must be >= 1")
        if self.class_separation <= 0.0 or self.noise_scale <= 0.0:
            raise ValueError("class_separation and noise_scale must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if int(round(self.positive_rate * self.n)) < self.k - 1:
            raise ValueError("positive_rate * n must round to at least k - 1 positives")

    @property
    def n_positive(self) -> int:
        return int(round(self.positive_rate * self.n))


@dataclass(frozen=True)
class GenerationDetails:
    """Ground-truth cluster structure behind a generated dataset.

    ``negative_mode[i]`` is the negative mode index that produced row i, or
    -1 for positive rows.  Centroid rows follow class/mode order.
    """

    positive_centroids: np.ndarray
    negative_centroids: np.ndarray
    negative_mode: np.ndarray


def _even_split(total: int, parts: int) -> list[int]:
    base, rem = divmod(total, parts)
    return [base + (1 if i < rem else 0) for i in range(parts)]


def _centroid_directions(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    if count <= dim:
        # QR of a Gaussian matrix gives orthonormal columns, so all centers
        # sit at identical pairwise distances
        q, _ = np.linalg.qr(rng.standard_normal((dim, count)))
        return q.T
    dirs = rng.standard_normal((count, dim))
    return dirs / np.linalg.norm(dirs, axis=1, keepdims=True)


def generate_with_structure(config: GeneratorConfig) -> tuple[Dataset, GenerationDetails]:
    """Generate a dataset and expose the cluster structure that produced it."""
    rng = np.random.default_rng(config.seed)
    n_pos_classes = config.k - 1
    n_pos = config.n_positive
    n_neg = config.n - n_pos

    dirs = _centroid_directions(rng, n_pos_classes + config.negative_modes, config.d)
    centroids = config.class_separation * dirs
    pos_centroids = centroids[:n_pos_classes]
    neg_centroids = centroids[n_pos_classes:]

    feats = np.empty((config.n, config.d))
    labels = np.empty(config.n, dtype=np.int64)
    modes = np.full(config.n, -1, dtype=np.int64)

    row = 0
    for cls, count in enumerate(_even_split(n_pos, n_pos_classes), start=1):
        feats[row : row + count] = pos_centroids[cls - 1] + config.noise_scale * rng.standard_normal(
            (count, config.d)
        )
        labels[row : row + count] = cls
        row += count
    for mode, count in enumerate(_even_split(n_neg, config.negative_modes)):
        feats[row : row + count] = neg_centroids[mode] + config.noise_scale * rng.standard_normal(
            (count, config.d)
        )
        labels[row : row + count] = NEGATIVE_LABEL
        modes[row : row + count] = mode
        row += count

    order = rng.permutation(config.n)
    dataset = Dataset(features=feats[order], labels=labels[order], k=config.k)
    details = GenerationDetails(
        positive_centroids=pos_centroids,
        negative_centroids=neg_centroids,
        negative_mode=modes[order],
    )
    return dataset, details


def generate(config: GeneratorConfig) -> Dataset:
    """Generate a synthetic sparse-detection dataset (deterministic per seed)."""
    return generate_with_structure(config)[0]


def _infer_format(path: Path, format: str | None) -> str:
    if format is not None:
        if format not in ("csv", "jsonl"):
            raise ValueError(f"format must be 'csv' or 'jsonl', got {format!r}")
        return format
    suffix = path.suffix.lower()
    if suffix == ".csv":
        return "csv"
    if suffix == ".jsonl":
        return "jsonl"
    raise ValueError(f"cannot infer format from {path.name!r}; pass format=")


def save(dataset: Dataset, path, format: str | None = None) -> None:
    """Write a dataset as CSV (header f0..f{d-1},label) or JSONL.

    Floats are written with full repr so a save/load round trip is exact.
    """
    path = Path(path)
    fmt = _infer_format(path, format)
    if fmt == "csv":
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"f{i}" for i in range(dataset.d)] + ["label"])
            for row, label in zip(dataset.features, dataset.labels):
                writer.writerow([repr(float(v)) for v in row] + [int(label)])
    else:
        with path.open("w") as fh:
            for row, label in zip(dataset.features, dataset.labels):
                fh.write(
                    json.dumps({"features": [float(v) for v in row], "label": int(label)})
                    + "\n"
                )


def _load_error(path: Path, lineno: int, message: str) -> ValueError:
    return ValueError(f"{path}:{lineno}: {message}")


def _load_csv(path: Path) -> tuple[list[list[float]], list[int]]:
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise _load_error(path, 1, "empty file") from None
        if len(header) < 2 or header[-1] != "label":
            raise _load_error(path, 1, "header must be f0,...,f{d-1},label")
        d = len(header) - 1
        if header[:-1] != [f"f{i}" for i in range(d)]:
            raise _load_error(path, 1, "header must be f0,...,f{d-1},label")
        feats, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != d + 1:
                raise _load_error(path, lineno, f"expected {d + 1} columns, got {len(row)}")
            try:
                values = [float(v) for v in row[:-1]]
            except ValueError:
                raise _load_error(path, lineno, "malformed feature value") from None
            if not all(math.isfinite(v) for v in values):
                raise _load_error(path, lineno, "features must be finite")
            try:
                label = int(row[-1])
            except ValueError:
                raise _load_error(path, lineno, "malformed label") from None
            if label < 0:
                raise _load_error(path, lineno, f"label {label} out of range")
            feats.append(values)
            labels.append(label)
    return feats, labels


def _load_jsonl(path: Path) -> tuple[list[list[float]], list[int]]:
    feats, labels = [], []
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                raise _load_error(path, lineno, "malformed JSON") from None
            if not isinstance(obj, dict) or "features" not in obj or "label" not in obj:
                raise _load_error(path, lineno, "object must have 'features' and 'label'")
            raw = obj["features"]
            if not isinstance(raw, list) or not all(
                isinstance(v, (int, float)) and math.isfinite(v) for v in raw
            ):
                raise _load_error(path, lineno, "'features' must be a list of finite reals")
            label = obj["label"]
            if not isinstance(label, int) or isinstance(label, bool) or label < 0:
                raise _load_error(path, lineno, f"label {label!r} out of range")
            feats.append([float(v) for v in raw])
            labels.append(label)
    return feats, labels


def load(path, format: str | None = None) -> Dataset:
    """Load a dataset from CSV or JSONL; k is inferred as max label + 1.

    Parse and validation failures raise ValueError naming the offending
    line.
    """
    path = Path(path)
    if not path.exists():
        raise ValueError(f"{path}: no such file")
    fmt = _infer_format(path, format)
    feats, labels = _load_csv(path) if fmt == "csv" else _load_jsonl(path)
    if not feats:
        raise _load_error(path, 1, "no data rows")
    widths = {len(row) for row in feats}
    if len(widths) != 1:
        raise ValueError(f"{path}: inconsistent feature widths {sorted(widths)}")
    k = max(labels) + 1
    return Dataset(features=np.asarray(feats), labels=np.asarray(labels), k=max(k, 2))


@dataclass(frozen=True)
class UniformSampler:
    """Seeded permutation of the full index set, chunked into batches."""


@dataclass(frozen=True)
class StratifiedSampler:
    """Uniform batching that guarantees a minimum positive count per batch
    where the supply of positives allows it."""

    min_positives_per_batch: int = 1

    def __post_init__(self) -> None:
        if self.min_positives_per_batch < 1:
            raise ValueError("min_positives_per_batch must be >= 1")


@dataclass(frozen=True)
class UnderSampler:
    """Keep all positives, subsample negatives to ratio * P per epoch.

    The negative subset is redrawn from the sampler seed each epoch, so
    successive epochs see different negatives.
    """

    neg_to_pos_ratio: float

    def __post_init__(self) -> None:
        if not self.neg_to_pos_ratio > 0.0:
            raise ValueError("neg_to_pos_ratio must be positive")


SamplerKind = UniformSampler | StratifiedSampler | UnderSampler


def _chunk(indices: np.ndarray, batch_size: int) -> list[np.ndarray]:
    return [indices[i : i + batch_size] for i in range(0, indices.size, batch_size)]


def _stratified_batches(
    labels: np.ndarray, sampler: StratifiedSampler, batch_size: int, rng: np.random.Generator
) -> list[np.ndarray]:
    n = labels.size
    pos = rng.permutation(np.flatnonzero(labels != NEGATIVE_LABEL))
    neg = rng.permutation(np.flatnonzero(labels == NEGATIVE_LABEL))
    n_batches = math.ceil(n / batch_size)
    sizes = [batch_size] * (n // batch_size)
    if n % batch_size:
        sizes.append(n % batch_size)

    quota = sampler.min_positives_per_batch
    if pos.size < quota * n_batches:
        warnings.warn(
            f"stratified quota infeasible: {pos.size} positives for {n_batches} batches "
            f"of >= {quota}; allocating best-effort",
            StratificationWarning,
            stacklevel=3,
        )

    reserved: list[np.ndarray] = []
    ptr = 0
    for size in sizes:
        take = min(quota, size, pos.size - ptr)
        reserved.append(pos[ptr : ptr + take])
        ptr += take

    pool = rng.permutation(np.concatenate([pos[ptr:], neg]))
    out: list[np.ndarray] = []
    start = 0
    for size, res in zip(sizes, reserved):
        fill = pool[start : start + size - res.size]
        start += fill.size
        out.append(rng.permutation(np.concatenate([res, fill])))
    return out


def batches(
    dataset: Dataset, sampler: SamplerKind, batch_size: int, seed: int
) -> list[np.ndarray]:
    """Index batches for one epoch, deterministic given the seed.

    Uniform and stratified epochs partition the full index set; an
    undersampled epoch partitions all positives plus the drawn negatives.
    """
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    rng = np.random.default_rng(seed)
    labels = dataset.labels

    if isinstance(sampler, UniformSampler):
        return _chunk(rng.permutation(dataset.n), batch_size)
    if isinstance(sampler, StratifiedSampler):
        return _stratified_batches(labels, sampler, batch_size, rng)
    if isinstance(sampler, UnderSampler):
        pos = np.flatnonzero(labels != NEGATIVE_LABEL)
        neg = np.flatnonzero(labels == NEGATIVE_LABEL)
        keep = min(neg.size, int(round(sampler.neg_to_pos_ratio * pos.size)))
        chosen = rng.permutation(neg)[:keep]
        pool = rng.permutation(np.concatenate([pos, chosen]))
        return _chunk(pool, batch_size)
    raise TypeError(f"unknown sampler {sampler!r}")
