"""Minimal softmax classifiers with analytic forward/backward passes.

Two architectures: a linear softmax layer, and one hidden layer (tanh or
relu) followed by softmax.  The loss layer lives elsewhere and only ever
talks to these models through per-instance weights, so any strategy that
can express itself as instance weighting plugs in unchanged.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "ModelSpec",
    "ModelParams",
    "Gradients",
    "ForwardResult",
    "init_params",
    "forward",
    "backward",
    "predict",
    "save_params",
    "load_params",
]

_ACTIVATIONS = ("tanh", "relu")
_CHECKPOINT_FORMAT = "softmax-classifier"
_CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class ModelSpec:
    """Architecture description: input width, class count, optional hidden layer."""

    input_dim: int
    n_classes: int
    hidden_dim: int | None = None
    activation: str = "tanh"

    def __post_init__(self) -> None:
        if self.input_dim < 1:
            raise ValueError("input_dim must be >= 1")
        if self.n_classes < 2:
            raise ValueError("n_classes must be >= 2")
        if self.hidden_dim is not None and self.hidden_dim < 1:
            raise ValueError("hidden_dim must be >= 1 when set")
        if self.activation not in _ACTIVATIONS:
            raise ValueError(f"activation must be one of {_ACTIVATIONS}")

    @property
    def layer_dims(self) -> list[tuple[int, int]]:
        if self.hidden_dim is None:
            return [(self.input_dim, self.n_classes)]
        return [(self.input_dim, self.hidden_dim), (self.hidden_dim, self.n_classes)]


@dataclass
class ModelParams:
    """Weights and biases per layer; weights[i] has shape (fan_in, fan_out)."""

    spec: ModelSpec
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def copy(self) -> "ModelParams":
        return ModelParams(
            spec=self.spec,
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
        )


@dataclass
class Gradients:
    """Loss gradients in ModelParams layout."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]


@dataclass
class ForwardResult:
    """Row-stochastic class probabilities plus activations for the backward pass."""

    probs: np.ndarray
    inputs: np.ndarray
    hidden_pre: np.ndarray | None = field(default=None, repr=False)
    hidden: np.ndarray | None = field(default=None, repr=False)


def init_params(spec: ModelSpec, seed: int) -> ModelParams:
    """Seeded uniform init, weights in [-a, a] with a = sqrt(6/(fan_in+fan_out))."""
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in spec.layer_dims:
        a = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-a, a, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return ModelParams(spec=spec, weights=weights, biases=biases)


def _softmax(logits: np.ndarray) -> np.ndarray:
    # max subtraction keeps exp in range; every output stays strictly positive
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _activate(name: str, pre: np.ndarray) -> np.ndarray:
    if name == "tanh":
        return np.tanh(pre)
    return np.maximum(pre, 0.0)


def _activate_grad(name: str, pre: np.ndarray, act: np.ndarray) -> np.ndarray:
    if name == "tanh":
        return 1.0 - act * act
    return (pre > 0.0).astype(pre.dtype)


def _check_features(spec: ModelSpec, features) -> np.ndarray:
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("features must be a 2-D matrix")
    if x.shape[1] != spec.input_dim:
        raise ValueError(
            f"feature width {x.shape[1]} does not match model input_dim {spec.input_dim}"
        )
    if not np.all(np.isfinite(x)):
        raise ValueError("features must be finite")
    return x


def forward(params: ModelParams, features) -> ForwardResult:
    """Compute class probabilities for a batch of feature rows."""
    x = _check_features(params.spec, features)
    if params.spec.hidden_dim is None:
        logits = x @ params.weights[0] + params.biases[0]
        return ForwardResult(probs=_softmax(logits), inputs=x)
    pre = x @ params.weights[0] + params.biases[0]
    act = _activate(params.spec.activation, pre)
    logits = act @ params.weights[1] + params.biases[1]
    return ForwardResult(probs=_softmax(logits), inputs=x, hidden_pre=pre, hidden=act)


def backward(
    params: ModelParams, fwd: ForwardResult, gold, instance_weights
) -> Gradients:
    """Gradient of the weighted mean negative log-likelihood.

    The loss being differentiated is

        mean over i of instance_weights[i] * (-log probs[i, gold[i]])

    so the returned gradient is exactly linear in the instance weights.
    """
    probs = fwd.probs
    batch = probs.shape[0]
    gold_arr = np.asarray(gold)
    w = np.asarray(instance_weights, dtype=np.float64)
    if gold_arr.shape != (batch,):
        raise ValueError("gold labels must have one entry per batch row")
    if not np.issubdtype(gold_arr.dtype, np.integer):
        raise ValueError("gold labels must be integers")
    if gold_arr.size and (gold_arr.min() < 0 or gold_arr.max() >= probs.shape[1]):
        raise ValueError("gold labels out of range for model class count")
    if w.shape != (batch,):
        raise ValueError("instance_weights must have one entry per batch row")
    if not np.all(np.isfinite(w)) or w.min() < 0.0:
        raise ValueError("instance_weights must be finite and non-negative")

    dlogits = probs.copy()
    dlogits[np.arange(batch), gold_arr] -= 1.0
    dlogits *= (w / batch)[:, None]

    if params.spec.hidden_dim is None:
        g_w = fwd.inputs.T @ dlogits
        g_b = dlogits.sum(axis=0)
        return Gradients(weights=[g_w], biases=[g_b])

    g_w2 = fwd.hidden.T @ dlogits
    g_b2 = dlogits.sum(axis=0)
    d_hidden = dlogits @ params.weights[1].T
    d_pre = d_hidden * _activate_grad(params.spec.activation, fwd.hidden_pre, fwd.hidden)
    g_w1 = fwd.inputs.T @ d_pre
    g_b1 = d_pre.sum(axis=0)
    return Gradients(weights=[g_w1, g_w2], biases=[g_b1, g_b2])


def predict(params: ModelParams, features) -> np.ndarray:
    """Per-row argmax labels; ties resolve to the lowest class index."""
    return np.argmax(forward(params, features).probs, axis=1)


def save_params(params: ModelParams, path) -> None:
    """Write a checkpoint as self-describing JSON.

    Layout (stable): ``format``, ``version``, ``arch`` ("linear" or "mlp"),
    ``input_dim``, ``n_classes``, ``hidden_dim``, ``activation``, and
    ``layers``, a list of {"weight": nested row-major lists, "bias": list}.
    """
    spec = params.spec
    doc = {
        "format": _CHECKPOINT_FORMAT,
        "version": _CHECKPOINT_VERSION,
        "arch": "linear" if spec.hidden_dim is None else "mlp",
        "input_dim": spec.input_dim,
        "n_classes": spec.n_classes,
        "hidden_dim": spec.hidden_dim,
        "activation": None if spec.hidden_dim is None else spec.activation,
        "layers": [
            {"weight": w.tolist(), "bias": b.tolist()}
            for w, b in zip(params.weights, params.biases)
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2, allow_nan=False) + "\n")


def load_params(path) -> ModelParams:
    """Read a checkpoint written by :func:`save_params`, validating shapes."""
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != _CHECKPOINT_FORMAT:
        raise ValueError(f"{path}: not a model checkpoint")
    if doc.get("version") != _CHECKPOINT_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {doc.get('version')!r}")
    spec = ModelSpec(
        input_dim=doc["input_dim"],
        n_classes=doc["n_classes"],
        hidden_dim=doc["hidden_dim"],
        activation=doc["activation"] if doc["hidden_dim"] is not None else "tanh",
    )
    weights, biases = [], []
    layers = doc["layers"]
    if len(layers) != len(spec.layer_dims):
        raise ValueError(f"{path}: expected {len(spec.layer_dims)} layers, got {len(layers)}")
    for layer, (fan_in, fan_out) in zip(layers, spec.layer_dims):
        w = np.asarray(layer["weight"], dtype=np.float64)
        b = np.asarray(layer["bias"], dtype=np.float64)
        if w.shape != (fan_in, fan_out) or b.shape != (fan_out,):
            raise ValueError(f"{path}: layer shape mismatch")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise ValueError(f"{path}: non-finite parameter values")
        weights.append(w)
        biases.append(b)
    return ModelParams(spec=spec, weights=weights, biases=biases)
