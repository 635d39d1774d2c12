"""Sigmoid multilayer perceptron trained by plain backpropagation.

Every layer, including the output layer, applies the logistic sigmoid. The
loss is half the summed squared error against one-hot targets.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from vmdeeg._sgd import sgd_epoch


class TrainingError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class NormStats:
    mean: np.ndarray
    std: np.ndarray
    constant_dims: tuple[int, ...] = ()


@dataclass(eq=False)
class MlpModel:
    layer_sizes: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    norm: NormStats | None = None
    seed: int | None = None

    def __post_init__(self):
        self.layer_sizes = tuple(int(s) for s in self.layer_sizes)
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (self.layer_sizes[i + 1], self.layer_sizes[i]):
                raise ValueError(f"layer {i}: weight shape {w.shape} does not match sizes")
            if b.shape != (self.layer_sizes[i + 1],):
                raise ValueError(f"layer {i}: bias shape {b.shape} does not match sizes")

    @property
    def n_inputs(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_outputs(self) -> int:
        return self.layer_sizes[-1]

    def copy(self) -> MlpModel:
        return MlpModel(
            self.layer_sizes,
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            self.norm,
            self.seed,
        )

    def to_dict(self) -> dict:
        norm = None
        if self.norm is not None:
            norm = {
                "mean": self.norm.mean.tolist(),
                "std": self.norm.std.tolist(),
                "constant_dims": list(self.norm.constant_dims),
            }
        return {
            "layer_sizes": list(self.layer_sizes),
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
            "norm_stats": norm,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> MlpModel:
        norm = d.get("norm_stats")
        if norm is not None:
            norm = NormStats(
                np.array(norm["mean"], dtype=float),
                np.array(norm["std"], dtype=float),
                tuple(norm["constant_dims"]),
            )
        return cls(
            tuple(d["layer_sizes"]),
            [
                np.array(w, dtype=float).reshape(-1, n_in)
                for w, n_in in zip(d["weights"], d["layer_sizes"])
            ],
            [np.array(b, dtype=float) for b in d["biases"]],
            norm,
            d.get("seed"),
        )


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 1000
    seed: int = 0
    batch: str = "per-sample"
    shuffle: bool = True

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.batch not in ("per-sample", "full"):
            raise ValueError("batch must be 'per-sample' or 'full'")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    inputs: np.ndarray
    labels: np.ndarray
    n_classes: int = 2
    ids: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        inputs = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        labels = np.asarray(self.labels, dtype=int)
        if inputs.shape[0] != labels.shape[0]:
            raise ValueError("inputs and labels differ in length")
        if labels.size and (labels.min() < 0 or labels.max() >= self.n_classes):
            raise ValueError(f"labels must lie in [0, {self.n_classes})")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.labels.size

    def targets(self) -> np.ndarray:
        return np.eye(self.n_classes)[self.labels]


def sigmoid(z):
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-z))


def init_model(layer_sizes: Sequence[int], seed: int = 0) -> MlpModel:
    """Weights uniform in +-1/sqrt(fan_in), zero biases."""
    sizes = tuple(int(s) for s in layer_sizes)
    if len(sizes) < 2 or min(sizes) < 1:
        raise ValueError(f"invalid layer sizes {layer_sizes}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        limit = 1.0 / np.sqrt(n_in)
        weights.append(rng.uniform(-limit, limit, size=(n_out, n_in)))
        biases.append(np.zeros(n_out))
    return MlpModel(sizes, weights, biases, None, seed)


def _activations(model: MlpModel, x: np.ndarray) -> list[np.ndarray]:
    acts = [x]
    for w, b in zip(model.weights, model.biases):
        acts.append(sigmoid(w @ acts[-1] + b))
    return acts


def forward(model: MlpModel, x) -> np.ndarray:
    """Network outputs for one already-normalized input vector."""
    x = np.asarray(x, dtype=float)
    if x.shape != (model.n_inputs,):
        raise ValueError(f"expected input of length {model.n_inputs}, got shape {x.shape}")
    return _activations(model, x)[-1]


def loss(model: MlpModel, x, target) -> float:
    out = forward(model, x)
    return 0.5 * float(np.sum((out - np.asarray(target)) ** 2))


def gradient(model: MlpModel, x, target) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Backpropagated gradients of the squared-error loss (weights, biases)."""
    x = np.asarray(x, dtype=float)
    target = np.asarray(target, dtype=float)
    if x.shape != (model.n_inputs,) or target.shape != (model.n_outputs,):
        raise ValueError("input or target shape does not match the model")
    acts = _activations(model, x)
    n_layers = len(model.weights)
    grad_w: list[np.ndarray] = [None] * n_layers  # type: ignore[list-item]
    grad_b: list[np.ndarray] = [None] * n_layers  # type: ignore[list-item]
    out = acts[-1]
    delta = (out - target) * out * (1.0 - out)
    for layer in range(n_layers - 1, -1, -1):
        grad_w[layer] = np.outer(delta, acts[layer])
        grad_b[layer] = delta
        if layer:
            a = acts[layer]
            delta = (model.weights[layer].T @ delta) * a * (1.0 - a)
    return grad_w, grad_b


def fit_normalizer(inputs) -> NormStats:
    """Per-dimension z-score statistics; constant dimensions keep std 1."""
    inputs = np.atleast_2d(np.asarray(getattr(inputs, "inputs", inputs), dtype=float))
    if inputs.shape[0] == 0:
        raise ValueError("cannot fit normalizer on an empty set")
    mean = inputs.mean(axis=0)
    std = inputs.std(axis=0)
    constant = tuple(int(i) for i in np.flatnonzero(~(std > 0)))
    std = np.where(std > 0, std, 1.0)
    return NormStats(mean, std, constant)


def apply_normalizer(stats: NormStats, inputs) -> np.ndarray:
    return (np.asarray(inputs, dtype=float) - stats.mean) / stats.std


def train(
    model: MlpModel, data: LabeledDataset, cfg: TrainConfig | None = None
) -> tuple[MlpModel, list[float]]:
    """Gradient descent on already-normalized inputs.

    Returns a trained copy of ``model`` and the mean per-sample loss of each
    epoch, measured before each update.
    """
    cfg = cfg or TrainConfig()
    if data.inputs.shape[1] != model.n_inputs or data.n_classes != model.n_outputs:
        raise ValueError("dataset dimensions do not match the model")
    if len(data) == 0:
        raise ValueError("empty training set")
    model = model.copy()
    weights, biases = model.weights, model.biases
    inputs = data.inputs
    targets = data.targets()
    n = len(data)
    rate = cfg.learning_rate
    rng = np.random.default_rng(cfg.seed)
    flat = _FlatNet(model) if cfg.batch == "per-sample" else None
    history: list[float] = []
    for epoch in range(cfg.epochs):
        if cfg.batch == "full":
            total = 0.0
            gw = [np.zeros_like(w) for w in weights]
            gb = [np.zeros_like(b) for b in biases]
            for i in range(n):
                total += loss(model, inputs[i], targets[i])
                dw, db = gradient(model, inputs[i], targets[i])
                for layer in range(len(weights)):
                    gw[layer] += dw[layer]
                    gb[layer] += db[layer]
            for w, b, dw, db in zip(weights, biases, gw, gb):
                w -= rate / n * dw
                b -= rate / n * db
        else:
            order = rng.permutation(n) if cfg.shuffle else np.arange(n)
            total = flat.epoch(inputs, targets, order, rate)
        epoch_loss = total / n
        if not np.isfinite(epoch_loss):
            raise TrainingError(f"loss diverged at epoch {epoch + 1}")
        history.append(epoch_loss)
    if flat is not None:
        flat.unpack(model)
    return model, history


class _FlatNet:
    """Parameters packed into one vector for the compiled training loop."""

    def __init__(self, model: MlpModel):
        sizes = np.array(model.layer_sizes, dtype=np.int64)
        w_sizes = sizes[:-1] * sizes[1:]
        # per layer: weights then biases
        block = np.ravel(np.column_stack([w_sizes, sizes[1:]]))
        offsets = np.concatenate([[0], np.cumsum(block)])
        self.w_off = offsets[0:-1:2].astype(np.int64)
        self.b_off = offsets[1::2].astype(np.int64)
        self.a_off = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
        self.sizes = sizes
        self.params = np.concatenate(
            [np.concatenate([w.ravel(), b]) for w, b in zip(model.weights, model.biases)]
        )
        self.acts = np.zeros(int(sizes.sum()))
        self.deltas = np.zeros(int(sizes.sum()))

    def epoch(self, inputs, targets, order, rate) -> float:
        return sgd_epoch(
            self.params,
            self.sizes,
            self.w_off,
            self.b_off,
            self.a_off,
            np.ascontiguousarray(inputs),
            np.ascontiguousarray(targets),
            np.asarray(order, dtype=np.int64),
            float(rate),
            self.acts,
            self.deltas,
        )

    def unpack(self, model: MlpModel) -> None:
        for layer, (w, b) in enumerate(zip(model.weights, model.biases)):
            start = self.w_off[layer]
            w[...] = self.params[start : start + w.size].reshape(w.shape)
            b[...] = self.params[self.b_off[layer] : self.b_off[layer] + b.size]


def predict_scores(model: MlpModel, inputs) -> np.ndarray:
    """Sigmoid outputs for raw inputs, applying the model's normalizer if set."""
    x = np.atleast_2d(np.asarray(inputs, dtype=float))
    if model.norm is not None:
        x = apply_normalizer(model.norm, x)
    for w, b in zip(model.weights, model.biases):
        x = sigmoid(x @ w.T + b)
    return x


def predict(model: MlpModel, inputs) -> int | np.ndarray:
    """Argmax class; ties go to the lower index. Accepts one vector or a batch."""
    single = np.ndim(inputs) == 1
    if np.shape(inputs)[-1] != model.n_inputs:
        raise ValueError(f"expected inputs of length {model.n_inputs}")
    classes = np.argmax(predict_scores(model, inputs), axis=1)
    return int(classes[0]) if single else classes


def fit_classifier(
    data: LabeledDataset,
    hidden: Sequence[int] = (10, 10),
    cfg: TrainConfig | None = None,
) -> tuple[MlpModel, list[float]]:
    """Fit normalizer and network on raw training features."""
    cfg = cfg or TrainConfig()
    stats = fit_normalizer(data.inputs)
    normalized = LabeledDataset(apply_normalizer(stats, data.inputs), data.labels, data.n_classes)
    model = init_model((data.inputs.shape[1], *hidden, data.n_classes), cfg.seed)
    model, history = train(model, normalized, cfg)
    model.norm = stats
    return model, history


def save_model(model: MlpModel, path) -> None:
    Path(path).write_text(json.dumps(model.to_dict(), indent=2))


def load_model(path) -> MlpModel:
    return MlpModel.from_dict(json.loads(Path(path).read_text()))
