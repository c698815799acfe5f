"""Minimal feed-forward network: seeded init, SGD training, activation dumps.

Hidden layers use the rectifier, the output layer is identity, and training
minimizes softmax cross-entropy with plain mini-batch SGD.  All randomness
(weight init, batch order) comes from one PCG32 stream so a fixed seed gives
bitwise-identical parameters: weights are drawn layer by layer in row-major
order from uniform(-limit, limit) with limit = sqrt(6 / (fan_in + fan_out)),
biases start at zero, then each epoch draws one Fisher-Yates permutation.
"""

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import errors
from .rng import Pcg32
from .store import ActivationDump, LabeledDataset


@dataclass
class MlpConfig:
    layer_sizes: list           # input d, hidden sizes..., output |C|
    seed: int = 0
    learning_rate: float = 0.05
    epochs: int = 200
    batch_size: int = 32

    def __post_init__(self):
        if len(self.layer_sizes) < 3:
            raise ValueError("need input, at least one hidden, and output layer sizes")
        if any(s < 1 for s in self.layer_sizes):
            raise ValueError("all layer sizes must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 0 or self.batch_size < 1:
            raise ValueError("epochs must be >= 0 and batch_size >= 1")

    @property
    def num_hidden(self):
        return len(self.layer_sizes) - 2


@dataclass
class MlpModel:
    weights: list               # weights[l]: (fan_in, fan_out) float64
    biases: list                # biases[l]: (fan_out,) float64
    config: MlpConfig

    def __post_init__(self):
        sizes = self.config.layer_sizes
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (sizes[l], sizes[l + 1]) or b.shape != (sizes[l + 1],):
                raise errors.ShapeMismatch(f"layer {l} parameter shapes inconsistent")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise errors.NonFiniteValue(f"layer {l} parameters non-finite")


@dataclass
class ForwardResult:
    hidden: list                # post-rectifier activations per hidden layer
    logits: np.ndarray
    predicted: int


@dataclass
class TrainResult:
    model: MlpModel
    loss_history: list = field(default_factory=list)


def init_model(config):
    rng = Pcg32(config.seed)
    model = _init_from(config, rng)
    return model


def _init_from(config, rng):
    sizes = config.layer_sizes
    weights, biases = [], []
    for l in range(len(sizes) - 1):
        fan_in, fan_out = sizes[l], sizes[l + 1]
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        w = np.empty((fan_in, fan_out), dtype=np.float64)
        for i in range(fan_in):
            for j in range(fan_out):
                w[i, j] = rng.uniform(-limit, limit)
        weights.append(w)
        biases.append(np.zeros(fan_out, dtype=np.float64))
    return MlpModel(weights=weights, biases=biases, config=config)


def _forward_batch(model, X):
    """Returns ([post-relu hidden activations...], logits)."""
    hidden = []
    h = X
    last = len(model.weights) - 1
    for l in range(last):
        h = np.maximum(h @ model.weights[l] + model.biases[l], 0.0)
        hidden.append(h)
    logits = h @ model.weights[last] + model.biases[last]
    return hidden, logits


def _softmax(logits):
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def loss_and_grads(model, X, y):
    """Mean cross-entropy over the batch plus analytic parameter gradients."""
    n = X.shape[0]
    hidden, logits = _forward_batch(model, X)
    with np.errstate(invalid="ignore", over="ignore"):
        # divergence surfaces as NonFiniteLoss in the caller, not a warning
        shifted = logits - logits.max(axis=1, keepdims=True)
        lse = np.log(np.exp(shifted).sum(axis=1))
        loss = float((lse - shifted[np.arange(n), y]).mean())
        probs = _softmax(logits)

    dlogits = probs.copy()
    dlogits[np.arange(n), y] -= 1.0
    dlogits /= n

    grads_w = [None] * len(model.weights)
    grads_b = [None] * len(model.biases)
    last = len(model.weights) - 1
    acts = [X] + hidden
    delta = dlogits
    for l in range(last, -1, -1):
        grads_w[l] = acts[l].T @ delta
        grads_b[l] = delta.sum(axis=0)
        if l > 0:
            delta = (delta @ model.weights[l].T) * (acts[l] > 0.0)
    return loss, grads_w, grads_b


def train_mlp(config, ds):
    """Deterministic mini-batch SGD; returns the model and per-epoch losses."""
    if ds.d != config.layer_sizes[0]:
        raise errors.ShapeMismatch(
            f"dataset has {ds.d} features, input layer expects {config.layer_sizes[0]}"
        )
    if ds.num_classes != config.layer_sizes[-1]:
        raise errors.ShapeMismatch(
            f"dataset has {ds.num_classes} classes, output layer expects "
            f"{config.layer_sizes[-1]}"
        )
    rng = Pcg32(config.seed)
    model = _init_from(config, rng)
    X = ds.features
    y = ds.labels.astype(np.int64)
    n = ds.n

    history = []
    for epoch in range(config.epochs):
        perm = rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            batch = perm[start : start + config.batch_size]
            loss, gw, gb = loss_and_grads(model, X[batch], y[batch])
            if not math.isfinite(loss):
                raise errors.NonFiniteLoss(epoch)
            total += loss * len(batch)
            for l in range(len(model.weights)):
                model.weights[l] -= config.learning_rate * gw[l]
                model.biases[l] -= config.learning_rate * gb[l]
        history.append(total / n)
    return TrainResult(model=model, loss_history=history)


def forward(model, x):
    """Per-layer post-rectifier activations, logits, and the argmax class.

    Ties in the logits resolve toward the lower class index.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.config.layer_sizes[0],):
        raise errors.ShapeMismatch(
            f"input length {x.shape} != {model.config.layer_sizes[0]}"
        )
    hidden, logits = _forward_batch(model, x[None, :])
    return ForwardResult(
        hidden=[h[0] for h in hidden],
        logits=logits[0],
        predicted=int(np.argmax(logits[0])),
    )


def predict_batch(model, X):
    _, logits = _forward_batch(model, np.asarray(X, dtype=np.float64))
    return np.argmax(logits, axis=1)


def dump_activations(model, ds, layer):
    """ActivationDump of hidden layer `layer` over the dataset rows."""
    if not 0 <= layer < model.config.num_hidden:
        raise errors.LayerOutOfRange(
            f"layer {layer} outside [0, {model.config.num_hidden})"
        )
    hidden, logits = _forward_batch(model, ds.features)
    return ActivationDump(
        layer=layer,
        values=hidden[layer].astype(np.float32),
        labels=ds.labels,
        num_classes=ds.num_classes,
        predictions=np.argmax(logits, axis=1).astype(np.uint32),
    )


def generate_xor(n, seed, dims=10):
    """Uniform points in [0,1]^dims labeled round(x0) xor round(x1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = Pcg32(seed)
    X = np.empty((n, dims), dtype=np.float64)
    for i in range(n):
        for j in range(dims):
            X[i, j] = rng.next_f64()
    labels = ((X[:, 0] >= 0.5) ^ (X[:, 1] >= 0.5)).astype(np.uint32)
    return LabeledDataset(
        features=X,
        labels=labels,
        num_classes=2,
        feature_names=[f"x{i}" for i in range(dims)],
    )


# ---- persistence ----

def config_to_json(config):
    return {
        "layer_sizes": list(config.layer_sizes),
        "activation": "relu",
        "seed": config.seed,
        "learning_rate": config.learning_rate,
        "epochs": config.epochs,
        "batch_size": config.batch_size,
    }


def config_from_json(obj):
    return MlpConfig(
        layer_sizes=[int(s) for s in obj["layer_sizes"]],
        seed=int(obj.get("seed", 0)),
        learning_rate=float(obj.get("learning_rate", 0.05)),
        epochs=int(obj.get("epochs", 200)),
        batch_size=int(obj.get("batch_size", 32)),
    )


def save_model(model, path):
    payload = {
        "config": config_to_json(model.config),
        "weights": [w.tolist() for w in model.weights],
        "biases": [b.tolist() for b in model.biases],
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f)
        f.write("\n")


def load_model(path):
    with open(path, "r", encoding="utf-8") as f:
        payload = json.load(f)
    config = config_from_json(payload["config"])
    return MlpModel(
        weights=[np.array(w, dtype=np.float64) for w in payload["weights"]],
        biases=[np.array(b, dtype=np.float64) for b in payload["biases"]],
        config=config,
    )


def save_loss_history(history, path):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["epoch", "loss"])
        for i, loss in enumerate(history):
            writer.writerow([i, repr(loss)])
