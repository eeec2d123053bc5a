"""Feed-forward binary classifier with analytic input gradients.

Architecture: stacked dense-ReLU hidden layers of equal width, each
followed by inverted dropout (active during training only), and a sigmoid
output. Training is mini-batch SGD with momentum on binary cross-entropy.
The trained forward function is deterministic, and its exact gradient with
respect to the input is available for attribution; the ReLU subgradient at
exactly 0 is taken as 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError, ShapeMismatchError, TrainingError
from .negsample import TrainingSet

# Keeps reported scores strictly inside (0, 1) and logs finite.
SCORE_EPS = 1e-12


@dataclass(frozen=True)
class NNConfig:
    num_hidden_layers: int = 2
    layer_width: int = 64
    dropout_prob: float = 0.1
    batch_size: int = 32
    epochs: int = 100
    steps_per_epoch: int | None = None  # None: one full pass per epoch
    learning_rate: float = 1e-3
    momentum: float = 0.9
    seed: int = 0

    def __post_init__(self):
        if self.num_hidden_layers < 1:
            raise PreconditionError("num_hidden_layers must be >= 1")
        if self.layer_width < 1:
            raise PreconditionError("layer_width must be >= 1")
        if not 0.0 <= self.dropout_prob < 1.0:
            raise PreconditionError("dropout_prob must be in [0, 1)")
        if self.batch_size < 1:
            raise PreconditionError("batch_size must be >= 1")
        if self.epochs < 1:
            raise PreconditionError("epochs must be >= 1")
        if self.steps_per_epoch is not None and self.steps_per_epoch < 1:
            raise PreconditionError("steps_per_epoch must be >= 1")
        if self.learning_rate <= 0:
            raise PreconditionError("learning_rate must be positive")
        if not 0.0 <= self.momentum < 1.0:
            raise PreconditionError("momentum must be in [0, 1)")

    def to_json_dict(self) -> dict:
        return {
            "num_hidden_layers": self.num_hidden_layers,
            "layer_width": self.layer_width,
            "dropout_prob": self.dropout_prob,
            "batch_size": self.batch_size,
            "epochs": self.epochs,
            "steps_per_epoch": self.steps_per_epoch,
            "learning_rate": self.learning_rate,
            "momentum": self.momentum,
            "seed": self.seed,
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "NNConfig":
        return cls(**obj)


@dataclass
class NNModel:
    """Trained network: weight/bias per layer, shapes D -> width -> ... -> 1."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    config: NNConfig
    input_dim: int
    loss_history: list[float] = field(default_factory=list)
    initial_loss: float = float("nan")

    def freeze(self) -> "NNModel":
        for w in self.weights:
            w.setflags(write=False)
        for b in self.biases:
            b.setflags(write=False)
        return self

    def predict_batch(self, points: np.ndarray) -> np.ndarray:
        return predict_nn_batch(self, points)

    def input_gradients(self, points: np.ndarray) -> np.ndarray:
        return input_gradient_batch(self, points)

    def to_json_dict(self) -> dict:
        return {
            "config": self.config.to_json_dict(),
            "input_dim": self.input_dim,
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
            "loss_history": self.loss_history,
            "initial_loss": self.initial_loss,
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "NNModel":
        model = cls(
            weights=[np.array(w, dtype=np.float64) for w in obj["weights"]],
            biases=[np.array(b, dtype=np.float64) for b in obj["biases"]],
            config=NNConfig.from_json_dict(obj["config"]),
            input_dim=int(obj["input_dim"]),
            loss_history=list(obj["loss_history"]),
            initial_loss=float(obj["initial_loss"]),
        )
        return model.freeze()


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _check_points(model: NNModel, points: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points.reshape(1, -1)
    if points.ndim != 2 or points.shape[1] != model.input_dim:
        raise ShapeMismatchError(
            f"model expects {model.input_dim}-dimensional points, got shape "
            f"{np.asarray(points).shape}"
        )
    return points


def _forward(model: NNModel, points: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
    """Deterministic forward pass; returns hidden pre-activations and scores."""
    pre_acts = []
    act = points
    for w, b in zip(model.weights[:-1], model.biases[:-1]):
        z = act @ w + b
        pre_acts.append(z)
        act = np.maximum(z, 0.0)
    z_out = act @ model.weights[-1] + model.biases[-1]
    return pre_acts, _sigmoid(z_out[:, 0])


def predict_nn_batch(model: NNModel, points: np.ndarray) -> np.ndarray:
    """Scores in (0, 1) for each row; near 1 = normal, near 0 = anomalous."""
    points = _check_points(model, points)
    _, scores = _forward(model, points)
    return np.clip(scores, SCORE_EPS, 1.0 - SCORE_EPS)


def predict_nn(model: NNModel, point: np.ndarray) -> float:
    """Score one D-vector (dropout off; inference is deterministic)."""
    point = np.asarray(point, dtype=np.float64)
    if point.ndim != 1:
        raise ShapeMismatchError(f"expected a 1-d point, got shape {point.shape}")
    return float(predict_nn_batch(model, point.reshape(1, -1))[0])


def input_gradient_batch(model: NNModel, points: np.ndarray) -> np.ndarray:
    """Exact gradient of the inference forward function, one row per point."""
    points = _check_points(model, points)
    acts = [points]
    pre_acts, scores = _forward(model, points)
    act = points
    for z in pre_acts:
        act = np.maximum(z, 0.0)
        acts.append(act)
    # d score / d z_out, then chain back through ReLU layers (0 at z == 0).
    grad = (scores * (1.0 - scores))[:, None] * model.weights[-1].T
    for w, z in zip(reversed(model.weights[:-1]), reversed(pre_acts)):
        grad = (grad * (z > 0.0)) @ w.T
    return grad


def input_gradient(model: NNModel, point: np.ndarray) -> np.ndarray:
    """Gradient of the score with respect to one input point."""
    point = np.asarray(point, dtype=np.float64)
    if point.ndim != 1:
        raise ShapeMismatchError(f"expected a 1-d point, got shape {point.shape}")
    return input_gradient_batch(model, point.reshape(1, -1))[0]


def stochastic_forward(
    model: NNModel, points: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Training-mode forward pass with fresh inverted-dropout masks."""
    points = _check_points(model, points)
    p_drop = model.config.dropout_prob
    act = points
    for w, b in zip(model.weights[:-1], model.biases[:-1]):
        act = np.maximum(act @ w + b, 0.0)
        if p_drop > 0.0:
            mask = (rng.random(act.shape) >= p_drop) / (1.0 - p_drop)
            act = act * mask
    z_out = act @ model.weights[-1] + model.biases[-1]
    return _sigmoid(z_out[:, 0])


def _bce(scores: np.ndarray, labels: np.ndarray) -> float:
    p = np.clip(scores, SCORE_EPS, 1.0 - SCORE_EPS)
    return float(-np.mean(labels * np.log(p) + (1.0 - labels) * np.log(1.0 - p)))


def train_nn(data: TrainingSet, config: NNConfig) -> NNModel:
    """Train the network on a two-class training set, deterministically per seed.

    One epoch runs steps_per_epoch mini-batches drawn by shuffled cycling
    over the training set (a full pass when steps_per_epoch is None).
    Raises TrainingError naming the epoch if the loss turns non-finite.
    """
    points = np.asarray(data.points, dtype=np.float64)
    labels = np.asarray(data.labels, dtype=np.float64)
    n, dim = points.shape
    classes = np.unique(labels)
    if classes.size < 2:
        raise PreconditionError(
            f"training needs both classes present, got labels {classes.tolist()}"
        )

    rng = np.random.default_rng(config.seed)
    widths = [dim] + [config.layer_width] * config.num_hidden_layers + [1]
    weights = [
        rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out))
        for fan_in, fan_out in zip(widths[:-1], widths[1:])
    ]
    biases = [np.zeros(fan_out) for fan_out in widths[1:]]
    vel_w = [np.zeros_like(w) for w in weights]
    vel_b = [np.zeros_like(b) for b in biases]

    model = NNModel(weights, biases, config, dim)
    model.initial_loss = _bce(predict_nn_batch(model, points), labels)

    steps = config.steps_per_epoch
    if steps is None:
        steps = -(-n // config.batch_size)
    p_drop = config.dropout_prob
    lr = config.learning_rate
    mu = config.momentum
    n_layers = len(weights)

    order = rng.permutation(n)
    cursor = 0
    for epoch in range(config.epochs):
        epoch_loss = 0.0
        for _ in range(steps):
            if cursor >= n:
                order = rng.permutation(n)
                cursor = 0
            batch_idx = order[cursor : cursor + config.batch_size]
            cursor += config.batch_size
            x = points[batch_idx]
            y = labels[batch_idx]

            # Forward with inverted dropout after each ReLU.
            acts = [x]
            pre_acts = []
            masks = []
            act = x
            for w, b in zip(weights[:-1], biases[:-1]):
                z = act @ w + b
                pre_acts.append(z)
                act = np.maximum(z, 0.0)
                if p_drop > 0.0:
                    mask = (rng.random(act.shape) >= p_drop) / (1.0 - p_drop)
                    act = act * mask
                else:
                    mask = None
                masks.append(mask)
                acts.append(act)
            z_out = act @ weights[-1] + biases[-1]
            scores = _sigmoid(z_out[:, 0])
            epoch_loss += _bce(scores, y)

            # Backward: d(mean BCE)/d z_out = (p - y) / batch.
            dz = ((scores - y) / x.shape[0])[:, None]
            for layer in range(n_layers - 1, -1, -1):
                grad_w = acts[layer].T @ dz
                grad_b = dz.sum(axis=0)
                if layer > 0:
                    dact = dz @ weights[layer].T
                    if masks[layer - 1] is not None:
                        dact = dact * masks[layer - 1]
                    dz = dact * (pre_acts[layer - 1] > 0.0)
                vel_w[layer] = mu * vel_w[layer] + grad_w
                vel_b[layer] = mu * vel_b[layer] + grad_b
                weights[layer] -= lr * vel_w[layer]
                biases[layer] -= lr * vel_b[layer]

        epoch_loss /= steps
        if not np.isfinite(epoch_loss):
            raise TrainingError(f"training diverged (non-finite loss) at epoch {epoch}")
        model.loss_history.append(epoch_loss)

    return model.freeze()
