"""Transition classifier: two dense layers over pair features.

Hidden layer is 256 ReLU units by default; the output layer has one unit per
transition label. Training minimizes categorical cross-entropy with RMSprop.
The output activation is softmax by default; elementwise sigmoid is available
to match pipelines that used it, with losses computed on renormalized scores.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator

from panelscope.agreement import ConfusionMatrix, KappaScore, cohen_kappa
from panelscope.corpus import LABELS, N_LABELS, TransitionLabel
from panelscope.errors import (
    DegenerateDistributionError,
    EmptyInputError,
    ValidationError,
)

_CKPT_MAGIC = b"PSCKPT1\n"


@dataclass
class MlpParams:
    W1: np.ndarray  # (input_dim, hidden)
    b1: np.ndarray  # (hidden,)
    W2: np.ndarray  # (hidden, n_classes)
    b2: np.ndarray  # (n_classes,)

    def copy(self) -> "MlpParams":
        return MlpParams(self.W1.copy(), self.b1.copy(), self.W2.copy(), self.b2.copy())

    def arrays(self) -> list[np.ndarray]:
        return [self.W1, self.b1, self.W2, self.b2]


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    rmsprop_decay: float = 0.9
    rmsprop_epsilon: float = 1e-8
    epochs_per_round: int = 10
    batch_size: int = 32
    output_activation: str = "softmax"
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValidationError("learning_rate must be positive")
        if not 0 < self.rmsprop_decay < 1:
            raise ValidationError("rmsprop_decay must be in (0, 1)")
        if self.rmsprop_epsilon <= 0:
            raise ValidationError("rmsprop_epsilon must be positive")
        if self.epochs_per_round <= 0 or self.batch_size <= 0:
            raise ValidationError("epochs_per_round and batch_size must be positive")
        if self.output_activation not in ("softmax", "sigmoid"):
            raise ValidationError("output_activation must be 'softmax' or 'sigmoid'")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in d.items() if k in known})


@dataclass(frozen=True)
class Prediction:
    pair: object
    scores: np.ndarray
    label: TransitionLabel


@dataclass
class RmsPropState:
    accumulators: list[np.ndarray] = field(default_factory=list)

    @classmethod
    def zeros_like(cls, params: MlpParams) -> "RmsPropState":
        return cls([np.zeros_like(a) for a in params.arrays()])


def init_params(seed: int, input_dim: int, hidden: int = 256, n_classes: int = N_LABELS) -> MlpParams:
    """Glorot-uniform weights (limit sqrt(6/(fan_in+fan_out))), zero biases."""
    if input_dim <= 0:
        raise ValidationError("input_dim must be positive")
    rng = np.random.default_rng(seed)
    lim1 = np.sqrt(6.0 / (input_dim + hidden))
    lim2 = np.sqrt(6.0 / (hidden + n_classes))
    return MlpParams(
        rng.uniform(-lim1, lim1, size=(input_dim, hidden)),
        np.zeros(hidden),
        rng.uniform(-lim2, lim2, size=(hidden, n_classes)),
        np.zeros(n_classes),
    )


def _softmax(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def forward(params: MlpParams, x: np.ndarray, activation: str = "softmax") -> np.ndarray:
    """Score vector(s) for one pair feature or a batch of them."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = x[None, :] if single else x
    if X.shape[1] != params.W1.shape[0]:
        raise ValidationError(
            f"input dim {X.shape[1]} does not match W1 input side {params.W1.shape[0]}"
        )
    h = np.maximum(0.0, X @ params.W1 + params.b1)
    z = h @ params.W2 + params.b2
    if activation == "softmax":
        s = _softmax(z)
    elif activation == "sigmoid":
        s = _sigmoid(z)
    else:
        raise ValidationError(f"unknown activation {activation!r}")
    return s[0] if single else s


def cross_entropy(scores: np.ndarray, target: np.ndarray) -> float:
    """Categorical cross-entropy of one score vector against a one-hot target."""
    target = np.asarray(target, dtype=float)
    if not (np.isin(target, (0.0, 1.0)).all() and target.sum() == 1.0):
        raise ValidationError("target must be one-hot")
    s = np.clip(np.asarray(scores, dtype=float), 1e-12, 1.0)
    return float(-(target * np.log(s)).sum())


def _batch_loss(scores: np.ndarray, T: np.ndarray, activation: str) -> float:
    s = scores
    if activation == "sigmoid":
        s = s / s.sum(axis=1, keepdims=True)
    s = np.clip(s, 1e-12, 1.0)
    return float(-(T * np.log(s)).sum(axis=1).mean())


def gradients(
    params: MlpParams, X: np.ndarray, T: np.ndarray, activation: str = "softmax"
) -> MlpParams:
    """Mean gradient of the batch cross-entropy loss, in MlpParams shapes.

    ReLU subgradient at exactly 0 is taken as 0.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    T = np.atleast_2d(np.asarray(T, dtype=float))
    if X.shape[0] == 0:
        raise EmptyInputError("gradient batch must be non-empty")
    if X.shape[0] != T.shape[0] or T.shape[1] != params.W2.shape[1]:
        raise ValidationError("batch shapes do not match parameters")
    n = X.shape[0]
    a1 = X @ params.W1 + params.b1
    h = np.maximum(0.0, a1)
    z = h @ params.W2 + params.b2
    if activation == "softmax":
        s = _softmax(z)
        dz = (s - T) / n
    else:
        # loss is CE on sigmoid scores renormalized to sum 1
        p = np.clip(_sigmoid(z), 1e-12, 1.0 - 1e-12)
        total = p.sum(axis=1, keepdims=True)
        dp = (-T / p + 1.0 / total) / n
        dz = dp * p * (1.0 - p)
    dW2 = h.T @ dz
    db2 = dz.sum(axis=0)
    dh = dz @ params.W2.T
    dh[a1 <= 0] = 0.0
    dW1 = X.T @ dh
    db1 = dh.sum(axis=0)
    return MlpParams(dW1, db1, dW2, db2)


def rmsprop_step(
    params: MlpParams, grads: MlpParams, state: RmsPropState, config: TrainConfig
) -> None:
    """One in-place RMSprop update: s <- rho*s + (1-rho)*g^2; p -= lr*g/(sqrt(s)+eps)."""
    rho = config.rmsprop_decay
    for p, g, s in zip(params.arrays(), grads.arrays(), state.accumulators):
        s *= rho
        s += (1.0 - rho) * g * g
        p -= config.learning_rate * g / (np.sqrt(s) + config.rmsprop_epsilon)


def one_hot(y: np.ndarray, n_classes: int = N_LABELS) -> np.ndarray:
    y = np.asarray(y, dtype=int)
    T = np.zeros((y.size, n_classes))
    T[np.arange(y.size), y] = 1.0
    return T


def train(
    params: MlpParams,
    X: np.ndarray,
    y: np.ndarray,
    config: TrainConfig,
    state: RmsPropState | None = None,
    rng: np.random.Generator | None = None,
    epochs: int | None = None,
) -> list[dict]:
    """Shuffled mini-batch RMSprop; returns per-epoch loss/accuracy history."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if X.shape[0] == 0:
        raise EmptyInputError("training set must be non-empty")
    if state is None:
        state = RmsPropState.zeros_like(params)
    if rng is None:
        rng = np.random.default_rng(config.seed)
    T = one_hot(y, params.b2.size)
    n = X.shape[0]
    history = []
    for epoch in range(epochs if epochs is not None else config.epochs_per_round):
        order = rng.permutation(n)
        losses = []
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            scores = forward(params, X[idx], config.output_activation)
            losses.append(_batch_loss(scores, T[idx], config.output_activation))
            grads = gradients(params, X[idx], T[idx], config.output_activation)
            rmsprop_step(params, grads, state, config)
        preds = predict_labels(params, X, config.output_activation)
        history.append(
            {
                "epoch": epoch,
                "loss": float(np.mean(losses)),
                "accuracy": float((preds == y).mean()),
            }
        )
    return history


def predict_labels(params: MlpParams, X: np.ndarray, activation: str = "softmax") -> np.ndarray:
    """Argmax class indices; ties break to the lowest label index."""
    scores = np.atleast_2d(forward(params, X, activation))
    return scores.argmax(axis=1)


class TransitionClassifier(BaseEstimator):
    """sklearn-style estimator wrapping the two-layer network.

    ``fit`` initializes weights and runs one round of training; ``train_more``
    continues from the current weights and optimizer state (warm start across
    feedback rounds).
    """

    def __init__(
        self,
        hidden_units: int = 256,
        learning_rate: float = 1e-3,
        rmsprop_decay: float = 0.9,
        rmsprop_epsilon: float = 1e-8,
        epochs_per_round: int = 10,
        batch_size: int = 32,
        output_activation: str = "softmax",
        seed: int = 0,
    ):
        self.hidden_units = hidden_units
        self.learning_rate = learning_rate
        self.rmsprop_decay = rmsprop_decay
        self.rmsprop_epsilon = rmsprop_epsilon
        self.epochs_per_round = epochs_per_round
        self.batch_size = batch_size
        self.output_activation = output_activation
        self.seed = seed

    def _config(self) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.learning_rate,
            rmsprop_decay=self.rmsprop_decay,
            rmsprop_epsilon=self.rmsprop_epsilon,
            epochs_per_round=self.epochs_per_round,
            batch_size=self.batch_size,
            output_activation=self.output_activation,
            seed=self.seed,
        )

    def initialize(self, input_dim: int) -> "TransitionClassifier":
        self.params_ = init_params(self.seed, input_dim, self.hidden_units)
        self.state_ = RmsPropState.zeros_like(self.params_)
        self.rng_ = np.random.default_rng(self.seed)
        self.history_: list[dict] = []
        return self

    def fit(self, X: np.ndarray, y: np.ndarray) -> "TransitionClassifier":
        X = np.asarray(X, dtype=float)
        self.initialize(X.shape[1])
        return self.train_more(X, y)

    def train_more(
        self, X: np.ndarray, y: np.ndarray, epochs: int | None = None
    ) -> "TransitionClassifier":
        self._check_fitted()
        self.history_.extend(
            train(self.params_, X, y, self._config(), self.state_, self.rng_, epochs)
        )
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        self._check_fitted()
        return predict_labels(self.params_, X, self.output_activation)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        self._check_fitted()
        return np.atleast_2d(forward(self.params_, X, self.output_activation))

    def _check_fitted(self):
        if not hasattr(self, "params_"):
            raise ValidationError("classifier is not fitted; call fit or initialize first")


def evaluate(
    clf: TransitionClassifier, X: np.ndarray, y: np.ndarray
) -> tuple[float, ConfusionMatrix, KappaScore]:
    """Accuracy, prediction-vs-truth confusion, and kappa treating them as raters."""
    y = np.asarray(y, dtype=int)
    if y.size == 0:
        raise EmptyInputError("evaluation set must be non-empty")
    preds = clf.predict(X)
    counts = np.zeros((N_LABELS, N_LABELS), dtype=np.int64)
    for p, t in zip(preds, y):
        counts[p, t] += 1
    m = ConfusionMatrix(counts)
    accuracy = float((preds == y).mean())
    kappa = safe_kappa(m)
    return accuracy, m, kappa


def safe_kappa(m: ConfusionMatrix) -> KappaScore:
    """cohen_kappa, mapping the degenerate constant-agreement case to kappa=1."""
    try:
        return cohen_kappa(m)
    except DegenerateDistributionError:
        # both raters constant on the same label: observed agreement is perfect
        return KappaScore(1.0, 1.0, 1.0, "almost perfect")


def save_checkpoint(clf: TransitionClassifier, path: str | Path) -> None:
    """Binary checkpoint: magic, length-prefixed JSON header, float64 payload."""
    clf._check_fitted()
    p = clf.params_
    header = {
        "input_dim": int(p.W1.shape[0]),
        "hidden_units": int(p.W1.shape[1]),
        "n_classes": int(p.W2.shape[1]),
        "activation": clf.output_activation,
        "seed": clf.seed,
        "config": clf._config().to_dict(),
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with Path(path).open("wb") as f:
        f.write(_CKPT_MAGIC)
        f.write(struct.pack("<I", len(blob)))
        f.write(blob)
        for a in p.arrays() + clf.state_.accumulators:
            f.write(np.ascontiguousarray(a, dtype=np.float64).tobytes())


def load_checkpoint(path: str | Path) -> TransitionClassifier:
    with Path(path).open("rb") as f:
        magic = f.read(len(_CKPT_MAGIC))
        if magic != _CKPT_MAGIC:
            raise ValidationError(f"not a checkpoint file: {path}")
        (hlen,) = struct.unpack("<I", f.read(4))
        header = json.loads(f.read(hlen).decode("utf-8"))
        payload = f.read()
    d, h, c = header["input_dim"], header["hidden_units"], header["n_classes"]
    shapes = [(d, h), (h,), (h, c), (c,)]
    shapes += shapes  # parameters then optimizer accumulators
    arrays = []
    offset = 0
    for shape in shapes:
        n = int(np.prod(shape))
        arrays.append(
            np.frombuffer(payload, dtype=np.float64, count=n, offset=offset)
            .reshape(shape)
            .copy()
        )
        offset += n * 8
    clf = TransitionClassifier(**{**header["config"], "hidden_units": h})
    clf.params_ = MlpParams(*arrays[:4])
    clf.state_ = RmsPropState(arrays[4:])
    clf.rng_ = np.random.default_rng(clf.seed)
    clf.history_ = []
    return clf


def prediction_records(pairs, scores: np.ndarray) -> list[dict]:
    """JSON-ready prediction records for a batch of pairs."""
    out = []
    scores = np.atleast_2d(scores)
    for pair, s in zip(pairs, scores):
        out.append(
            {
                "pair": pair.to_dict(),
                "scores": [float(v) for v in s],
                "label": LABELS[int(s.argmax())].name,
            }
        )
    return out
