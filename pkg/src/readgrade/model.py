"""Multinomial logistic-regression grade classifier.

Training is full-batch gradient descent from zero weights over z-scored
features, which makes every run reproducible.  All reductions over training
rows sum their terms in sorted value order, so permuting the rows cannot
change a single bit of the result.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .corpus import GradeLevel
from .errors import (
    DivergenceError,
    FormatError,
    ModelFormatError,
    ValidationError,
)

_MODEL_FORMAT = "grade-model"
_MODEL_VERSION = 1


def _ordered_sum(a: np.ndarray, axis: int = 0) -> np.ndarray:
    # sort before reducing: the sum is then invariant to input order
    return np.sum(np.sort(a, axis=axis), axis=axis)


@dataclass(frozen=True)
class Standardizer:
    """Per-column z-score parameters fitted on the training matrix."""

    means: np.ndarray
    stds: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "means", np.asarray(self.means, dtype=float))
        object.__setattr__(self, "stds", np.asarray(self.stds, dtype=float))
        if self.means.shape != self.stds.shape or self.means.ndim != 1:
            raise ValidationError("standardizer means/stds must be equal-length vectors")
        if np.any(self.stds <= 0):
            raise ValidationError("standardizer stds must be strictly positive")

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (x - self.means) / self.stds


def fit_standardizer(X, feature_names=None) -> Standardizer:
    """Fit column means and population stds; constant columns are rejected."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValidationError("standardizer needs a matrix with at least 2 rows")
    n = X.shape[0]
    means = np.empty(X.shape[1])
    stds = np.empty(X.shape[1])
    for j in range(X.shape[1]):
        col = X[:, j]
        mean = float(_ordered_sum(col) / n)
        var = float(_ordered_sum((col - mean) ** 2) / n)
        std = var ** 0.5
        if std == 0.0:
            name = feature_names[j] if feature_names else f"column {j}"
            raise ValidationError(f"constant feature {name}: cannot standardize")
        means[j] = mean
        stds[j] = std
    return Standardizer(means=means, stds=stds)


def apply_standardizer(s: Standardizer, x) -> np.ndarray:
    return s.apply(x)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 2000
    l2_lambda: float = 1e-3
    tolerance: float = 1e-6
    seed: int = 0  # reserved for data shuffling; full-batch descent ignores it

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValidationError("learning_rate must be positive")
        if self.epochs <= 0:
            raise ValidationError("epochs must be positive")
        if self.l2_lambda < 0:
            raise ValidationError("l2_lambda must be non-negative")
        if self.tolerance <= 0:
            raise ValidationError("tolerance must be positive")


@dataclass(frozen=True)
class GradePosterior:
    """Class probabilities over the model's grade levels."""

    probs: dict[GradeLevel, float]

    def __post_init__(self):
        total = sum(self.probs.values())
        if any(p < 0 for p in self.probs.values()) or abs(total - 1.0) > 1e-9:
            raise ValidationError(f"posterior is not a distribution (sum={total})")

    def expected_grade(self) -> float:
        return sum(g.value * p for g, p in sorted(self.probs.items()))

    def argmax_grade(self) -> GradeLevel:
        # ties break toward the lower grade
        best = None
        best_p = -1.0
        for g in sorted(self.probs):
            if self.probs[g] > best_p:
                best, best_p = g, self.probs[g]
        return best


@dataclass(frozen=True)
class GradeModel:
    classes: tuple[GradeLevel, ...]
    weights: np.ndarray  # |classes| x (n_features + 1), bias column last
    selected: tuple[str, ...]
    standardizer: Standardizer
    train_config: TrainConfig
    loss_history: tuple[float, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        if self.weights.shape != (len(self.classes), len(self.selected) + 1):
            raise ValidationError(
                f"weight matrix shape {self.weights.shape} does not match "
                f"{len(self.classes)} classes x {len(self.selected)}+1 features"
            )


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def _augment(X: np.ndarray) -> np.ndarray:
    return np.hstack([X, np.ones((X.shape[0], 1))])


def loss_and_gradient(weights, X, y_onehot, l2_lambda: float):
    """Mean softmax cross-entropy with L2 penalty (bias excluded) and its gradient.

    ``weights`` is (classes x features+1) with the bias column last; ``X``
    is the raw (rows x features) matrix without a bias column.
    """
    W = np.asarray(weights, dtype=float)
    X = np.asarray(X, dtype=float)
    Y = np.asarray(y_onehot, dtype=float)
    n = X.shape[0]
    # overflow here signals divergence, which the caller detects via isfinite
    with np.errstate(over="ignore", invalid="ignore"):
        Xb = _augment(X)
        logits = Xb @ W.T
        shifted = logits - logits.max(axis=1, keepdims=True)
        log_p = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
        P = np.exp(log_p)
        ce_terms = -(Y * log_p).sum(axis=1)
        data_loss = float(_ordered_sum(ce_terms) / n)
        penalty_mask = np.ones_like(W)
        penalty_mask[:, -1] = 0.0
        penalty = 0.5 * l2_lambda * float(np.sum((W * penalty_mask) ** 2))
        loss = data_loss + penalty

        diff = P - Y  # n x classes
        contributions = diff[:, :, None] * Xb[:, None, :]  # n x classes x features+1
        grad = _ordered_sum(contributions, axis=0) / n
        grad = grad + l2_lambda * W * penalty_mask
    return loss, grad


def train(X, grades, selected, cfg: TrainConfig | None = None) -> GradeModel:
    """Fit the classifier with deterministic full-batch gradient descent.

    Stops at the epoch cap or when the gradient Frobenius norm drops below
    the configured tolerance.  Raises on single-class data and on numeric
    divergence.
    """
    cfg = cfg or TrainConfig()
    X = np.asarray(X, dtype=float)
    grade_list = [g if isinstance(g, GradeLevel) else GradeLevel.from_value(g) for g in grades]
    if X.ndim != 2 or X.shape[0] != len(grade_list):
        raise ValidationError(f"matrix shape {X.shape} does not match {len(grade_list)} grades")
    if X.shape[1] != len(selected):
        raise ValidationError(
            f"matrix has {X.shape[1]} columns for {len(selected)} selected features"
        )
    classes = tuple(sorted(set(grade_list)))
    if len(classes) < 2:
        raise ValidationError("training data must contain at least 2 grade classes")
    if X.shape[0] < len(classes):
        raise ValidationError("training data needs at least as many rows as classes")

    standardizer = fit_standardizer(X, feature_names=list(selected))
    Xs = standardizer.apply(X)
    class_index = {g: i for i, g in enumerate(classes)}
    Y = np.zeros((X.shape[0], len(classes)))
    for i, g in enumerate(grade_list):
        Y[i, class_index[g]] = 1.0

    W = np.zeros((len(classes), X.shape[1] + 1))
    history = []
    for _ in range(cfg.epochs):
        loss, grad = loss_and_gradient(W, Xs, Y, cfg.l2_lambda)
        if not np.isfinite(loss):
            raise DivergenceError(
                "training diverged to a non-finite loss; lower the learning rate"
            )
        history.append(loss)
        gnorm = float(np.sqrt(np.sum(grad * grad)))
        if gnorm < cfg.tolerance:
            break
        W = W - cfg.learning_rate * grad

    return GradeModel(
        classes=classes,
        weights=W,
        selected=tuple(selected),
        standardizer=standardizer,
        train_config=cfg,
        loss_history=tuple(history),
    )


def _vector_for(model: GradeModel, feature_values) -> np.ndarray:
    attr = getattr(feature_values, "values", None)
    values = attr if isinstance(attr, dict) else feature_values
    out = []
    for code in model.selected:
        if code not in values:
            raise ValidationError(f"feature vector is missing selected code {code!r}")
        out.append(float(values[code]))
    return np.asarray(out)


def predict_posterior(model: GradeModel, feature_values) -> GradePosterior:
    """Class posterior for one document's feature values (vector or mapping)."""
    x = model.standardizer.apply(_vector_for(model, feature_values))
    logits = model.weights @ np.append(x, 1.0)
    probs = _softmax(logits)
    return GradePosterior(probs={g: float(p) for g, p in zip(model.classes, probs)})


def predict_grade(model: GradeModel, feature_values) -> tuple[float, GradeLevel]:
    """(expected grade, argmax grade) under the posterior."""
    posterior = predict_posterior(model, feature_values)
    return posterior.expected_grade(), posterior.argmax_grade()


def save_model(model: GradeModel) -> str:
    """Serialize to versioned JSON text; floats round-trip exactly."""
    payload = {
        "format": _MODEL_FORMAT,
        "version": _MODEL_VERSION,
        "classes": [g.label for g in model.classes],
        "selected": list(model.selected),
        "means": model.standardizer.means.tolist(),
        "stds": model.standardizer.stds.tolist(),
        "weights": model.weights.tolist(),
        "train_config": {
            "learning_rate": model.train_config.learning_rate,
            "epochs": model.train_config.epochs,
            "l2_lambda": model.train_config.l2_lambda,
            "tolerance": model.train_config.tolerance,
            "seed": model.train_config.seed,
        },
    }
    return json.dumps(payload, indent=2) + "\n"


def load_model(stream) -> GradeModel:
    """Inverse of :func:`save_model`; validates format tag and version."""
    text = stream.read() if hasattr(stream, "read") else stream
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"model file is not valid JSON: {exc.msg}") from None
    if not isinstance(payload, dict) or payload.get("format") != _MODEL_FORMAT:
        raise ModelFormatError("not a grade-model file")
    if payload.get("version") != _MODEL_VERSION:
        raise ModelFormatError(
            f"unsupported model version {payload.get('version')!r}, expected {_MODEL_VERSION}"
        )
    try:
        classes = tuple(GradeLevel.from_string(s) for s in payload["classes"])
        cfg = TrainConfig(**payload["train_config"])
        model = GradeModel(
            classes=classes,
            weights=np.asarray(payload["weights"], dtype=float),
            selected=tuple(payload["selected"]),
            standardizer=Standardizer(
                means=np.asarray(payload["means"], dtype=float),
                stds=np.asarray(payload["stds"], dtype=float),
            ),
            train_config=cfg,
        )
    except (KeyError, TypeError) as exc:
        raise ModelFormatError(f"model file is missing or mistypes a field: {exc}") from None
    return model
