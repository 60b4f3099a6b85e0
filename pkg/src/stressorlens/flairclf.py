"""Multinomial logistic regression for imputing missing flair groups.

Features per post are a fixed concatenation: topic proportions from a
10-topic model, a 200-term TF-IDF sub-vector, and one hyperlink indicator.
Training is full-batch gradient descent on L2-regularized cross-entropy,
which keeps the whole pipeline deterministic without any seeding subtlety.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .corpus import CleanPost, FlairGroup, FlairSource
from .errors import ConfigError, NumericalError
from .matrixio import read_matrix, write_matrix
from .textprep import DocTermMatrix, has_hyperlink
from .topicmodel import LdaModel
from .validation import as_dense_2d, check_finite, check_fitted

CLASS_ORDER = (
    FlairGroup.MENTAL_HEALTH_SUPPORT,
    FlairGroup.DISCUSSION_QUESTIONS,
    FlairGroup.NEWS_RESOURCES,
    FlairGroup.EXPERIENCE,
)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    l2_lambda: float = 1.0
    max_epochs: int = 500
    tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be > 0")
        if self.l2_lambda < 0:
            raise ConfigError("l2_lambda must be >= 0")
        if self.max_epochs < 1:
            raise ConfigError("max_epochs must be >= 1")
        if self.tol < 0:
            raise ConfigError("tol must be >= 0")

    def to_dict(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "l2_lambda": self.l2_lambda,
            "max_epochs": self.max_epochs,
            "tol": self.tol,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        return cls(
            learning_rate=float(d["learning_rate"]),
            l2_lambda=float(d["l2_lambda"]),
            max_epochs=int(d["max_epochs"]),
            tol=float(d["tol"]),
            seed=int(d["seed"]),
        )


@dataclass(frozen=True)
class LogRegModel:
    """Fixed-order four-class softmax classifier with a trailing bias column."""

    classes: tuple[FlairGroup, ...]
    weights: np.ndarray
    train_config: TrainConfig
    loss_trace: tuple[float, ...] = field(default=())

    @property
    def n_features(self) -> int:
        return self.weights.shape[1] - 1


def _augment(X: np.ndarray) -> np.ndarray:
    return np.hstack([X, np.ones((X.shape[0], 1))])


def _softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1)[:, None]
    e = np.exp(shifted)
    return e / e.sum(axis=1)[:, None]


def loss_and_gradient(
    weights: np.ndarray,
    X_aug: np.ndarray,
    Y: np.ndarray,
    l2_lambda: float,
) -> tuple[float, np.ndarray]:
    """Summed cross-entropy plus (lambda/2)*||W||^2 over non-bias columns.

    weights: C x (D+1) with the bias as the last column. X_aug carries the
    matching ones column. Y is one-hot N x C. Returns (loss, gradient of
    the same shape as weights).
    """
    scores = X_aug @ weights.T
    probs = _softmax(scores)
    # log-likelihood via the stable shifted scores
    shifted = scores - scores.max(axis=1)[:, None]
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1))[:, None]
    loss = -float((Y * log_probs).sum())
    reg = weights.copy()
    reg[:, -1] = 0.0
    loss += 0.5 * l2_lambda * float((reg * reg).sum())
    grad = (probs - Y).T @ X_aug + l2_lambda * reg
    return loss, grad


def train(
    features: np.ndarray,
    labels: Sequence[FlairGroup],
    config: TrainConfig = TrainConfig(),
) -> LogRegModel:
    """Full-batch gradient descent from zero weights.

    Stops when the gradient max-norm drops below config.tol or the epoch
    budget runs out. A NaN loss aborts with advice to shrink the step.
    """
    X = check_finite(as_dense_2d(features, "features"), "features")
    labels = list(labels)
    if len(labels) != X.shape[0]:
        raise ValueError(f"{len(labels)} labels for {X.shape[0]} feature rows")
    bad = [str(l) for l in labels if l not in CLASS_ORDER]
    if bad:
        raise ValueError(f"labels outside the four flair classes: {sorted(set(bad))}")
    if len(set(labels)) < 2:
        raise ValueError("need at least two distinct classes to train")

    class_index = {c: i for i, c in enumerate(CLASS_ORDER)}
    Y = np.zeros((X.shape[0], len(CLASS_ORDER)))
    for i, label in enumerate(labels):
        Y[i, class_index[label]] = 1.0

    X_aug = _augment(X)
    weights = np.zeros((len(CLASS_ORDER), X_aug.shape[1]))
    trace: list[float] = []
    for _ in range(config.max_epochs):
        loss, grad = loss_and_gradient(weights, X_aug, Y, config.l2_lambda)
        if not np.isfinite(loss):
            raise NumericalError(
                "training loss diverged to NaN/inf; try a smaller learning rate"
            )
        trace.append(loss)
        if np.abs(grad).max() < config.tol:
            break
        weights = weights - config.learning_rate * grad

    return LogRegModel(
        classes=CLASS_ORDER,
        weights=weights,
        train_config=config,
        loss_trace=tuple(trace),
    )


def predict_proba(model: LogRegModel, features: np.ndarray) -> np.ndarray:
    """Softmax class probabilities; accepts one row or a matrix."""
    X = as_dense_2d(np.atleast_2d(features), "features")
    if X.shape[1] != model.n_features:
        raise ValueError(f"expected {model.n_features} features, got {X.shape[1]}")
    probs = _softmax(_augment(X) @ model.weights.T)
    return probs[0] if np.ndim(features) == 1 else probs


def assemble_features(
    posts: Sequence[CleanPost],
    lda_model: LdaModel,
    tfidf: DocTermMatrix,
    lda_width: int = 10,
    tfidf_width: int = 200,
) -> np.ndarray:
    """Per-post rows [theta | tfidf | hyperlink], aligned by position."""
    theta = lda_model.doc_topic
    if theta.shape != (len(posts), lda_width):
        raise ValueError(
            f"topic proportions shape {theta.shape} does not match "
            f"{len(posts)} posts x {lda_width} topics"
        )
    if tfidf.matrix.shape != (len(posts), tfidf_width):
        raise ValueError(
            f"TF-IDF shape {tfidf.matrix.shape} does not match "
            f"{len(posts)} posts x {tfidf_width} terms"
        )
    links = np.array([[1.0 if has_hyperlink(p.text) else 0.0] for p in posts])
    return np.hstack([theta, tfidf.toarray(), links])


def impute_flairs(
    posts: Sequence[CleanPost],
    model: LogRegModel,
    features: np.ndarray,
) -> list[CleanPost]:
    """Assign the argmax class to every unlabelled post; others pass through."""
    X = as_dense_2d(features, "features")
    if X.shape[0] != len(posts):
        raise ValueError(f"{X.shape[0]} feature rows for {len(posts)} posts")
    out: list[CleanPost] = []
    for i, post in enumerate(posts):
        if post.flair_source is FlairSource.UNLABELLED:
            probs = predict_proba(model, X[i])
            group = model.classes[int(np.argmax(probs))]
            out.append(replace(post, flair_group=group, flair_source=FlairSource.PREDICTED))
        else:
            out.append(post)
    return out


def select_support_subset(posts: Sequence[CleanPost]) -> list[CleanPost]:
    """The mental-health-support posts, labelled or predicted."""
    pending = [p.id for p in posts if p.flair_source is FlairSource.UNLABELLED]
    if pending:
        raise ValueError(
            f"{len(pending)} posts still unlabelled (e.g. {pending[0]}); "
            "run flair imputation first"
        )
    return [p for p in posts if p.flair_group is FlairGroup.MENTAL_HEALTH_SUPPORT]


def save_logreg(model: LogRegModel, directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_matrix(directory / "weights.slmx", model.weights)
    manifest = {
        "classes": [c.value for c in model.classes],
        "train_config": model.train_config.to_dict(),
        "loss_trace": list(model.loss_trace),
    }
    with open(directory / "model.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_logreg(directory: str | Path) -> LogRegModel:
    directory = Path(directory)
    with open(directory / "model.json", "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    return LogRegModel(
        classes=tuple(FlairGroup(c) for c in manifest["classes"]),
        weights=read_matrix(directory / "weights.slmx"),
        train_config=TrainConfig.from_dict(manifest["train_config"]),
        loss_trace=tuple(manifest["loss_trace"]),
    )


class FlairClassifier(BaseEstimator, ClassifierMixin):
    """Estimator facade over the multinomial model.

    y may hold FlairGroup values or their string names; predictions come
    back as FlairGroup values.
    """

    def __init__(
        self,
        learning_rate: float = 0.1,
        l2_lambda: float = 1.0,
        max_epochs: int = 500,
        tol: float = 1e-6,
        seed: int = 0,
    ):
        self.learning_rate = learning_rate
        self.l2_lambda = l2_lambda
        self.max_epochs = max_epochs
        self.tol = tol
        self.seed = seed

    def fit(self, X, y) -> "FlairClassifier":
        labels = [FlairGroup(v) for v in y]
        config = TrainConfig(
            learning_rate=self.learning_rate,
            l2_lambda=self.l2_lambda,
            max_epochs=self.max_epochs,
            tol=self.tol,
            seed=self.seed,
        )
        self.model_ = train(as_dense_2d(X), labels, config)
        self.classes_ = np.array([c.value for c in CLASS_ORDER], dtype=object)
        return self

    def predict_proba(self, X) -> np.ndarray:
        check_fitted(self, "model_")
        return predict_proba(self.model_, as_dense_2d(X))

    def predict(self, X) -> np.ndarray:
        probs = self.predict_proba(X)
        picks = np.argmax(probs, axis=1)
        return np.array([CLASS_ORDER[i] for i in picks], dtype=object)
