"""Binary classifiers over sparse feature vectors.

Two models, both operating on the :class:`~nssidetect.vectorize.SparseVector`
representation so that counts, TF-IDF weights and topic mixtures are
interchangeable:

* multinomial naive Bayes with additive smoothing, generalized to
  non-negative real feature weights (fractional weights contribute
  fractionally to the class-conditional totals), and
* L2-regularized logistic regression fit by full-batch gradient descent with
  a backtracking (Armijo) line search.

The class order everywhere is ``(negative, positive)``; score ties and
probability 0.5 resolve to ``positive``, which is the deliberate operating
choice for a screening task where misses are costlier than false alarms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import LABELS, NEGATIVE, POSITIVE
from .jsonio import dump_json, load_json
from .vectorize import SparseVector, to_csr

MODEL_SCHEMA_VERSION = 1


def _validate_labels(vectors: Sequence[SparseVector], labels: Sequence[str]) -> np.ndarray:
    if len(vectors) != len(labels):
        raise ValueError(f"{len(vectors)} vectors but {len(labels)} labels")
    if not vectors:
        raise ValueError("training set is empty")
    dim = vectors[0].dim
    if any(v.dim != dim for v in vectors):
        raise ValueError("all training vectors must share the same dimension")
    y = np.zeros(len(labels))
    for i, label in enumerate(labels):
        if label not in LABELS:
            raise ValueError(f"unknown label {label!r}")
        y[i] = 1.0 if label == POSITIVE else 0.0
    if y.min() == y.max():
        raise ValueError("training set contains a single class; need both")
    return y


@dataclass(frozen=True, eq=False)
class NBModel:
    """Multinomial naive Bayes: log priors and per-class log feature rates."""

    log_prior: np.ndarray  # shape (2,), class order (negative, positive)
    log_theta: np.ndarray  # shape (2, n_features)
    smoothing: float

    def __post_init__(self) -> None:
        log_prior = np.asarray(self.log_prior, dtype=np.float64)
        log_theta = np.asarray(self.log_theta, dtype=np.float64)
        object.__setattr__(self, "log_prior", log_prior)
        object.__setattr__(self, "log_theta", log_theta)
        if log_prior.shape != (2,):
            raise ValueError("log_prior must have shape (2,)")
        if log_theta.ndim != 2 or log_theta.shape[0] != 2:
            raise ValueError("log_theta must have shape (2, n_features)")
        if abs(math.fsum(np.exp(log_prior).tolist()) - 1.0) > 1e-12:
            raise ValueError("class priors must sum to 1 within 1e-12")
        row_sums = np.exp(log_theta).sum(axis=1)
        if np.any(np.abs(row_sums - 1.0) > 1e-9):
            raise ValueError("per-class feature rates must sum to 1 within 1e-9")
        if self.smoothing <= 0.0:
            raise ValueError(f"smoothing must be positive, got {self.smoothing}")

    @property
    def n_features(self) -> int:
        return self.log_theta.shape[1]


@dataclass(frozen=True, eq=False)
class LRModel:
    """Logistic regression weights for the positive class."""

    weights: np.ndarray
    bias: float
    lam: float
    tol: float
    max_iter: int
    converged: bool
    iterations_used: int
    loss_history: tuple[float, ...] = field(default=(), repr=False)

    def __post_init__(self) -> None:
        weights = np.asarray(self.weights, dtype=np.float64)
        object.__setattr__(self, "weights", weights)
        if weights.ndim != 1:
            raise ValueError("weights must be a 1-d array")
        if not np.all(np.isfinite(weights)) or not math.isfinite(self.bias):
            raise ValueError("model parameters must be finite")
        if self.lam < 0:
            raise ValueError(f"lambda must be non-negative, got {self.lam}")

    @property
    def n_features(self) -> int:
        return self.weights.shape[0]


def train_nb(
    vectors: Sequence[SparseVector], labels: Sequence[str], smoothing: float = 1.0
) -> NBModel:
    """Fit naive Bayes from per-class weight totals.

    ``theta[c][i] = (S_ci + smoothing) / (S_c + smoothing * n_features)``
    where ``S_ci`` is the summed weight of feature ``i`` over class ``c``.
    """
    if smoothing <= 0.0:
        raise ValueError(f"smoothing must be positive, got {smoothing}")
    y = _validate_labels(vectors, labels)
    dim = vectors[0].dim
    if dim == 0:
        raise ValueError("feature dimension is zero")
    totals = np.zeros((2, dim))
    class_counts = np.zeros(2)
    for vector, y_i in zip(vectors, y):
        c = int(y_i)
        class_counts[c] += 1
        for idx, w in vector.entries:
            totals[c, idx] += w
    log_prior = np.log(class_counts / class_counts.sum())
    denom = totals.sum(axis=1, keepdims=True) + smoothing * dim
    log_theta = np.log((totals + smoothing) / denom)
    return NBModel(log_prior=log_prior, log_theta=log_theta, smoothing=smoothing)


def nb_log_scores(model: NBModel, vector: SparseVector) -> np.ndarray:
    """Unnormalized log posterior per class, order (negative, positive)."""
    if vector.dim != model.n_features:
        raise ValueError(
            f"vector dim {vector.dim} does not match model features {model.n_features}"
        )
    scores = model.log_prior.copy()
    for idx, w in vector.entries:
        scores = scores + w * model.log_theta[:, idx]
    return scores


def _sigmoid(z: np.ndarray | float) -> np.ndarray | float:
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z, dtype=np.float64)))


def _softplus(z: np.ndarray) -> np.ndarray:
    # log(1 + e^z), stable for large |z|
    return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))


def lr_objective(
    weights: np.ndarray,
    bias: float,
    vectors: Sequence[SparseVector],
    labels: Sequence[str],
    lam: float = 1.0,
) -> float:
    """Mean negative log-likelihood plus ``lam/(2n) * ||w||^2`` (bias excluded)."""
    y = _validate_labels(vectors, labels)
    X = to_csr(vectors)
    z = X @ weights + bias
    return _objective_from_margin(z, y, weights, lam)


def _objective_from_margin(z: np.ndarray, y: np.ndarray, w: np.ndarray, lam: float) -> float:
    n = y.shape[0]
    nll = float(np.mean(_softplus(z) - y * z))
    reg = 0.5 * lam / n * float(w @ w)
    value = nll + reg
    if not math.isfinite(value):
        raise ValueError("non-finite loss encountered")
    return value


def lr_gradient(
    weights: np.ndarray,
    bias: float,
    vectors: Sequence[SparseVector],
    labels: Sequence[str],
    lam: float = 1.0,
) -> tuple[np.ndarray, float]:
    """Gradient of :func:`lr_objective` with respect to (weights, bias)."""
    y = _validate_labels(vectors, labels)
    X = to_csr(vectors)
    n = y.shape[0]
    z = X @ weights + bias
    residual = (_sigmoid(z) - y) / n
    grad_w = X.T @ residual + (lam / n) * weights
    grad_b = float(residual.sum())
    return grad_w, grad_b


def train_lr(
    vectors: Sequence[SparseVector],
    labels: Sequence[str],
    lam: float = 1.0,
    tol: float = 1e-6,
    max_iter: int = 1000,
) -> LRModel:
    """Fit logistic regression by gradient descent with backtracking line search.

    Starts from zero weights; each step minimizes along the negative gradient
    until the Armijo condition holds, so the recorded loss history never
    increases.  Convergence is declared when the gradient's infinity norm
    drops below ``tol``.
    """
    if lam < 0:
        raise ValueError(f"lambda must be non-negative, got {lam}")
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be at least 1, got {max_iter}")
    y = _validate_labels(vectors, labels)
    X = to_csr(vectors)
    n, dim = X.shape
    w = np.zeros(dim)
    b = 0.0
    z = np.zeros(n)
    f = _objective_from_margin(z, y, w, lam)
    losses = [f]
    converged = False
    iterations = 0
    step = 1.0
    for _ in range(max_iter):
        residual = (_sigmoid(z) - y) / n
        grad_w = X.T @ residual + (lam / n) * w
        grad_b = float(residual.sum())
        grad_norm = max(float(np.max(np.abs(grad_w))) if dim else 0.0, abs(grad_b))
        if grad_norm < tol:
            converged = True
            break
        d_z = X @ grad_w + grad_b  # margin change per unit step along -grad
        gg = float(grad_w @ grad_w) + grad_b * grad_b
        step = min(step * 2.0, 1e6)
        accepted = False
        while step > 1e-20:
            w_new = w - step * grad_w
            b_new = b - step * grad_b
            f_new = _objective_from_margin(z - step * d_z, y, w_new, lam)
            if f_new <= f - 1e-4 * step * gg:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break  # flat to machine precision; cannot make progress
        w, b = w_new, b_new
        z = X @ w + b
        f = min(f_new, _objective_from_margin(z, y, w, lam))
        losses.append(f)
        iterations += 1
    return LRModel(
        weights=w,
        bias=b,
        lam=lam,
        tol=tol,
        max_iter=max_iter,
        converged=converged,
        iterations_used=iterations,
        loss_history=tuple(losses),
    )


def lr_probability(model: LRModel, vector: SparseVector) -> float:
    """P(positive | vector) under the logistic model."""
    if vector.dim != model.n_features:
        raise ValueError(
            f"vector dim {vector.dim} does not match model features {model.n_features}"
        )
    z = model.bias
    for idx, w in vector.entries:
        z += w * model.weights[idx]
    return float(_sigmoid(z))


def positive_score(model: "NBModel | LRModel", vector: SparseVector) -> float:
    """P(positive | vector); for NB via the normalized posterior."""
    if isinstance(model, NBModel):
        scores = nb_log_scores(model, vector)
        return float(_sigmoid(scores[1] - scores[0]))
    if isinstance(model, LRModel):
        return lr_probability(model, vector)
    raise TypeError(f"unsupported model type {type(model).__name__}")


def predict(model: "NBModel | LRModel", vector: SparseVector) -> str:
    """Predicted label; ties and probability exactly 0.5 go to positive."""
    if isinstance(model, NBModel):
        scores = nb_log_scores(model, vector)
        return POSITIVE if scores[1] >= scores[0] else NEGATIVE
    if isinstance(model, LRModel):
        return POSITIVE if lr_probability(model, vector) >= 0.5 else NEGATIVE
    raise TypeError(f"unsupported model type {type(model).__name__}")


def model_to_json_obj(model: "NBModel | LRModel") -> dict:
    if isinstance(model, NBModel):
        return {
            "version": MODEL_SCHEMA_VERSION,
            "kind": "nb",
            "classes": list(LABELS),
            "log_prior": model.log_prior,
            "log_theta": model.log_theta,
            "smoothing": model.smoothing,
        }
    if isinstance(model, LRModel):
        return {
            "version": MODEL_SCHEMA_VERSION,
            "kind": "lr",
            "classes": list(LABELS),
            "weights": model.weights,
            "bias": model.bias,
            "lambda": model.lam,
            "tol": model.tol,
            "max_iter": model.max_iter,
            "converged": model.converged,
            "iterations_used": model.iterations_used,
        }
    raise TypeError(f"unsupported model type {type(model).__name__}")


def model_from_json_obj(obj: dict) -> "NBModel | LRModel":
    if not isinstance(obj, dict) or obj.get("version") != MODEL_SCHEMA_VERSION:
        raise ValueError("unsupported model file (missing or wrong 'version')")
    kind = obj.get("kind")
    if kind == "nb":
        return NBModel(
            log_prior=np.array(obj["log_prior"], dtype=np.float64),
            log_theta=np.array(obj["log_theta"], dtype=np.float64),
            smoothing=float(obj["smoothing"]),
        )
    if kind == "lr":
        return LRModel(
            weights=np.array(obj["weights"], dtype=np.float64),
            bias=float(obj["bias"]),
            lam=float(obj["lambda"]),
            tol=float(obj["tol"]),
            max_iter=int(obj["max_iter"]),
            converged=bool(obj["converged"]),
            iterations_used=int(obj["iterations_used"]),
        )
    raise ValueError(f"unknown model kind {kind!r}")


def save_model(model: "NBModel | LRModel", path: str | Path, extra: dict | None = None) -> None:
    """Write a model file; ``extra`` lets callers attach pairing metadata."""
    obj = model_to_json_obj(model)
    if extra:
        overlap = set(extra) & set(obj)
        if overlap:
            raise ValueError(f"extra metadata would shadow model fields {sorted(overlap)}")
        obj.update(extra)
    dump_json(obj, path)


def load_model(path: str | Path) -> "NBModel | LRModel":
    return model_from_json_obj(load_json(path))
