"""Shared test utilities: independent oracles and small corpus builders.

The oracles here are deliberately written against the *definitions* (pure
Python floats, ``math.log``, explicit loops) rather than reusing package
internals, so agreement is meaningful.
"""

from __future__ import annotations

import math

import numpy as np

from nssidetect import Corpus, SparseVector, UserProfile
from nssidetect.corpus import NEGATIVE, POSITIVE


def profile(pid: str, label: str, interests) -> UserProfile:
    return UserProfile(id=pid, label=label, interests=tuple(interests))


def corpus_from_interest_lists(pos_lists, neg_lists) -> Corpus:
    """Build a corpus with ids pos-0.., neg-0.. from raw interest lists."""
    profiles = [
        profile(f"pos-{i}", POSITIVE, interests) for i, interests in enumerate(pos_lists)
    ] + [
        profile(f"neg-{i}", NEGATIVE, interests) for i, interests in enumerate(neg_lists)
    ]
    return Corpus(profiles=tuple(profiles))


def sparse(entries, dim) -> SparseVector:
    return SparseVector(entries=tuple(entries), dim=dim)


def nb_oracle_log_scores(train_vectors, train_labels, test_vector, smoothing=1.0):
    """Brute-force naive Bayes log posterior (negative, positive)."""
    classes = (NEGATIVE, POSITIVE)
    dim = test_vector.dim
    totals = {c: [0.0] * dim for c in classes}
    doc_counts = {c: 0 for c in classes}
    for vector, label in zip(train_vectors, train_labels):
        doc_counts[label] += 1
        for index, weight in vector.entries:
            totals[label][index] += weight
    n = sum(doc_counts.values())
    scores = []
    for c in classes:
        score = math.log(doc_counts[c] / n)
        denom = math.fsum(totals[c]) + smoothing * dim
        for index, weight in test_vector.entries:
            score += weight * math.log((totals[c][index] + smoothing) / denom)
        scores.append(score)
    return scores


def lr_oracle_objective(weights, bias, vectors, labels, lam):
    """Logistic loss by the book: mean log(1 + e^-margin) + (lam/2n)||w||^2."""
    n = len(vectors)
    total = 0.0
    for vector, label in zip(vectors, labels):
        z = bias + sum(weights[i] * w for i, w in vector.entries)
        y = 1.0 if label == POSITIVE else 0.0
        # log(1 + e^z) - y*z, computed stably
        total += max(z, 0.0) - y * z + math.log1p(math.exp(-abs(z)))
    penalty = 0.5 * lam / n * sum(w * w for w in weights)
    return total / n + penalty


def finite_diff_gradient(objective, weights, bias, h=1e-6):
    """Central finite differences of ``objective(weights, bias)``."""
    weights = np.asarray(weights, dtype=np.float64)
    grad_w = np.zeros_like(weights)
    for i in range(weights.size):
        up = weights.copy()
        down = weights.copy()
        up[i] += h
        down[i] -= h
        grad_w[i] = (objective(up, bias) - objective(down, bias)) / (2 * h)
    grad_b = (objective(weights, bias + h) - objective(weights, bias - h)) / (2 * h)
    return grad_w, grad_b


def random_count_vector(rng: np.random.Generator, dim: int, max_count: int = 5) -> SparseVector:
    """A random (possibly empty) vector of small integer counts."""
    nnz = int(rng.integers(0, dim + 1))
    indices = sorted(rng.choice(dim, size=nnz, replace=False).tolist())
    entries = tuple((int(i), float(rng.integers(1, max_count + 1))) for i in indices)
    return SparseVector(entries=entries, dim=dim)


def random_training_set(rng: np.random.Generator, n: int, dim: int, max_count: int = 5):
    """Random vectors plus labels guaranteed to include both classes."""
    vectors = [random_count_vector(rng, dim, max_count) for _ in range(n)]
    labels = [POSITIVE if rng.random() < 0.5 else NEGATIVE for _ in range(n)]
    labels[0] = POSITIVE
    labels[-1] = NEGATIVE
    return vectors, labels


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))
