"""Feature vector construction: raw counts and TF-IDF.

Profiles are mapped onto a fixed :class:`~nssidetect.corpus.Vocabulary`.
Interests outside the vocabulary are ignored, so a vector can legitimately be
empty.  TF-IDF uses the natural-log inverse document frequency
``ln(n_docs / df)`` with no smoothing and no length normalization; terms whose
IDF is exactly zero (present in every profile) contribute nothing and are
dropped from the vector.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

from .corpus import UserProfile, Vocabulary


@dataclass(frozen=True)
class SparseVector:
    """Sorted sparse feature vector: ``entries`` are ``(index, weight)`` pairs.

    Indices are strictly increasing and in ``[0, dim)``; weights are finite
    and strictly positive (zeros are represented by absence).
    """

    entries: tuple[tuple[int, float], ...]
    dim: int

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "entries", tuple((int(i), float(w)) for i, w in self.entries)
        )
        if self.dim < 0:
            raise ValueError(f"dimension must be non-negative, got {self.dim}")
        prev = -1
        for index, weight in self.entries:
            if index <= prev:
                raise ValueError("entry indices must be strictly increasing")
            if index >= self.dim:
                raise ValueError(f"index {index} out of range for dim {self.dim}")
            if not math.isfinite(weight) or weight <= 0.0:
                raise ValueError(f"weight at index {index} must be finite and > 0, got {weight}")
            prev = index

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.entries)

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(w for _, w in self.entries)

    def to_dense(self) -> np.ndarray:
        dense = np.zeros(self.dim)
        for index, weight in self.entries:
            dense[index] = weight
        return dense


def count_vector(profile: UserProfile, vocab: Vocabulary) -> SparseVector:
    """Occurrence counts of the profile's interests over the vocabulary."""
    counts = Counter(
        idx for term in profile.interests if (idx := vocab.index.get(term)) is not None
    )
    entries = tuple((idx, float(n)) for idx, n in sorted(counts.items()))
    return SparseVector(entries=entries, dim=vocab.size)


def idf(vocab: Vocabulary) -> np.ndarray:
    """``ln(n_docs / df_total)`` per term, from the vocabulary's own counts."""
    return np.log(vocab.n_docs / vocab.df_total.astype(np.float64))


def document_frequencies(profiles: Sequence[UserProfile], vocab: Vocabulary) -> np.ndarray:
    """How many of the given profiles contain each vocabulary term."""
    df = np.zeros(vocab.size, dtype=np.int64)
    for profile in profiles:
        for term in set(profile.interests):
            idx = vocab.index.get(term)
            if idx is not None:
                df[idx] += 1
    return df


def idf_from_frequencies(df: np.ndarray, n_docs: int) -> np.ndarray:
    """IDF from explicit document frequencies (e.g. a training split).

    Terms absent from the split (``df == 0``) are clamped to ``df = 1``; they
    get the largest finite weight ``ln(n_docs)`` rather than an infinity.
    """
    if n_docs < 1:
        raise ValueError("n_docs must be at least 1")
    df = np.asarray(df, dtype=np.float64)
    if np.any(df < 0) or np.any(df > n_docs):
        raise ValueError("document frequencies must lie in [0, n_docs]")
    return np.log(n_docs / np.maximum(df, 1.0))


def tfidf_vector(
    profile: UserProfile, vocab: Vocabulary, idf_weights: np.ndarray | None = None
) -> SparseVector:
    """Count times IDF.  Entries whose IDF is exactly zero are dropped.

    ``idf_weights`` defaults to the corpus-level IDF from ``vocab``; pass the
    training-split IDF here when evaluating under cross-validation.
    """
    weights = idf(vocab) if idf_weights is None else np.asarray(idf_weights, dtype=np.float64)
    if weights.shape != (vocab.size,):
        raise ValueError(f"idf_weights must have shape ({vocab.size},)")
    counts = count_vector(profile, vocab)
    entries = tuple(
        (idx, n * weights[idx]) for idx, n in counts.entries if weights[idx] != 0.0
    )
    return SparseVector(entries=entries, dim=vocab.size)


def to_csr(vectors: Sequence[SparseVector]) -> sparse.csr_matrix:
    """Stack sparse vectors into a CSR matrix (one row per vector)."""
    if not vectors:
        raise ValueError("need at least one vector")
    dim = vectors[0].dim
    if any(v.dim != dim for v in vectors):
        raise ValueError("all vectors must share the same dimension")
    indptr = np.zeros(len(vectors) + 1, dtype=np.int64)
    total = sum(len(v) for v in vectors)
    indices = np.zeros(total, dtype=np.int64)
    data = np.zeros(total, dtype=np.float64)
    at = 0
    for row, vector in enumerate(vectors):
        for idx, w in vector.entries:
            indices[at] = idx
            data[at] = w
            at += 1
        indptr[row + 1] = at
    return sparse.csr_matrix((data, indices, indptr), shape=(len(vectors), dim))
