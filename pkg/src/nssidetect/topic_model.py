"""Latent Dirichlet Allocation fit by collapsed Gibbs sampling.

Profiles are treated as bags of interest tokens (a count-2 entry contributes
two tokens).  The sampler keeps the usual count tables — topics per document,
topics per word, topic totals — and resamples every token's topic from the
full conditional

    p(z = t | rest)  ∝  (n_dt + alpha) * (n_wt + beta) / (n_t + V*beta)

with the token's own assignment excluded from all counts.  Point estimates of
``phi`` (topics over words) and ``theta`` (documents over topics) average the
smoothed count ratios over post-burn-in samples.

The inner loops are compiled with numba; randomness inside kernels comes from
an explicit splitmix64 state so that results are reproducible bit-for-bit
from a seed, independent of thread or process scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from numba import njit

from .jsonio import dump_json, load_json
from .vectorize import SparseVector

TOPIC_SCHEMA_VERSION = 1

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U64_TO_UNIT = 1.0 / 9007199254740992.0  # 2**-53


@njit(cache=True)
def _next_uniform(rng_state):
    """splitmix64 step -> uniform double in [0, 1)."""
    rng_state[0] += _GAMMA
    z = rng_state[0]
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)) * _U64_TO_UNIT


@njit(cache=True)
def _init_assignments(doc_ids, word_ids, k, z, n_dt, n_wt, n_t, rng_state):
    for j in range(word_ids.size):
        u = _next_uniform(rng_state)
        t = int(u * k)
        if t >= k:
            t = k - 1
        z[j] = t
        n_dt[doc_ids[j], t] += 1
        n_wt[word_ids[j], t] += 1
        n_t[t] += 1


@njit(cache=True)
def _train_sweep(doc_ids, word_ids, z, n_dt, n_wt, n_t, inv_nt, alpha, beta, vbeta, probs, rng_state):
    k = n_t.size
    for j in range(word_ids.size):
        d = doc_ids[j]
        w = word_ids[j]
        t_old = z[j]
        n_dt[d, t_old] -= 1
        n_wt[w, t_old] -= 1
        n_t[t_old] -= 1
        inv_nt[t_old] = 1.0 / (n_t[t_old] + vbeta)
        total = 0.0
        for t in range(k):
            p = (n_dt[d, t] + alpha) * (n_wt[w, t] + beta) * inv_nt[t]
            probs[t] = p
            total += p
        u = _next_uniform(rng_state) * total
        acc = 0.0
        t_new = k - 1
        for t in range(k):
            acc += probs[t]
            if u < acc:
                t_new = t
                break
        z[j] = t_new
        n_dt[d, t_new] += 1
        n_wt[w, t_new] += 1
        n_t[t_new] += 1
        inv_nt[t_new] = 1.0 / (n_t[t_new] + vbeta)


@njit(cache=True)
def _infer_sweep(word_ids, z, n_td, phi_t, alpha, probs, rng_state):
    # Resample one held-out document against a fixed phi (phi_t is (V, k)).
    k = n_td.size
    for j in range(word_ids.size):
        w = word_ids[j]
        t_old = z[j]
        n_td[t_old] -= 1
        total = 0.0
        for t in range(k):
            p = (n_td[t] + alpha) * phi_t[w, t]
            probs[t] = p
            total += p
        u = _next_uniform(rng_state) * total
        acc = 0.0
        t_new = k - 1
        for t in range(k):
            acc += probs[t]
            if u < acc:
                t_new = t
                break
        z[j] = t_new
        n_td[t_new] += 1


@dataclass(frozen=True)
class GibbsSchedule:
    """Sweep budget for fitting: total sweeps, burn-in, and sampling stride.

    Estimates are averaged over sweeps ``s`` with ``s > burn_in`` and
    ``(s - burn_in) % sample_lag == 0`` (1-based), so the schedule must leave
    room for at least one sample.
    """

    sweeps: int = 1000
    burn_in: int = 800
    sample_lag: int = 10

    def __post_init__(self) -> None:
        if self.sweeps < 1:
            raise ValueError(f"sweeps must be at least 1, got {self.sweeps}")
        if not 0 <= self.burn_in < self.sweeps:
            raise ValueError(f"burn_in must lie in [0, sweeps), got {self.burn_in}")
        if self.sample_lag < 1:
            raise ValueError(f"sample_lag must be at least 1, got {self.sample_lag}")
        if self.n_samples < 1:
            raise ValueError("schedule yields no post-burn-in samples")

    @property
    def n_samples(self) -> int:
        return (self.sweeps - self.burn_in) // self.sample_lag


@dataclass(frozen=True, eq=False)
class TopicModel:
    """Fitted topics: ``phi[t][w] = p(word w | topic t)``, rows sum to one."""

    k: int
    alpha: float
    beta: float
    phi: np.ndarray
    vocab_size: int
    seed: int
    schedule: GibbsSchedule | None = None
    train_theta: np.ndarray | None = None

    def __post_init__(self) -> None:
        phi = np.asarray(self.phi, dtype=np.float64)
        object.__setattr__(self, "phi", phi)
        if self.k < 1:
            raise ValueError(f"topic count must be at least 1, got {self.k}")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")
        if phi.shape != (self.k, self.vocab_size):
            raise ValueError(f"phi must have shape ({self.k}, {self.vocab_size})")
        if np.any(phi <= 0.0):
            raise ValueError("phi entries must be strictly positive")
        if np.any(np.abs(phi.sum(axis=1) - 1.0) > 1e-9):
            raise ValueError("phi rows must sum to 1 within 1e-9")
        if self.train_theta is not None:
            theta = np.asarray(self.train_theta, dtype=np.float64)
            object.__setattr__(self, "train_theta", theta)
            if theta.ndim != 2 or theta.shape[1] != self.k:
                raise ValueError("train_theta must have shape (n_docs, k)")
            if np.any(theta < 0.0) or np.any(np.abs(theta.sum(axis=1) - 1.0) > 1e-9):
                raise ValueError("train_theta rows must be distributions")

    def to_json_obj(self) -> dict:
        return {
            "version": TOPIC_SCHEMA_VERSION,
            "k": self.k,
            "alpha": self.alpha,
            "beta": self.beta,
            "vocab_size": self.vocab_size,
            "phi": self.phi,
            "seed": self.seed,
        }


@dataclass(frozen=True, eq=False)
class TopicMixture:
    """Per-document topic distribution; ``degenerate`` marks the uniform
    fallback used for documents with no in-vocabulary tokens."""

    theta: np.ndarray
    degenerate: bool = False

    def __post_init__(self) -> None:
        theta = np.asarray(self.theta, dtype=np.float64)
        object.__setattr__(self, "theta", theta)
        if theta.ndim != 1 or theta.size < 1:
            raise ValueError("theta must be a non-empty 1-d array")
        if np.any(theta < 0.0):
            raise ValueError("theta entries must be non-negative")
        if abs(float(theta.sum()) - 1.0) > 1e-9:
            raise ValueError("theta must sum to 1 within 1e-9")

    @property
    def k(self) -> int:
        return self.theta.size

    def as_sparse_vector(self) -> SparseVector:
        entries = tuple((t, float(p)) for t, p in enumerate(self.theta) if p > 0.0)
        return SparseVector(entries=entries, dim=self.k)


def _tokenize(docs: Sequence[SparseVector]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Expand count vectors to parallel (doc_id, word_id) token arrays."""
    doc_ids: list[int] = []
    word_ids: list[int] = []
    lengths = np.zeros(len(docs), dtype=np.int64)
    for d, doc in enumerate(docs):
        n_tokens = 0
        for idx, weight in doc.entries:
            count = int(round(weight))
            if count < 1 or float(count) != weight:
                raise ValueError(
                    f"document {d} has non-integer token count {weight} at index {idx}"
                )
            doc_ids.extend([d] * count)
            word_ids.extend([idx] * count)
            n_tokens += count
        lengths[d] = n_tokens
    return (
        np.array(doc_ids, dtype=np.int32),
        np.array(word_ids, dtype=np.int32),
        lengths,
    )


class CollapsedGibbsSampler:
    """Mutable sampling state for one LDA fit.

    Exposes single sweeps so that callers (and tests) can drive the chain and
    inspect the count tables between sweeps.  Most users want
    :func:`fit_lda`, which runs a full schedule and averages the estimates.
    """

    def __init__(
        self,
        docs: Sequence[SparseVector],
        k: int,
        alpha: float,
        beta: float,
        seed: int,
    ):
        if not docs:
            raise ValueError("cannot fit a topic model on an empty document list")
        if k < 1:
            raise ValueError(f"topic count must be at least 1, got {k}")
        if alpha <= 0 or beta <= 0:
            raise ValueError("alpha and beta must be positive")
        dims = {doc.dim for doc in docs}
        if len(dims) != 1:
            raise ValueError("all documents must share the same vocabulary dimension")
        self.vocab_size = dims.pop()
        if self.vocab_size < 1:
            raise ValueError("vocabulary dimension must be at least 1")
        self.k = k
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.vbeta = self.beta * self.vocab_size
        self.doc_ids, self.word_ids, self.doc_lengths = _tokenize(docs)
        if np.any(self.doc_lengths == 0):
            empty = int(np.flatnonzero(self.doc_lengths == 0)[0])
            raise ValueError(f"document {empty} has no tokens; drop empty documents before fitting")
        self.n_docs = len(docs)
        self.z = np.zeros(self.doc_ids.size, dtype=np.int32)
        self.n_dt = np.zeros((self.n_docs, k), dtype=np.int32)
        self.n_wt = np.zeros((self.vocab_size, k), dtype=np.int32)
        self.n_t = np.zeros(k, dtype=np.int32)
        self._probs = np.zeros(k, dtype=np.float64)
        self._rng_state = np.array([seed & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
        _init_assignments(
            self.doc_ids, self.word_ids, k, self.z, self.n_dt, self.n_wt, self.n_t, self._rng_state
        )
        self._inv_nt = 1.0 / (self.n_t + self.vbeta)
        self.sweeps_done = 0

    @property
    def n_tokens(self) -> int:
        return self.word_ids.size

    def sweep(self) -> None:
        """Resample every token's topic once, in fixed token order."""
        _train_sweep(
            self.doc_ids,
            self.word_ids,
            self.z,
            self.n_dt,
            self.n_wt,
            self.n_t,
            self._inv_nt,
            self.alpha,
            self.beta,
            self.vbeta,
            self._probs,
            self._rng_state,
        )
        self.sweeps_done += 1

    def check_counts(self) -> None:
        """Verify the count tables are consistent with the assignments."""
        if int(self.n_t.sum()) != self.n_tokens:
            raise ValueError("topic totals do not sum to the token count")
        if not np.array_equal(self.n_wt.sum(axis=0), self.n_t):
            raise ValueError("word-topic counts do not match topic totals")
        if not np.array_equal(self.n_dt.sum(axis=0), self.n_t):
            raise ValueError("document-topic counts do not match topic totals")
        if not np.array_equal(self.n_dt.sum(axis=1), self.doc_lengths):
            raise ValueError("document-topic counts do not match document lengths")
        if np.any(self.n_dt < 0) or np.any(self.n_wt < 0) or np.any(self.n_t < 0):
            raise ValueError("negative count encountered")

    def phi_estimate(self) -> np.ndarray:
        """Smoothed topic-word distributions from the current counts."""
        counts = self.n_wt.T.astype(np.float64)  # (k, V)
        return (counts + self.beta) / (self.n_t.astype(np.float64) + self.vbeta)[:, None]

    def theta_estimate(self) -> np.ndarray:
        """Smoothed document-topic distributions from the current counts."""
        counts = self.n_dt.astype(np.float64)
        denom = self.doc_lengths.astype(np.float64) + self.k * self.alpha
        return (counts + self.alpha) / denom[:, None]


def full_conditional(
    doc_topic: np.ndarray,
    word_topic: np.ndarray,
    topic_totals: np.ndarray,
    alpha: float,
    beta: float,
    vocab_size: int,
) -> np.ndarray:
    """Normalized resampling distribution for one token.

    All three count arrays must already exclude the token being resampled.
    """
    weights = (
        (np.asarray(doc_topic, dtype=np.float64) + alpha)
        * (np.asarray(word_topic, dtype=np.float64) + beta)
        / (np.asarray(topic_totals, dtype=np.float64) + vocab_size * beta)
    )
    return weights / weights.sum()


def fit_lda(
    docs: Sequence[SparseVector],
    k: int,
    alpha: float | None = None,
    beta: float = 0.01,
    schedule: GibbsSchedule | None = None,
    seed: int = 0,
) -> TopicModel:
    """Fit LDA on integer count vectors; deterministic given the seed.

    ``alpha`` defaults to ``50 / k``.  ``phi`` and the per-document ``theta``
    (exposed as ``train_theta``) are averages of the smoothed count ratios
    taken every ``schedule.sample_lag`` sweeps after burn-in.
    """
    if alpha is None:
        alpha = 50.0 / k
    if schedule is None:
        schedule = GibbsSchedule()
    sampler = CollapsedGibbsSampler(docs, k=k, alpha=alpha, beta=beta, seed=seed)
    phi_acc = np.zeros((k, sampler.vocab_size))
    theta_acc = np.zeros((sampler.n_docs, k))
    n_samples = 0
    for sweep_no in range(1, schedule.sweeps + 1):
        sampler.sweep()
        if sweep_no > schedule.burn_in and (sweep_no - schedule.burn_in) % schedule.sample_lag == 0:
            phi_acc += sampler.phi_estimate()
            theta_acc += sampler.theta_estimate()
            n_samples += 1
    phi = phi_acc / n_samples
    train_theta = theta_acc / n_samples
    return TopicModel(
        k=k,
        alpha=float(alpha),
        beta=float(beta),
        phi=phi,
        vocab_size=sampler.vocab_size,
        seed=seed,
        schedule=schedule,
        train_theta=train_theta,
    )


def infer_theta(model: TopicModel, doc: SparseVector, iters: int = 100, seed: int = 0) -> TopicMixture:
    """Infer a held-out document's topic mixture with ``model.phi`` fixed.

    Runs ``iters`` Gibbs sweeps over the document's tokens and averages the
    smoothed theta estimate over every sweep after a burn-in of
    ``iters // 2``.  A document with no in-vocabulary tokens cannot be
    projected, so it gets the uniform mixture, flagged ``degenerate``.
    """
    if iters < 1:
        raise ValueError(f"iters must be at least 1, got {iters}")
    if doc.dim != model.vocab_size:
        raise ValueError(
            f"document dim {doc.dim} does not match model vocabulary {model.vocab_size}"
        )
    if not doc.entries:
        return TopicMixture(theta=np.full(model.k, 1.0 / model.k), degenerate=True)
    doc_ids, word_ids, lengths = _tokenize([doc])
    n_tokens = int(lengths[0])
    k = model.k
    rng_state = np.array([seed & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    z = np.zeros(n_tokens, dtype=np.int32)
    n_td = np.zeros(k, dtype=np.int32)
    n_wt_unused = np.zeros((model.vocab_size, k), dtype=np.int32)
    n_t_unused = np.zeros(k, dtype=np.int32)
    _init_assignments(doc_ids, word_ids, k, z, n_td.reshape(1, k), n_wt_unused, n_t_unused, rng_state)
    phi_t = np.ascontiguousarray(model.phi.T)  # (V, k) for cache-friendly reads
    probs = np.zeros(k, dtype=np.float64)
    burn_in = iters // 2
    theta_acc = np.zeros(k)
    n_samples = 0
    denom = n_tokens + k * model.alpha
    for sweep_no in range(1, iters + 1):
        _infer_sweep(word_ids, z, n_td, phi_t, model.alpha, probs, rng_state)
        if sweep_no > burn_in:
            theta_acc += (n_td + model.alpha) / denom
            n_samples += 1
    return TopicMixture(theta=theta_acc / n_samples, degenerate=False)


def save_topic_model(model: TopicModel, path: str | Path) -> None:
    dump_json(model.to_json_obj(), path)


def topic_model_from_json_obj(obj: dict) -> TopicModel:
    if not isinstance(obj, dict) or obj.get("version") != TOPIC_SCHEMA_VERSION:
        raise ValueError("unsupported topic model file (missing or wrong 'version')")
    return TopicModel(
        k=int(obj["k"]),
        alpha=float(obj["alpha"]),
        beta=float(obj["beta"]),
        phi=np.array(obj["phi"], dtype=np.float64),
        vocab_size=int(obj["vocab_size"]),
        seed=int(obj["seed"]),
    )


def load_topic_model(path: str | Path) -> TopicModel:
    return topic_model_from_json_obj(load_json(path))
