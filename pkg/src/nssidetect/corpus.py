"""Interest-profile corpus handling.

A corpus is a set of user profiles, each carrying a self-declared list of
interests (a multiset of free-text tags) and a binary label: ``positive``
for users whose interests indicate engagement with self-injury content,
``negative`` for comparison users.  This module owns the on-disk JSONL
format, interest normalization, vocabulary construction with document
frequency pruning, class-balanced resampling, and stratified fold planning.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .jsonio import canonical_json, dump_json, load_json

POSITIVE = "positive"
NEGATIVE = "negative"
LABELS = (NEGATIVE, POSITIVE)

VOCAB_SCHEMA_VERSION = 1


class CorpusFormatError(ValueError):
    """A corpus file violates the JSONL profile schema."""

    def __init__(self, message: str, *, path: str | Path | None = None, line: int | None = None):
        prefix = ""
        if path is not None:
            prefix += str(path)
        if line is not None:
            prefix += f":{line}"
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.path = str(path) if path is not None else None
        self.line = line


def normalize_interest(raw: str) -> str:
    """Lowercase and trim an interest tag.  No other rewriting is applied."""
    return raw.strip().lower()


@dataclass(frozen=True)
class UserProfile:
    """One user: an opaque id, a class label, and a multiset of interests.

    Interests are normalized (lowercased, trimmed) on construction and tags
    that are empty after trimming are dropped.  Duplicates are kept: a user
    who lists a tag twice contributes two occurrences.
    """

    id: str
    label: str
    interests: tuple[str, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.id, str) or not self.id:
            raise ValueError("profile id must be a non-empty string")
        if "\n" in self.id or "\r" in self.id:
            raise ValueError(f"profile id {self.id!r} contains a newline")
        if self.label not in LABELS:
            raise ValueError(f"unknown label {self.label!r} (expected 'positive' or 'negative')")
        cleaned = []
        for raw in self.interests:
            if not isinstance(raw, str):
                raise ValueError(f"interest {raw!r} is not a string")
            tag = normalize_interest(raw)
            if not tag:
                continue
            if "\n" in tag or "\r" in tag:
                raise ValueError(f"interest {raw!r} contains a newline")
            cleaned.append(tag)
        if not cleaned:
            raise ValueError("profile has no interests after normalization")
        object.__setattr__(self, "interests", tuple(cleaned))


@dataclass(frozen=True, eq=False)
class Corpus:
    """An immutable sequence of profiles with distinct ids."""

    profiles: tuple[UserProfile, ...]
    provenance: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "profiles", tuple(self.profiles))
        seen: set[str] = set()
        for profile in self.profiles:
            if profile.id in seen:
                raise ValueError(f"duplicate profile id {profile.id!r}")
            seen.add(profile.id)

    def __len__(self) -> int:
        return len(self.profiles)

    @property
    def n_positive(self) -> int:
        return sum(1 for p in self.profiles if p.label == POSITIVE)

    @property
    def n_negative(self) -> int:
        return len(self.profiles) - self.n_positive

    def by_label(self, label: str) -> tuple[UserProfile, ...]:
        if label not in LABELS:
            raise ValueError(f"unknown label {label!r}")
        return tuple(p for p in self.profiles if p.label == label)

    def ids(self) -> frozenset[str]:
        return frozenset(p.id for p in self.profiles)


@dataclass(frozen=True, eq=False)
class Vocabulary:
    """Retained feature terms with per-class document frequencies.

    ``terms`` is sorted lexicographically and maps 1:1 onto feature indices
    ``0..size-1``.  Document frequencies count profiles containing a term at
    least once, so ``df_total = df_pos + df_neg`` always holds.
    """

    terms: tuple[str, ...]
    df_total: np.ndarray
    df_pos: np.ndarray
    df_neg: np.ndarray
    n_docs: int
    n_pos: int
    n_neg: int
    min_df: int
    max_df_ratio: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise ValueError("vocabulary must contain at least one term")
        if list(self.terms) != sorted(set(self.terms)):
            raise ValueError("vocabulary terms must be distinct and lexicographically sorted")
        for name in ("df_total", "df_pos", "df_neg"):
            arr = np.asarray(getattr(self, name), dtype=np.int64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
            if arr.shape != (len(self.terms),):
                raise ValueError(f"{name} must have one entry per term")
        if not np.array_equal(self.df_total, self.df_pos + self.df_neg):
            raise ValueError("df_total must equal df_pos + df_neg")
        if self.n_docs != self.n_pos + self.n_neg:
            raise ValueError("n_docs must equal n_pos + n_neg")
        if np.any(self.df_pos < 0) or np.any(self.df_pos > self.n_pos):
            raise ValueError("df_pos out of range")
        if np.any(self.df_neg < 0) or np.any(self.df_neg > self.n_neg):
            raise ValueError("df_neg out of range")
        if np.any(self.df_total < 1):
            raise ValueError("retained terms must occur in at least one profile")

    @property
    def size(self) -> int:
        return len(self.terms)

    @cached_property
    def index(self) -> dict[str, int]:
        return {term: i for i, term in enumerate(self.terms)}

    def to_json_obj(self) -> dict:
        return {
            "version": VOCAB_SCHEMA_VERSION,
            "min_df": self.min_df,
            "max_df_ratio": self.max_df_ratio,
            "n_docs": self.n_docs,
            "n_pos": self.n_pos,
            "n_neg": self.n_neg,
            "terms": [
                {
                    "t": term,
                    "df": int(self.df_total[i]),
                    "df_pos": int(self.df_pos[i]),
                    "df_neg": int(self.df_neg[i]),
                }
                for i, term in enumerate(self.terms)
            ],
        }

    def fingerprint(self) -> str:
        """SHA-256 of the canonical export; used to pair models with vocabularies."""
        payload = canonical_json(self.to_json_obj(), indent=None)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def vocabulary_from_json(obj: dict) -> Vocabulary:
    if not isinstance(obj, dict) or obj.get("version") != VOCAB_SCHEMA_VERSION:
        raise ValueError("unsupported vocabulary file (missing or wrong 'version')")
    entries = obj["terms"]
    return Vocabulary(
        terms=tuple(entry["t"] for entry in entries),
        df_total=np.array([entry["df"] for entry in entries], dtype=np.int64),
        df_pos=np.array([entry["df_pos"] for entry in entries], dtype=np.int64),
        df_neg=np.array([entry["df_neg"] for entry in entries], dtype=np.int64),
        n_docs=int(obj["n_docs"]),
        n_pos=int(obj["n_pos"]),
        n_neg=int(obj["n_neg"]),
        min_df=int(obj["min_df"]),
        max_df_ratio=float(obj["max_df_ratio"]),
    )


def save_vocabulary(vocab: Vocabulary, path: str | Path) -> None:
    dump_json(vocab.to_json_obj(), path)


def load_vocabulary(path: str | Path) -> Vocabulary:
    return vocabulary_from_json(load_json(path))


@dataclass(frozen=True)
class FoldPlan:
    """Assignment of corpus positions to ``k`` cross-validation folds."""

    k: int
    assignments: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "assignments", tuple(int(a) for a in self.assignments))
        if self.k < 2:
            raise ValueError(f"fold count must be at least 2, got {self.k}")
        if any(a < 0 or a >= self.k for a in self.assignments):
            raise ValueError("fold assignment out of range")
        sizes = self.fold_sizes()
        if sizes and max(sizes) - min(sizes) > 1:
            raise ValueError("fold sizes differ by more than one")

    def fold_sizes(self) -> tuple[int, ...]:
        sizes = [0] * self.k
        for a in self.assignments:
            sizes[a] += 1
        return tuple(sizes)

    def test_indices(self, fold: int) -> tuple[int, ...]:
        self._check_fold(fold)
        return tuple(i for i, a in enumerate(self.assignments) if a == fold)

    def train_indices(self, fold: int) -> tuple[int, ...]:
        self._check_fold(fold)
        return tuple(i for i, a in enumerate(self.assignments) if a != fold)

    def _check_fold(self, fold: int) -> None:
        if not 0 <= fold < self.k:
            raise ValueError(f"fold {fold} out of range for k={self.k}")


_PROFILE_KEYS = {"id", "label", "interests"}


def load_corpus(path: str | Path) -> Corpus:
    """Read a JSONL corpus; one ``{"id", "label", "interests"}`` object per line.

    Raises :class:`CorpusFormatError` naming the offending line for malformed
    JSON, unknown or missing keys, unknown labels, duplicate ids, and profiles
    whose interests are empty (or empty after normalization).
    """
    path = Path(path)
    profiles: list[UserProfile] = []
    seen: set[str] = set()
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                raise CorpusFormatError("blank line", path=path, line=lineno)
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"malformed JSON ({exc.msg})", path=path, line=lineno) from exc
            if not isinstance(obj, dict):
                raise CorpusFormatError("expected a JSON object", path=path, line=lineno)
            unknown = set(obj) - _PROFILE_KEYS
            if unknown:
                raise CorpusFormatError(
                    f"unknown keys {sorted(unknown)}", path=path, line=lineno
                )
            missing = _PROFILE_KEYS - set(obj)
            if missing:
                raise CorpusFormatError(
                    f"missing keys {sorted(missing)}", path=path, line=lineno
                )
            if not isinstance(obj["interests"], list):
                raise CorpusFormatError("'interests' must be a list", path=path, line=lineno)
            try:
                profile = UserProfile(
                    id=obj["id"], label=obj["label"], interests=tuple(obj["interests"])
                )
            except ValueError as exc:
                raise CorpusFormatError(str(exc), path=path, line=lineno) from exc
            if profile.id in seen:
                raise CorpusFormatError(f"duplicate profile id {profile.id!r}", path=path, line=lineno)
            seen.add(profile.id)
            profiles.append(profile)
    return Corpus(profiles=tuple(profiles), provenance=str(path))


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus in the JSONL profile format read by :func:`load_corpus`."""
    with Path(path).open("w", encoding="utf-8") as handle:
        for profile in corpus.profiles:
            record = {"id": profile.id, "label": profile.label, "interests": list(profile.interests)}
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")


def build_vocabulary(corpus: Corpus, min_df: int = 100, max_df_ratio: float = 0.70) -> Vocabulary:
    """Collect terms and prune by document frequency.

    A term is retained iff ``df_total > min_df`` and
    ``df_total < max_df_ratio * n_docs`` — both bounds strict, so terms hitting
    either boundary exactly are dropped.  With the defaults this reproduces
    the "more than 100 but fewer than 70% of users" rule used throughout.
    """
    if not corpus.profiles:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    if min_df < 0:
        raise ValueError(f"min_df must be non-negative, got {min_df}")
    if not 0.0 < max_df_ratio <= 1.0:
        raise ValueError(f"max_df_ratio must lie in (0, 1], got {max_df_ratio}")
    df_total: dict[str, int] = {}
    df_pos: dict[str, int] = {}
    for profile in corpus.profiles:
        is_pos = profile.label == POSITIVE
        for term in set(profile.interests):
            df_total[term] = df_total.get(term, 0) + 1
            if is_pos:
                df_pos[term] = df_pos.get(term, 0) + 1
    n_docs = len(corpus.profiles)
    n_pos = corpus.n_positive
    upper = max_df_ratio * n_docs
    retained = [t for t in sorted(df_total) if min_df < df_total[t] < upper]
    if not retained:
        raise ValueError(
            f"vocabulary pruning removed every term "
            f"(min_df={min_df}, max_df_ratio={max_df_ratio}, n_docs={n_docs})"
        )
    total = np.array([df_total[t] for t in retained], dtype=np.int64)
    pos = np.array([df_pos.get(t, 0) for t in retained], dtype=np.int64)
    return Vocabulary(
        terms=tuple(retained),
        df_total=total,
        df_pos=pos,
        df_neg=total - pos,
        n_docs=n_docs,
        n_pos=n_pos,
        n_neg=n_docs - n_pos,
        min_df=min_df,
        max_df_ratio=max_df_ratio,
    )


def balanced_resample(corpus: Corpus, seed: int) -> Corpus:
    """Keep every positive profile and a uniform same-size sample of negatives.

    Sampling is without replacement, so the corpus must contain at least as
    many negatives as positives.  Profiles keep their original relative order.
    """
    positives = [i for i, p in enumerate(corpus.profiles) if p.label == POSITIVE]
    negatives = [i for i, p in enumerate(corpus.profiles) if p.label == NEGATIVE]
    if not positives:
        raise ValueError("cannot balance a corpus with no positive profiles")
    if len(negatives) < len(positives):
        raise ValueError(
            f"fewer negatives ({len(negatives)}) than positives ({len(positives)}); "
            "cannot sample negatives without replacement"
        )
    rng = np.random.default_rng(seed)
    chosen = rng.choice(len(negatives), size=len(positives), replace=False)
    keep = set(positives)
    keep.update(negatives[j] for j in chosen)
    resampled = tuple(corpus.profiles[i] for i in sorted(keep))
    return Corpus(profiles=resampled, provenance=corpus.provenance)


def stratified_folds(corpus: Corpus, k: int, seed: int) -> FoldPlan:
    """Partition corpus positions into ``k`` folds stratified by label.

    Fold sizes differ by at most one both overall and within each class.
    Every class must have at least ``k`` members.
    """
    if k < 2:
        raise ValueError(f"fold count must be at least 2, got {k}")
    rng = np.random.default_rng(seed)
    assignments = [0] * len(corpus.profiles)
    extra_start = 0
    for label in LABELS:
        positions = [i for i, p in enumerate(corpus.profiles) if p.label == label]
        if len(positions) < k:
            raise ValueError(
                f"class {label!r} has {len(positions)} profiles; need at least k={k}"
            )
        order = rng.permutation(len(positions))
        base, extras = divmod(len(positions), k)
        extra_folds = {(extra_start + j) % k for j in range(extras)}
        extra_start = (extra_start + extras) % k
        cursor = 0
        for fold in range(k):
            size = base + (1 if fold in extra_folds else 0)
            for j in order[cursor : cursor + size]:
                assignments[positions[j]] = fold
            cursor += size
    return FoldPlan(k=k, assignments=tuple(assignments))


def class_counts(profiles: Iterable[UserProfile]) -> dict[str, int]:
    """Label -> profile count for any profile iterable."""
    counts = {NEGATIVE: 0, POSITIVE: 0}
    for profile in profiles:
        counts[profile.label] += 1
    return counts
