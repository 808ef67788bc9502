"""Synthetic interest corpora with a controllable class signal.

Real profile data for this task cannot be redistributed, so experiments and
acceptance checks run on generated corpora whose difficulty is known by
construction.  Each user draws a Poisson number of interests (at least one).
Every interest slot is, with probability ``separation``, a uniform draw from
the user's class signature (``signature_size`` terms per class); otherwise it
is a draw from a shared Zipf(1.0) background distribution over the whole
vocabulary.  Signature terms occupy the tail ranks of the Zipf ordering, so
at ``separation=0`` the two classes are exactly interchangeable (chance-level
by construction) while at ``separation=1`` every token betrays the class.

Generation is fully determined by ``SynthParams.seed``; the draw order per
profile (length, slot mask, signature draws, background draws) is fixed and
must not be reordered without breaking reproducibility.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Corpus, UserProfile, NEGATIVE, POSITIVE


@dataclass(frozen=True)
class SynthParams:
    """Knobs for corpus generation; defaults mirror the observed data scale
    (about 26.2 interests per user)."""

    n_per_class: int
    seed: int
    vocab_size: int = 500
    interests_per_user: float = 26.2
    separation: float = 0.5
    signature_size: int = 10

    def __post_init__(self) -> None:
        if self.n_per_class < 1:
            raise ValueError(f"n_per_class must be at least 1, got {self.n_per_class}")
        if self.vocab_size < 2:
            raise ValueError(f"vocab_size must be at least 2, got {self.vocab_size}")
        if self.interests_per_user <= 0:
            raise ValueError(
                f"interests_per_user must be positive, got {self.interests_per_user}"
            )
        if not 0.0 <= self.separation <= 1.0:
            raise ValueError(f"separation must lie in [0, 1], got {self.separation}")
        if self.signature_size < 1:
            raise ValueError(f"signature_size must be at least 1, got {self.signature_size}")
        if 2 * self.signature_size > self.vocab_size:
            raise ValueError(
                f"two signatures of {self.signature_size} terms do not fit in a "
                f"vocabulary of {self.vocab_size}"
            )


def term_ranking(params: SynthParams) -> tuple[str, ...]:
    """All terms in Zipf rank order: background first, signatures at the tail."""
    n_bg = params.vocab_size - 2 * params.signature_size
    background = tuple(f"bg-{i:05d}" for i in range(n_bg))
    pos_sig, neg_sig = signature_terms(params)
    return background + pos_sig + neg_sig


def signature_terms(params: SynthParams) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """The planted positive-class and negative-class signature terms."""
    pos = tuple(f"sig-pos-{j:03d}" for j in range(params.signature_size))
    neg = tuple(f"sig-neg-{j:03d}" for j in range(params.signature_size))
    return pos, neg


def _zipf_probabilities(n_terms: int) -> np.ndarray:
    weights = 1.0 / np.arange(1, n_terms + 1, dtype=np.float64)
    return weights / weights.sum()


def generate(params: SynthParams) -> Corpus:
    """Generate a class-balanced corpus of ``2 * n_per_class`` profiles."""
    rng = np.random.default_rng(params.seed)
    terms = np.array(term_ranking(params))
    probs = _zipf_probabilities(params.vocab_size)
    pos_sig, neg_sig = signature_terms(params)
    signatures = {POSITIVE: np.array(pos_sig), NEGATIVE: np.array(neg_sig)}
    profiles: list[UserProfile] = []
    for label, tag in ((POSITIVE, "pos"), (NEGATIVE, "neg")):
        signature = signatures[label]
        for i in range(params.n_per_class):
            length = max(1, int(rng.poisson(params.interests_per_user)))
            from_signature = rng.random(length) < params.separation
            n_sig = int(from_signature.sum())
            sig_draws = signature[rng.integers(0, params.signature_size, size=n_sig)]
            bg_draws = terms[rng.choice(params.vocab_size, size=length - n_sig, p=probs)]
            interests = np.empty(length, dtype=object)
            interests[from_signature] = sig_draws
            interests[~from_signature] = bg_draws
            profiles.append(
                UserProfile(
                    id=f"user-{tag}-{i:05d}",
                    label=label,
                    interests=tuple(str(t) for t in interests),
                )
            )
    provenance = (
        f"synth(n_per_class={params.n_per_class}, vocab_size={params.vocab_size}, "
        f"interests_per_user={params.interests_per_user}, separation={params.separation}, "
        f"signature_size={params.signature_size}, seed={params.seed})"
    )
    return Corpus(profiles=tuple(profiles), provenance=provenance)
