"""Which interests separate the classes: odds-ratio feature ranking.

For each vocabulary term the per-class occurrence probability is estimated
from document frequencies with a Haldane–Anscombe correction,
``p = (df + 0.5) / (n + 1)``, which keeps the odds finite when a term never
occurs (or always occurs) in one class.  The ranking statistic is the odds
ratio ``[p_pos / (1 - p_pos)] / [p_neg / (1 - p_neg)]``; values above 1 mark
terms more typical of positive profiles.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import Vocabulary
from .classify import train_nb
from .vectorize import SparseVector


@dataclass(frozen=True)
class RankedFeature:
    term: str
    odds_ratio: float
    df_pos: int
    df_neg: int


def odds_ratios(vocab: Vocabulary, correction: float = 0.5) -> list[RankedFeature]:
    """Rank all vocabulary terms by descending odds ratio.

    Ties break lexicographically by term, so the ranking is deterministic.
    With ``correction=0`` the raw odds ratio is used; that variant requires
    every term to occur in some but not all profiles of each class.
    """
    if vocab.n_pos == 0 or vocab.n_neg == 0:
        raise ValueError("odds ratios need document counts for both classes")
    if correction < 0:
        raise ValueError(f"correction must be non-negative, got {correction}")
    ranked = []
    for i, term in enumerate(vocab.terms):
        df_pos = int(vocab.df_pos[i])
        df_neg = int(vocab.df_neg[i])
        if correction == 0.0 and (
            df_pos == 0 or df_pos == vocab.n_pos or df_neg == 0 or df_neg == vocab.n_neg
        ):
            raise ValueError(
                f"term {term!r} has a degenerate document frequency; "
                "raw odds ratios (correction=0) are undefined for it"
            )
        # odds(p) with p = (df + c) / (n + 2c) simplifies to
        # (df + c) / (n - df + c).  The odds ratio is computed as a single
        # quotient of products so each half rounds once.
        numerator = (df_pos + correction) * (vocab.n_neg - df_neg + correction)
        denominator = (vocab.n_pos - df_pos + correction) * (df_neg + correction)
        ranked.append(
            RankedFeature(
                term=term, odds_ratio=numerator / denominator, df_pos=df_pos, df_neg=df_neg
            )
        )
    ranked.sort(key=lambda f: (-f.odds_ratio, f.term))
    return ranked


def nb_rate_ratios(
    vectors: Sequence[SparseVector],
    labels: Sequence[str],
    vocab: Vocabulary,
    smoothing: float = 1.0,
) -> list[RankedFeature]:
    """Alternative ranking: ratio of smoothed naive-Bayes feature rates.

    Uses ``theta_pos / theta_neg`` from a fitted NB model instead of
    document-frequency odds; weights count multiplicity, not just presence.
    """
    model = train_nb(vectors, labels, smoothing=smoothing)
    if model.n_features != vocab.size:
        raise ValueError("vectors do not match the vocabulary dimension")
    ratio = np.exp(model.log_theta[1] - model.log_theta[0])
    ranked = [
        RankedFeature(
            term=term,
            odds_ratio=float(ratio[i]),
            df_pos=int(vocab.df_pos[i]),
            df_neg=int(vocab.df_neg[i]),
        )
        for i, term in enumerate(vocab.terms)
    ]
    ranked.sort(key=lambda f: (-f.odds_ratio, f.term))
    return ranked


def top_features(
    ranked: Sequence[RankedFeature], n: int = 20
) -> tuple[list[RankedFeature], list[RankedFeature]]:
    """The ``n`` highest- and ``n`` lowest-ranked features.

    The bottom list is ordered by ascending odds ratio (most negative-leaning
    first), i.e. it is the reversed tail of the ranking.
    """
    if not 1 <= n <= len(ranked):
        raise ValueError(f"n must lie in [1, {len(ranked)}], got {n}")
    top = list(ranked[:n])
    bottom = list(ranked[::-1][:n])
    return top, bottom


def ranked_to_json_obj(features: Sequence[RankedFeature]) -> list[dict]:
    return [
        {"term": f.term, "odds_ratio": f.odds_ratio, "df_pos": f.df_pos, "df_neg": f.df_neg}
        for f in features
    ]


def render_ranking(
    top: Sequence[RankedFeature], bottom: Sequence[RankedFeature]
) -> str:
    """Two-column text table: positive-leaning terms beside negative-leaning."""
    left_w = max([len("top (positive-leaning)")] + [len(f.term) for f in top])
    right_w = max([len("bottom (negative-leaning)")] + [len(f.term) for f in bottom])
    lines = [
        f"{'top (positive-leaning)':<{left_w}}  {'OR':>10}    "
        f"{'bottom (negative-leaning)':<{right_w}}  {'OR':>10}"
    ]
    lines.append("-" * len(lines[0]))
    for left, right in zip(top, bottom):
        lines.append(
            f"{left.term:<{left_w}}  {left.odds_ratio:>10.4f}    "
            f"{right.term:<{right_w}}  {right.odds_ratio:>10.4f}"
        )
    return "\n".join(lines)
