"""The cross-validation protocol and its reporting.

One evaluation "unit" is a (resample, fold) pair.  For each of ``resamples``
repetitions the corpus is class-balanced by redrawing the negative sample,
a vocabulary is built from that balanced corpus, and profiles are split into
``k_folds`` stratified folds.  Within a unit, everything that is fitted —
training-split IDF, the topic model, and the classifiers — sees training
profiles only; the vocabulary is deliberately resample-scoped (it is built
before folds exist, from document frequencies, mirroring how the feature
space would be fixed before evaluation).

Every unit derives its own seeds from the master seed, so results are
independent of execution order and of ``jobs``; reports serialize to
byte-identical JSON for any worker count.

The optional :class:`FitAudit` records which profile ids each fitting stage
touched and can assert, after the fact, that no fold-scoped stage ever saw a
test profile.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .classify import train_lr, train_nb, predict
from .corpus import LABELS, POSITIVE, Corpus, balanced_resample, build_vocabulary, stratified_folds
from .jsonio import dump_json
from .seeds import derive_seed
from .topic_model import GibbsSchedule, TopicMixture, fit_lda, infer_theta
from .vectorize import (
    SparseVector,
    count_vector,
    document_frequencies,
    idf,
    idf_from_frequencies,
    tfidf_vector,
)

REPORT_SCHEMA_VERSION = 1

REPRESENTATIONS = ("count", "tfidf", "lda")
CLASSIFIERS = ("nb", "lr")
METRIC_NAMES = ("accuracy", "precision", "recall", "f1")
DISPLAY_NAMES = {
    "count": "Simple-Count",
    "tfidf": "TF-IDF",
    "lda": "LDA-Topic-Distribution",
}


@dataclass(frozen=True)
class ConfusionMatrix:
    """Binary confusion counts; "positive" is the detection target."""

    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self) -> None:
        for name in ("tp", "fp", "tn", "fn"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {value!r}")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class MetricSet:
    """Accuracy/precision/recall/F1 with a record of degenerate denominators.

    A metric whose denominator is zero is reported as 0.0 and listed in
    ``degenerate`` instead of raising; downstream code surfaces these as
    report flags so they are visible rather than silently averaged.
    """

    accuracy: float
    precision: float
    recall: float
    f1: float
    degenerate: tuple[str, ...] = ()


def confusion(truth: Sequence[str], predicted: Sequence[str]) -> ConfusionMatrix:
    """Count prediction outcomes against ground truth labels."""
    if len(truth) != len(predicted):
        raise ValueError(f"{len(truth)} truth labels but {len(predicted)} predictions")
    tp = fp = tn = fn = 0
    for t, p in zip(truth, predicted):
        if t not in LABELS:
            raise ValueError(f"unknown truth label {t!r}")
        if p not in LABELS:
            raise ValueError(f"unknown predicted label {p!r}")
        if p == POSITIVE:
            if t == POSITIVE:
                tp += 1
            else:
                fp += 1
        else:
            if t == POSITIVE:
                fn += 1
            else:
                tn += 1
    return ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn)


def metrics(cm: ConfusionMatrix) -> MetricSet:
    """Standard binary metrics; zero denominators yield 0.0 plus a flag."""
    degenerate: list[str] = []
    if cm.total > 0:
        accuracy = (cm.tp + cm.tn) / cm.total
    else:
        accuracy = 0.0
        degenerate.append("accuracy")
    if cm.tp + cm.fp > 0:
        precision = cm.tp / (cm.tp + cm.fp)
    else:
        precision = 0.0
        degenerate.append("precision")
    if cm.tp + cm.fn > 0:
        recall = cm.tp / (cm.tp + cm.fn)
    else:
        recall = 0.0
        degenerate.append("recall")
    if precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
    else:
        f1 = 0.0
        degenerate.append("f1")
    return MetricSet(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        degenerate=tuple(degenerate),
    )


@dataclass(frozen=True)
class ProtocolConfig:
    """All tunables of the evaluation protocol.

    ``jobs`` parallelizes across (resample, fold) units and never affects
    results or report bytes.  ``idf_scope="global"`` reproduces the simpler
    design where IDF comes from the whole balanced corpus; it leaks test
    document frequencies by construction and the audit will say so.
    """

    seed: int
    resamples: int = 5
    k_folds: int = 5
    min_df: int = 100
    max_df_ratio: float = 0.70
    topics: int = 10
    alpha: float | None = None  # None -> 50 / topics
    beta: float = 0.01
    lda_schedule: GibbsSchedule = field(default_factory=GibbsSchedule)
    infer_iters: int = 100
    nb_smoothing: float = 1.0
    lr_lambda: float = 1.0
    lr_tol: float = 1e-6
    lr_max_iter: int = 1000
    representations: tuple[str, ...] = REPRESENTATIONS
    classifiers: tuple[str, ...] = CLASSIFIERS
    idf_scope: str = "fold"
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.resamples < 1:
            raise ValueError(f"resamples must be at least 1, got {self.resamples}")
        if self.k_folds < 2:
            raise ValueError(f"k_folds must be at least 2, got {self.k_folds}")
        if self.topics < 1:
            raise ValueError(f"topics must be at least 1, got {self.topics}")
        if self.alpha is not None and self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.beta <= 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.infer_iters < 1:
            raise ValueError(f"infer_iters must be at least 1, got {self.infer_iters}")
        if self.nb_smoothing <= 0:
            raise ValueError(f"nb_smoothing must be positive, got {self.nb_smoothing}")
        if self.lr_lambda < 0:
            raise ValueError(f"lr_lambda must be non-negative, got {self.lr_lambda}")
        if self.lr_tol <= 0 or self.lr_max_iter < 1:
            raise ValueError("lr_tol must be positive and lr_max_iter at least 1")
        reps = tuple(dict.fromkeys(self.representations))
        unknown = set(reps) - set(REPRESENTATIONS)
        if unknown or not reps:
            raise ValueError(
                f"representations must be a non-empty subset of {REPRESENTATIONS}"
            )
        object.__setattr__(
            self, "representations", tuple(r for r in REPRESENTATIONS if r in reps)
        )
        clfs = tuple(dict.fromkeys(self.classifiers))
        unknown = set(clfs) - set(CLASSIFIERS)
        if unknown or not clfs:
            raise ValueError(f"classifiers must be a non-empty subset of {CLASSIFIERS}")
        object.__setattr__(self, "classifiers", tuple(c for c in CLASSIFIERS if c in clfs))
        if self.idf_scope not in ("fold", "global"):
            raise ValueError(f"idf_scope must be 'fold' or 'global', got {self.idf_scope!r}")
        if self.jobs < 1:
            raise ValueError(f"jobs must be at least 1, got {self.jobs}")

    @property
    def effective_alpha(self) -> float:
        return 50.0 / self.topics if self.alpha is None else self.alpha

    def config_keys(self) -> tuple[str, ...]:
        """Evaluated configurations, classifier-major (all NB rows, then LR)."""
        return tuple(
            f"{rep}_{clf}" for clf in self.classifiers for rep in self.representations
        )


@dataclass(frozen=True)
class AuditRecord:
    """One fitting stage and the profile ids it consumed.

    ``fold=None`` marks resample-scoped stages (vocabulary construction),
    which by design precede the fold split and see the whole balanced corpus.
    """

    stage: str
    resample: int
    fold: int | None
    profile_ids: frozenset[str]


class FitAudit:
    """Ledger of fitting inputs, checkable against test folds after a run.

    ``verify`` returns a violation message for every fold-scoped fitting
    stage that touched a profile belonging to its own test fold.  A clean
    protocol run returns an empty list; running with ``idf_scope="global"``
    does not (that is the point of the audit).
    """

    def __init__(self) -> None:
        self.records: list[AuditRecord] = []
        self.test_ids: dict[tuple[int, int], frozenset[str]] = {}

    def record(self, record: AuditRecord) -> None:
        self.records.append(record)

    def record_test_fold(self, resample: int, fold: int, ids: frozenset[str]) -> None:
        self.test_ids[(resample, fold)] = ids

    def verify(self) -> list[str]:
        violations: list[str] = []
        for rec in self.records:
            if rec.fold is None:
                continue
            test = self.test_ids.get((rec.resample, rec.fold))
            if test is None:
                violations.append(
                    f"stage {rec.stage!r}: no test fold recorded for "
                    f"resample {rec.resample}, fold {rec.fold}"
                )
                continue
            overlap = rec.profile_ids & test
            if overlap:
                sample = ", ".join(sorted(overlap)[:3])
                violations.append(
                    f"stage {rec.stage!r} (resample {rec.resample}, fold {rec.fold}) "
                    f"was fit on {len(overlap)} test profile(s), e.g. {sample}"
                )
        return violations


@dataclass(frozen=True)
class UnitResult:
    """Metrics and audit trail for one (resample, fold) unit."""

    resample: int
    fold: int
    metrics: dict[str, MetricSet]
    audit_records: tuple[AuditRecord, ...]
    test_ids: frozenset[str]


@dataclass(frozen=True)
class MeanStd:
    mean: float
    std: float


@dataclass(frozen=True, eq=False)
class EvalReport:
    """Aggregated protocol results: per-configuration metric means and
    sample standard deviations (ddof=1) over all (resample, fold) units."""

    config: ProtocolConfig
    corpus_profiles: int
    corpus_positives: int
    corpus_negatives: int
    corpus_provenance: str
    results: dict[str, dict[str, MeanStd]]
    units: tuple[UnitResult, ...]
    flags: tuple[dict, ...]

    def to_json_obj(self) -> dict:
        cfg = self.config
        sched = cfg.lda_schedule
        return {
            "version": REPORT_SCHEMA_VERSION,
            "config": {
                "seed": cfg.seed,
                "resamples": cfg.resamples,
                "k_folds": cfg.k_folds,
                "min_df": cfg.min_df,
                "max_df_ratio": cfg.max_df_ratio,
                "topics": cfg.topics,
                "alpha": cfg.effective_alpha,
                "beta": cfg.beta,
                "lda_sweeps": sched.sweeps,
                "lda_burn_in": sched.burn_in,
                "lda_sample_lag": sched.sample_lag,
                "infer_iters": cfg.infer_iters,
                "nb_smoothing": cfg.nb_smoothing,
                "lr_lambda": cfg.lr_lambda,
                "lr_tol": cfg.lr_tol,
                "lr_max_iter": cfg.lr_max_iter,
                "representations": list(cfg.representations),
                "classifiers": list(cfg.classifiers),
                "idf_scope": cfg.idf_scope,
            },
            "corpus": {
                "profiles": self.corpus_profiles,
                "positives": self.corpus_positives,
                "negatives": self.corpus_negatives,
                "provenance": self.corpus_provenance,
            },
            "results": {
                key: {
                    metric: {"mean": ms.mean, "std": ms.std}
                    for metric, ms in per_metric.items()
                }
                for key, per_metric in self.results.items()
            },
            "runs": {
                key: [
                    {
                        "resample": unit.resample,
                        "fold": unit.fold,
                        "accuracy": unit.metrics[key].accuracy,
                        "precision": unit.metrics[key].precision,
                        "recall": unit.metrics[key].recall,
                        "f1": unit.metrics[key].f1,
                    }
                    for unit in self.units
                ]
                for key in self.config.config_keys()
            },
            "flags": list(self.flags),
        }

    def render_table(self) -> str:
        """Fixed-order text table of mean ± std per configuration."""
        header = ["Feature Vector (Classifier)", "Accuracy", "Precision", "Recall", "F1"]
        rows: list[list[str]] = []
        for clf in self.config.classifiers:
            for rep in self.config.representations:
                key = f"{rep}_{clf}"
                per_metric = self.results[key]
                rows.append(
                    [f"{DISPLAY_NAMES[rep]} ({clf.upper()})"]
                    + [
                        f"{per_metric[m].mean:.4f} ± {per_metric[m].std:.4f}"
                        for m in METRIC_NAMES
                    ]
                )
        widths = [
            max(len(header[c]), max((len(r[c]) for r in rows), default=0))
            for c in range(len(header))
        ]
        lines = ["  ".join(h.ljust(widths[c]) for c, h in enumerate(header)).rstrip()]
        lines.append("  ".join("-" * w for w in widths))
        for row in rows:
            lines.append("  ".join(cell.ljust(widths[c]) for c, cell in enumerate(row)).rstrip())
        if self.flags:
            lines.append("")
            lines.append(f"flags: {len(self.flags)} degenerate metric value(s); see JSON report")
        return "\n".join(lines)


def _uniform_mixture_vector(k: int) -> SparseVector:
    return SparseVector(entries=tuple((t, 1.0 / k) for t in range(k)), dim=k)


def _evaluate_unit(corpus: Corpus, config: ProtocolConfig, r: int, f: int) -> UnitResult:
    """Run one (resample, fold) unit end to end.  Pure function of its args."""
    balanced = balanced_resample(corpus, derive_seed(config.seed, "resample", r))
    vocab = build_vocabulary(balanced, min_df=config.min_df, max_df_ratio=config.max_df_ratio)
    plan = stratified_folds(balanced, config.k_folds, derive_seed(config.seed, "folds", r))
    train_profiles = [balanced.profiles[i] for i in plan.train_indices(f)]
    test_profiles = [balanced.profiles[i] for i in plan.test_indices(f)]
    train_ids = frozenset(p.id for p in train_profiles)
    test_ids = frozenset(p.id for p in test_profiles)
    train_labels = [p.label for p in train_profiles]
    test_labels = [p.label for p in test_profiles]
    records = [AuditRecord("vocabulary", r, None, balanced.ids())]

    train_counts = [count_vector(p, vocab) for p in train_profiles]
    test_counts = [count_vector(p, vocab) for p in test_profiles]
    features: dict[str, tuple[list[SparseVector], list[SparseVector]]] = {}
    if "count" in config.representations:
        features["count"] = (train_counts, test_counts)
    if "tfidf" in config.representations:
        if config.idf_scope == "fold":
            split_df = document_frequencies(train_profiles, vocab)
            idf_weights = idf_from_frequencies(split_df, len(train_profiles))
            records.append(AuditRecord("idf", r, f, train_ids))
        else:
            idf_weights = idf(vocab)
            records.append(AuditRecord("idf", r, f, balanced.ids()))
        features["tfidf"] = (
            [tfidf_vector(p, vocab, idf_weights) for p in train_profiles],
            [tfidf_vector(p, vocab, idf_weights) for p in test_profiles],
        )
    if "lda" in config.representations:
        nonempty = [i for i, v in enumerate(train_counts) if v.entries]
        lda_model = fit_lda(
            [train_counts[i] for i in nonempty],
            k=config.topics,
            alpha=config.alpha,
            beta=config.beta,
            schedule=config.lda_schedule,
            seed=derive_seed(config.seed, "lda", r, f),
        )
        records.append(
            AuditRecord("lda", r, f, frozenset(train_profiles[i].id for i in nonempty))
        )
        uniform = _uniform_mixture_vector(config.topics)
        train_mix: list[SparseVector] = [uniform] * len(train_counts)
        for row, i in enumerate(nonempty):
            train_mix[i] = TopicMixture(theta=lda_model.train_theta[row]).as_sparse_vector()
        test_mix = [
            infer_theta(
                lda_model,
                vec,
                iters=config.infer_iters,
                seed=derive_seed(config.seed, "theta", r, f, profile.id),
            ).as_sparse_vector()
            for profile, vec in zip(test_profiles, test_counts)
        ]
        features["lda"] = (train_mix, test_mix)

    unit_metrics: dict[str, MetricSet] = {}
    for clf in config.classifiers:
        for rep in config.representations:
            key = f"{rep}_{clf}"
            train_vecs, test_vecs = features[rep]
            if clf == "nb":
                model = train_nb(train_vecs, train_labels, smoothing=config.nb_smoothing)
            else:
                model = train_lr(
                    train_vecs,
                    train_labels,
                    lam=config.lr_lambda,
                    tol=config.lr_tol,
                    max_iter=config.lr_max_iter,
                )
            records.append(AuditRecord(f"classifier:{key}", r, f, train_ids))
            predictions = [predict(model, v) for v in test_vecs]
            unit_metrics[key] = metrics(confusion(test_labels, predictions))
    return UnitResult(
        resample=r,
        fold=f,
        metrics=unit_metrics,
        audit_records=tuple(records),
        test_ids=test_ids,
    )


def _evaluate_unit_star(args: tuple) -> UnitResult:
    return _evaluate_unit(*args)


def run_protocol(corpus: Corpus, config: ProtocolConfig, audit: FitAudit | None = None) -> EvalReport:
    """Run the full resampled cross-validation protocol.

    Results are a deterministic function of (corpus, config.seed, tunables):
    each unit derives its own seeds, and aggregation sorts units by
    (resample, fold), so ``jobs`` changes wall-clock time only.
    """
    tasks = [(r, f) for r in range(config.resamples) for f in range(config.k_folds)]
    if config.jobs == 1:
        units = [_evaluate_unit(corpus, config, r, f) for r, f in tasks]
    else:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            units = list(
                pool.map(_evaluate_unit_star, [(corpus, config, r, f) for r, f in tasks])
            )
    units.sort(key=lambda u: (u.resample, u.fold))
    if audit is not None:
        for unit in units:
            audit.record_test_fold(unit.resample, unit.fold, unit.test_ids)
            for record in unit.audit_records:
                audit.record(record)
    keys = config.config_keys()
    results: dict[str, dict[str, MeanStd]] = {}
    for key in keys:
        per_metric: dict[str, MeanStd] = {}
        for metric in METRIC_NAMES:
            values = [getattr(unit.metrics[key], metric) for unit in units]
            mean = float(np.mean(values))
            std = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
            per_metric[metric] = MeanStd(mean=mean, std=std)
        results[key] = per_metric
    flags: list[dict] = []
    for unit in units:
        for key in keys:
            for metric in unit.metrics[key].degenerate:
                flags.append(
                    {
                        "config": key,
                        "resample": unit.resample,
                        "fold": unit.fold,
                        "metric": metric,
                    }
                )
    return EvalReport(
        config=config,
        corpus_profiles=len(corpus),
        corpus_positives=corpus.n_positive,
        corpus_negatives=corpus.n_negative,
        corpus_provenance=corpus.provenance,
        results=results,
        units=tuple(units),
        flags=tuple(flags),
    )


def save_report(report: EvalReport, path: str | Path) -> None:
    dump_json(report.to_json_obj(), path)
