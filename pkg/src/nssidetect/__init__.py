"""Detecting self-injury interest from self-declared interest profiles.

The package turns labeled interest-list corpora into binary detectors:
profiles are vectorized as raw counts, TF-IDF weights, or LDA topic
mixtures, classified with naive Bayes or logistic regression, and evaluated
under a balanced-resampling cross-validation protocol.  Odds-ratio feature
ranking surfaces the interests most indicative of each class.
"""

from .corpus import (
    NEGATIVE,
    POSITIVE,
    Corpus,
    CorpusFormatError,
    FoldPlan,
    UserProfile,
    Vocabulary,
    balanced_resample,
    build_vocabulary,
    load_corpus,
    load_vocabulary,
    save_corpus,
    save_vocabulary,
    stratified_folds,
)
from .vectorize import SparseVector, count_vector, idf, tfidf_vector
from .topic_model import (
    CollapsedGibbsSampler,
    GibbsSchedule,
    TopicMixture,
    TopicModel,
    fit_lda,
    infer_theta,
    load_topic_model,
    save_topic_model,
)
from .classify import (
    LRModel,
    NBModel,
    load_model,
    lr_probability,
    nb_log_scores,
    positive_score,
    predict,
    save_model,
    train_lr,
    train_nb,
)
from .evaluate import (
    ConfusionMatrix,
    EvalReport,
    FitAudit,
    MetricSet,
    ProtocolConfig,
    confusion,
    metrics,
    run_protocol,
    save_report,
)
from .feature_rank import RankedFeature, odds_ratios, top_features
from .synth import SynthParams, generate

__version__ = "0.1.0"

__all__ = [
    "NEGATIVE",
    "POSITIVE",
    "Corpus",
    "CorpusFormatError",
    "FoldPlan",
    "UserProfile",
    "Vocabulary",
    "balanced_resample",
    "build_vocabulary",
    "load_corpus",
    "load_vocabulary",
    "save_corpus",
    "save_vocabulary",
    "stratified_folds",
    "SparseVector",
    "count_vector",
    "idf",
    "tfidf_vector",
    "CollapsedGibbsSampler",
    "GibbsSchedule",
    "TopicMixture",
    "TopicModel",
    "fit_lda",
    "infer_theta",
    "load_topic_model",
    "save_topic_model",
    "LRModel",
    "NBModel",
    "load_model",
    "lr_probability",
    "nb_log_scores",
    "positive_score",
    "predict",
    "save_model",
    "train_lr",
    "train_nb",
    "ConfusionMatrix",
    "EvalReport",
    "FitAudit",
    "MetricSet",
    "ProtocolConfig",
    "confusion",
    "metrics",
    "run_protocol",
    "save_report",
    "RankedFeature",
    "odds_ratios",
    "top_features",
    "SynthParams",
    "generate",
    "__version__",
]
