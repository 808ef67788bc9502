"""Command-line interface.

Five subcommands cover the full workflow on JSONL interest corpora:

* ``synth``     generate a synthetic corpus with a known class signal
* ``evaluate``  run the balanced-resampling cross-validation protocol
* ``train``     fit one representation + classifier on a whole corpus
* ``predict``   apply a trained model to new profiles
* ``rank``      rank vocabulary terms by class odds ratio

Exit codes: 0 on success, 1 for data errors (unreadable/invalid files,
mismatched artifacts, failed preconditions), 2 for usage errors.  Every
random step derives from ``--seed``; rerunning any command with the same
inputs and seed reproduces its outputs byte for byte.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .classify import (
    model_from_json_obj,
    positive_score,
    predict as predict_label,
    save_model,
    train_lr,
    train_nb,
)
from .corpus import (
    CorpusFormatError,
    balanced_resample,
    build_vocabulary,
    load_corpus,
    load_vocabulary,
    save_corpus,
    save_vocabulary,
)
from .evaluate import FitAudit, ProtocolConfig, run_protocol, save_report
from .feature_rank import nb_rate_ratios, odds_ratios, ranked_to_json_obj, render_ranking, top_features
from .jsonio import canonical_json, dump_json, load_json
from .seeds import derive_seed
from .synth import SynthParams, generate
from .topic_model import GibbsSchedule, TopicMixture, fit_lda, infer_theta, load_topic_model, save_topic_model
from .vectorize import SparseVector, count_vector, idf, tfidf_vector


class UsageError(Exception):
    """Command-line usage problem detected after argparse (exit code 2)."""


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be a non-negative integer, got {text}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be a positive number, got {text}")
    return value


def _ratio(text: str) -> float:
    value = float(text)
    if not 0.0 < value <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1], got {text}")
    return value


def _unit_interval(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {text}")
    return value


def _add_vocab_flags(parser: argparse.ArgumentParser, defaults: bool) -> None:
    parser.add_argument(
        "--min-df",
        type=_nonneg_int,
        default=100 if defaults else None,
        help="retain terms with document frequency strictly above this (default 100)",
    )
    parser.add_argument(
        "--max-df-ratio",
        type=_ratio,
        default=0.70 if defaults else None,
        help="retain terms in strictly fewer than this fraction of profiles (default 0.70)",
    )


def _add_model_flags(parser: argparse.ArgumentParser, defaults: bool) -> None:
    d = (lambda v: v) if defaults else (lambda v: None)
    parser.add_argument("--topics", type=_positive_int, default=d(10), help="LDA topic count (default 10)")
    parser.add_argument("--alpha", type=_positive_float, default=None, help="LDA document-topic prior (default 50/topics)")
    parser.add_argument("--beta", type=_positive_float, default=d(0.01), help="LDA topic-word prior (default 0.01)")
    parser.add_argument("--lda-sweeps", type=_positive_int, default=d(1000), help="Gibbs sweeps when fitting (default 1000)")
    parser.add_argument("--lda-burn-in", type=_nonneg_int, default=d(800), help="sweeps discarded before sampling (default 800)")
    parser.add_argument("--lda-sample-lag", type=_positive_int, default=d(10), help="sweeps between samples (default 10)")
    parser.add_argument("--infer-iters", type=_positive_int, default=d(100), help="Gibbs sweeps for held-out inference (default 100)")
    parser.add_argument("--nb-smoothing", type=_positive_float, default=d(1.0), help="additive smoothing for naive Bayes (default 1.0)")
    parser.add_argument("--lr-lambda", type=_positive_float, default=d(1.0), help="L2 strength for logistic regression (default 1.0)")
    parser.add_argument("--lr-tol", type=_positive_float, default=d(1e-6), help="gradient tolerance for LR convergence (default 1e-6)")
    parser.add_argument("--lr-max-iter", type=_positive_int, default=d(1000), help="maximum LR gradient steps (default 1000)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nssidetect",
        description="Detect self-injury interest from self-declared interest profiles.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic labeled corpus")
    p_synth.add_argument("--out", required=True, help="output corpus path (JSONL)")
    p_synth.add_argument("--seed", type=int, required=True, help="master random seed")
    p_synth.add_argument("--n-per-class", type=_positive_int, required=True, help="profiles per class")
    p_synth.add_argument("--vocab-size", type=_positive_int, default=500, help="number of distinct terms (default 500)")
    p_synth.add_argument("--interests-per-user", type=_positive_float, default=26.2, help="mean interests per profile (default 26.2)")
    p_synth.add_argument("--separation", type=_unit_interval, default=0.5, help="probability an interest comes from the class signature (default 0.5)")
    p_synth.add_argument("--signature-size", type=_positive_int, default=10, help="signature terms per class (default 10)")
    p_synth.set_defaults(func=cmd_synth)

    p_eval = sub.add_parser("evaluate", help="run resampled cross-validation on a corpus")
    p_eval.add_argument("--corpus", required=True, help="input corpus path (JSONL)")
    p_eval.add_argument("--seed", type=int, default=None, help="master random seed (required here or in --config)")
    p_eval.add_argument("--config", default=None, help="JSON file of protocol settings; explicit flags win")
    p_eval.add_argument("--out-json", default=None, help="write the JSON report here")
    p_eval.add_argument("--out-table", default=None, help="write the text table here (always printed to stdout)")
    p_eval.add_argument("--resamples", type=_positive_int, default=None, help="balanced resampling repetitions (default 5)")
    p_eval.add_argument("--folds", type=_positive_int, default=None, help="cross-validation folds (default 5)")
    _add_vocab_flags(p_eval, defaults=False)
    _add_model_flags(p_eval, defaults=False)
    p_eval.add_argument("--features", choices=["count", "tfidf", "lda", "all"], default=None, help="feature representation(s) to evaluate (default all)")
    p_eval.add_argument("--model", choices=["nb", "lr", "all"], default=None, help="classifier(s) to evaluate (default all)")
    p_eval.add_argument("--idf-scope", choices=["fold", "global"], default=None, help="fit IDF on the training split only (fold, default) or on the whole balanced corpus (global; leaks by construction)")
    p_eval.add_argument("--jobs", type=_positive_int, default=None, help="parallel worker processes; never changes results (default 1)")
    p_eval.add_argument("--audit", action="store_true", help="verify that no fold-scoped fit touched its test fold; violations exit 1")
    p_eval.set_defaults(func=cmd_evaluate)

    p_train = sub.add_parser("train", help="fit one representation + classifier on a corpus")
    p_train.add_argument("--corpus", required=True, help="training corpus path (JSONL)")
    p_train.add_argument("--seed", type=int, required=True, help="master random seed")
    p_train.add_argument("--features", choices=["count", "tfidf", "lda"], required=True, help="feature representation")
    p_train.add_argument("--model", choices=["nb", "lr"], required=True, help="classifier kind")
    p_train.add_argument("--out", required=True, metavar="PREFIX", help="output prefix; writes PREFIX.model.json, PREFIX.vocab.json and, for lda, PREFIX.topics.json")
    _add_vocab_flags(p_train, defaults=True)
    _add_model_flags(p_train, defaults=True)
    p_train.set_defaults(func=cmd_train)

    p_pred = sub.add_parser("predict", help="label profiles with a trained model")
    p_pred.add_argument("--corpus", required=True, help="profiles to label (JSONL corpus format)")
    p_pred.add_argument("--model", required=True, help="model file from 'train'")
    p_pred.add_argument("--vocab", required=True, help="vocabulary file from 'train'")
    p_pred.add_argument("--topics", default=None, help="topics file from 'train' (required for lda models)")
    p_pred.add_argument("--infer-iters", type=_positive_int, default=100, help="Gibbs sweeps per profile for lda models (default 100)")
    p_pred.add_argument("--seed", type=int, required=True, help="master random seed")
    p_pred.add_argument("--out", default=None, help="write JSONL predictions here (default stdout)")
    p_pred.set_defaults(func=cmd_predict)

    p_rank = sub.add_parser("rank", help="rank vocabulary terms by class odds ratio")
    p_rank.add_argument("--corpus", required=True, help="input corpus path (JSONL)")
    p_rank.add_argument("--seed", type=int, required=True, help="master random seed (drives the balancing resample)")
    p_rank.add_argument("--top", type=_positive_int, default=20, help="list size for top and bottom features (default 20)")
    _add_vocab_flags(p_rank, defaults=True)
    p_rank.add_argument("--estimator", choices=["presence", "nb-rate"], default="presence", help="presence: document-frequency odds ratio (default); nb-rate: smoothed naive-Bayes rate ratio")
    p_rank.add_argument("--out-json", default=None, help="write the ranked features here (JSON array, top list then bottom list)")
    p_rank.add_argument("--out-table", default=None, help="write the two-column table here (always printed to stdout)")
    p_rank.set_defaults(func=cmd_rank)
    return parser


def cmd_synth(args: argparse.Namespace) -> int:
    params = SynthParams(
        n_per_class=args.n_per_class,
        seed=args.seed,
        vocab_size=args.vocab_size,
        interests_per_user=args.interests_per_user,
        separation=args.separation,
        signature_size=args.signature_size,
    )
    corpus = generate(params)
    save_corpus(corpus, args.out)
    print(f"wrote {len(corpus)} profiles ({corpus.n_positive} positive) to {args.out}")
    return 0


_EVAL_CONFIG_KEYS = {
    "seed", "resamples", "folds", "min_df", "max_df_ratio", "topics", "alpha",
    "beta", "lda_sweeps", "lda_burn_in", "lda_sample_lag", "infer_iters",
    "nb_smoothing", "lr_lambda", "lr_tol", "lr_max_iter", "features", "model",
    "idf_scope", "jobs",
}

_EVAL_DEFAULTS = {
    "resamples": 5, "folds": 5, "min_df": 100, "max_df_ratio": 0.70,
    "topics": 10, "alpha": None, "beta": 0.01,
    "lda_sweeps": 1000, "lda_burn_in": 800, "lda_sample_lag": 10,
    "infer_iters": 100, "nb_smoothing": 1.0, "lr_lambda": 1.0,
    "lr_tol": 1e-6, "lr_max_iter": 1000, "features": "all", "model": "all",
    "idf_scope": "fold", "jobs": 1,
}


def _resolve_eval_settings(args: argparse.Namespace) -> dict:
    """Merge defaults < config file < explicit flags for ``evaluate``."""
    file_config: dict = {}
    if args.config is not None:
        file_config = load_json(args.config)
        if not isinstance(file_config, dict):
            raise ValueError(f"{args.config}: config must be a JSON object")
        unknown = set(file_config) - _EVAL_CONFIG_KEYS
        if unknown:
            raise ValueError(f"{args.config}: unknown config keys {sorted(unknown)}")
    settings = {}
    for key, default in _EVAL_DEFAULTS.items():
        flag_value = getattr(args, key)
        if flag_value is not None:
            settings[key] = flag_value
        elif key in file_config:
            settings[key] = file_config[key]
        else:
            settings[key] = default
    if args.seed is not None:
        settings["seed"] = args.seed
    elif "seed" in file_config:
        settings["seed"] = int(file_config["seed"])
    else:
        raise UsageError("--seed is required (on the command line or in --config)")
    return settings


def _expand_choice(value: str, all_values: tuple[str, ...], what: str) -> tuple[str, ...]:
    if value == "all":
        return all_values
    if value not in all_values:
        raise ValueError(f"unknown {what} {value!r} (expected one of {all_values} or 'all')")
    return (value,)


def cmd_evaluate(args: argparse.Namespace) -> int:
    settings = _resolve_eval_settings(args)
    corpus = load_corpus(args.corpus)
    config = ProtocolConfig(
        seed=int(settings["seed"]),
        resamples=int(settings["resamples"]),
        k_folds=int(settings["folds"]),
        min_df=int(settings["min_df"]),
        max_df_ratio=float(settings["max_df_ratio"]),
        topics=int(settings["topics"]),
        alpha=None if settings["alpha"] is None else float(settings["alpha"]),
        beta=float(settings["beta"]),
        lda_schedule=GibbsSchedule(
            sweeps=int(settings["lda_sweeps"]),
            burn_in=int(settings["lda_burn_in"]),
            sample_lag=int(settings["lda_sample_lag"]),
        ),
        infer_iters=int(settings["infer_iters"]),
        nb_smoothing=float(settings["nb_smoothing"]),
        lr_lambda=float(settings["lr_lambda"]),
        lr_tol=float(settings["lr_tol"]),
        lr_max_iter=int(settings["lr_max_iter"]),
        representations=_expand_choice(str(settings["features"]), ("count", "tfidf", "lda"), "representation"),
        classifiers=_expand_choice(str(settings["model"]), ("nb", "lr"), "classifier"),
        idf_scope=str(settings["idf_scope"]),
        jobs=int(settings["jobs"]),
    )
    audit = FitAudit() if args.audit else None
    report = run_protocol(corpus, config, audit=audit)
    table = report.render_table()
    print(table)
    if args.out_json is not None:
        save_report(report, args.out_json)
    if args.out_table is not None:
        Path(args.out_table).write_text(table + "\n", encoding="utf-8")
    if audit is not None:
        violations = audit.verify()
        if violations:
            print(f"audit: {len(violations)} leakage violation(s):", file=sys.stderr)
            for violation in violations:
                print(f"  {violation}", file=sys.stderr)
            return 1
        print(f"audit: clean ({len(audit.records)} fitting stages checked)")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus)
    vocab = build_vocabulary(corpus, min_df=args.min_df, max_df_ratio=args.max_df_ratio)
    counts = [count_vector(p, vocab) for p in corpus.profiles]
    labels = [p.label for p in corpus.profiles]
    topic_model = None
    if args.features == "count":
        vectors = counts
    elif args.features == "tfidf":
        weights = idf(vocab)
        vectors = [tfidf_vector(p, vocab, weights) for p in corpus.profiles]
    else:
        nonempty = [i for i, v in enumerate(counts) if v.entries]
        topic_model = fit_lda(
            [counts[i] for i in nonempty],
            k=args.topics,
            alpha=args.alpha,
            beta=args.beta,
            schedule=GibbsSchedule(
                sweeps=args.lda_sweeps, burn_in=args.lda_burn_in, sample_lag=args.lda_sample_lag
            ),
            seed=derive_seed(args.seed, "lda"),
        )
        uniform = SparseVector(
            entries=tuple((t, 1.0 / args.topics) for t in range(args.topics)), dim=args.topics
        )
        vectors = [uniform] * len(counts)
        for row, i in enumerate(nonempty):
            vectors[i] = TopicMixture(theta=topic_model.train_theta[row]).as_sparse_vector()
    if args.model == "nb":
        model = train_nb(vectors, labels, smoothing=args.nb_smoothing)
    else:
        model = train_lr(
            vectors, labels, lam=args.lr_lambda, tol=args.lr_tol, max_iter=args.lr_max_iter
        )
    prefix = Path(args.out)
    vocab_path = prefix.with_name(prefix.name + ".vocab.json")
    model_path = prefix.with_name(prefix.name + ".model.json")
    save_vocabulary(vocab, vocab_path)
    save_model(
        model,
        model_path,
        extra={"features": args.features, "vocab_fingerprint": vocab.fingerprint()},
    )
    written = [str(model_path), str(vocab_path)]
    if topic_model is not None:
        topics_path = prefix.with_name(prefix.name + ".topics.json")
        save_topic_model(topic_model, topics_path)
        written.append(str(topics_path))
    print(f"wrote {', '.join(written)}")
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus)
    vocab = load_vocabulary(args.vocab)
    model_obj = load_json(args.model)
    if not isinstance(model_obj, dict):
        raise ValueError(f"{args.model}: model file must contain a JSON object")
    expected = model_obj.get("vocab_fingerprint")
    if expected is None:
        raise ValueError(f"{args.model}: model file lacks a vocabulary fingerprint")
    actual = vocab.fingerprint()
    if expected != actual:
        raise ValueError(
            f"vocabulary mismatch: model was trained against {expected} "
            f"but {args.vocab} has fingerprint {actual}"
        )
    features = model_obj.get("features")
    model = model_from_json_obj(model_obj)
    if features == "lda":
        if args.topics is None:
            raise UsageError("--topics is required for lda models")
        topics = load_topic_model(args.topics)
        if topics.vocab_size != vocab.size:
            raise ValueError(
                f"topics file covers {topics.vocab_size} terms but vocabulary has {vocab.size}"
            )
    elif features not in ("count", "tfidf"):
        raise ValueError(f"{args.model}: unknown feature kind {features!r}")
    idf_weights = idf(vocab) if features == "tfidf" else None
    lines = []
    for profile in corpus.profiles:
        if features == "count":
            vector = count_vector(profile, vocab)
        elif features == "tfidf":
            vector = tfidf_vector(profile, vocab, idf_weights)
        else:
            mixture = infer_theta(
                topics,
                count_vector(profile, vocab),
                iters=args.infer_iters,
                seed=derive_seed(args.seed, "theta", profile.id),
            )
            vector = mixture.as_sparse_vector()
        record = {
            "id": profile.id,
            "label": predict_label(model, vector),
            "score": positive_score(model, vector),
        }
        lines.append(canonical_json(record, indent=None))
    text = "\n".join(lines) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")
    return 0


def cmd_rank(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus)
    balanced = balanced_resample(corpus, derive_seed(args.seed, "rank"))
    vocab = build_vocabulary(balanced, min_df=args.min_df, max_df_ratio=args.max_df_ratio)
    if args.estimator == "presence":
        ranked = odds_ratios(vocab)
    else:
        vectors = [count_vector(p, vocab) for p in balanced.profiles]
        labels = [p.label for p in balanced.profiles]
        ranked = nb_rate_ratios(vectors, labels, vocab)
    top, bottom = top_features(ranked, n=args.top)
    table = render_ranking(top, bottom)
    print(table)
    if args.out_json is not None:
        dump_json(ranked_to_json_obj(top) + ranked_to_json_obj(bottom), args.out_json)
    if args.out_table is not None:
        Path(args.out_table).write_text(table + "\n", encoding="utf-8")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:  # includes CorpusFormatError, JSONDecodeError
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyError as exc:
        print(f"error: missing key {exc} in input file", file=sys.stderr)
        return 1


def main_entry() -> None:
    sys.exit(main(sys.argv[1:]))
