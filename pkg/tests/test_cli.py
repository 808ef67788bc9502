"""End-to-end command-line tests, run in-process via ``main(argv)``."""

import json

import pytest

from nssidetect import load_corpus
from nssidetect.cli import main
from nssidetect.jsonio import load_json


SYNTH_ARGS = [
    "--n-per-class", "12", "--vocab-size", "24", "--signature-size", "4",
    "--interests-per-user", "6.0", "--separation", "0.9",
]
VOCAB_ARGS = ["--min-df", "1", "--max-df-ratio", "0.95"]
FAST_EVAL_ARGS = VOCAB_ARGS + [
    "--resamples", "2", "--folds", "3", "--features", "count", "--model", "nb",
]


@pytest.fixture(scope="module")
def corpus_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "corpus.jsonl"
    assert main(["synth", "--out", str(path), "--seed", "42"] + SYNTH_ARGS) == 0
    return path


@pytest.fixture(scope="module")
def trained(tmp_path_factory, corpus_path):
    """A count+nb model trained on the module corpus."""
    prefix = tmp_path_factory.mktemp("models") / "detector"
    code = main(
        ["train", "--corpus", str(corpus_path), "--seed", "7",
         "--features", "count", "--model", "nb", "--out", str(prefix)] + VOCAB_ARGS
    )
    assert code == 0
    return prefix


class TestSynth:
    def test_writes_a_loadable_balanced_corpus(self, corpus_path, capsys):
        corpus = load_corpus(corpus_path)
        assert len(corpus) == 24
        assert corpus.n_positive == 12

    def test_same_seed_writes_identical_bytes(self, tmp_path):
        a = tmp_path / "a.jsonl"
        b = tmp_path / "b.jsonl"
        for path in (a, b):
            assert main(["synth", "--out", str(path), "--seed", "9"] + SYNTH_ARGS) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_bad_parameter_is_an_argparse_error(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["synth", "--out", str(tmp_path / "c.jsonl"), "--seed", "1",
                  "--n-per-class", "0"])
        assert exc.value.code == 2


class TestEvaluate:
    def test_prints_the_results_table(self, corpus_path, capsys):
        code = main(["evaluate", "--corpus", str(corpus_path), "--seed", "3"] + FAST_EVAL_ARGS)
        out = capsys.readouterr().out
        assert code == 0
        assert "Feature Vector (Classifier)" in out
        assert "Simple-Count (NB)" in out

    def test_report_files_are_deterministic(self, corpus_path, tmp_path, capsys):
        a = tmp_path / "a.json"
        b = tmp_path / "b.json"
        for path in (a, b):
            code = main(
                ["evaluate", "--corpus", str(corpus_path), "--seed", "3",
                 "--out-json", str(path)] + FAST_EVAL_ARGS
            )
            assert code == 0
        assert a.read_bytes() == b.read_bytes()

    def test_worker_count_leaves_report_bytes_unchanged(self, corpus_path, tmp_path, capsys):
        serial = tmp_path / "serial.json"
        parallel = tmp_path / "parallel.json"
        base = ["evaluate", "--corpus", str(corpus_path), "--seed", "3"] + FAST_EVAL_ARGS
        assert main(base + ["--out-json", str(serial)]) == 0
        assert main(base + ["--out-json", str(parallel), "--jobs", "2"]) == 0
        assert serial.read_bytes() == parallel.read_bytes()

    def test_seed_is_required_somewhere(self, corpus_path, capsys):
        code = main(["evaluate", "--corpus", str(corpus_path)] + FAST_EVAL_ARGS)
        err = capsys.readouterr().err
        assert code == 2
        assert "usage error" in err and "--seed" in err

    def test_config_file_supplies_settings(self, corpus_path, tmp_path, capsys):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({
            "seed": 5, "resamples": 3, "folds": 3, "min_df": 1,
            "max_df_ratio": 0.95, "features": "count", "model": "nb",
        }))
        out_json = tmp_path / "report.json"
        code = main(["evaluate", "--corpus", str(corpus_path),
                     "--config", str(config), "--out-json", str(out_json)])
        assert code == 0
        report = load_json(out_json)
        assert report["config"]["seed"] == 5
        assert report["config"]["resamples"] == 3

    def test_explicit_flags_beat_the_config_file(self, corpus_path, tmp_path, capsys):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({
            "seed": 5, "resamples": 3, "folds": 3, "min_df": 1,
            "max_df_ratio": 0.95, "features": "count", "model": "nb",
        }))
        out_json = tmp_path / "report.json"
        code = main(["evaluate", "--corpus", str(corpus_path), "--config", str(config),
                     "--resamples", "2", "--out-json", str(out_json)])
        assert code == 0
        report = load_json(out_json)
        assert report["config"]["resamples"] == 2
        assert report["config"]["k_folds"] == 3

    def test_unknown_config_key_is_rejected(self, corpus_path, tmp_path, capsys):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"seed": 5, "fold_count": 3}))
        code = main(["evaluate", "--corpus", str(corpus_path), "--config", str(config)])
        err = capsys.readouterr().err
        assert code == 1
        assert "unknown config keys" in err and "fold_count" in err

    def test_missing_corpus_file(self, tmp_path, capsys):
        code = main(["evaluate", "--corpus", str(tmp_path / "nope.jsonl"),
                     "--seed", "1"] + FAST_EVAL_ARGS)
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_malformed_corpus_line_is_located(self, tmp_path, capsys):
        path = tmp_path / "bad.jsonl"
        good = {"id": "u1", "label": "positive", "interests": ["x"]}
        path.write_text(json.dumps(good) + "\n{oops\n", encoding="utf-8")
        code = main(["evaluate", "--corpus", str(path), "--seed", "1"] + FAST_EVAL_ARGS)
        err = capsys.readouterr().err
        assert code == 1
        assert ":2:" in err

    def test_unknown_flag_is_an_argparse_error(self, corpus_path):
        with pytest.raises(SystemExit) as exc:
            main(["evaluate", "--corpus", str(corpus_path), "--seed", "1", "--bogus"])
        assert exc.value.code == 2

    def test_audit_reports_clean_fold_scoped_run(self, corpus_path, capsys):
        code = main(["evaluate", "--corpus", str(corpus_path), "--seed", "3", "--audit"]
                    + VOCAB_ARGS
                    + ["--resamples", "2", "--folds", "3",
                       "--features", "tfidf", "--model", "nb"])
        out = capsys.readouterr().out
        assert code == 0
        assert "audit: clean" in out

    def test_audit_flags_corpus_wide_idf(self, corpus_path, capsys):
        code = main(["evaluate", "--corpus", str(corpus_path), "--seed", "3", "--audit",
                     "--idf-scope", "global"]
                    + VOCAB_ARGS
                    + ["--resamples", "2", "--folds", "3",
                       "--features", "tfidf", "--model", "nb"])
        err = capsys.readouterr().err
        assert code == 1
        assert "violation" in err


class TestTrainPredict:
    def test_train_writes_model_and_vocabulary(self, trained):
        assert trained.with_name("detector.model.json").exists()
        assert trained.with_name("detector.vocab.json").exists()

    def test_predict_labels_every_profile(self, corpus_path, trained, tmp_path, capsys):
        out = tmp_path / "pred.jsonl"
        code = main(["predict", "--corpus", str(corpus_path),
                     "--model", str(trained.with_name("detector.model.json")),
                     "--vocab", str(trained.with_name("detector.vocab.json")),
                     "--seed", "1", "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 24
        for line in lines:
            record = json.loads(line)
            assert set(record) == {"id", "label", "score"}
            assert record["label"] in ("positive", "negative")
            assert 0.0 <= record["score"] <= 1.0

    def test_predictions_recover_the_planted_labels(self, corpus_path, trained, tmp_path, capsys):
        out = tmp_path / "pred.jsonl"
        main(["predict", "--corpus", str(corpus_path),
              "--model", str(trained.with_name("detector.model.json")),
              "--vocab", str(trained.with_name("detector.vocab.json")),
              "--seed", "1", "--out", str(out)])
        truth = {p.id: p.label for p in load_corpus(corpus_path).profiles}
        records = [json.loads(line) for line in out.read_text().splitlines()]
        hits = sum(truth[r["id"]] == r["label"] for r in records)
        assert hits >= 22  # trained on the same strongly separated corpus

    def test_predict_rejects_mismatched_vocabulary(
        self, corpus_path, trained, tmp_path, capsys
    ):
        other_corpus = tmp_path / "other.jsonl"
        assert main(["synth", "--out", str(other_corpus), "--seed", "99",
                     "--n-per-class", "12", "--vocab-size", "30",
                     "--signature-size", "4", "--interests-per-user", "6.0",
                     "--separation", "0.9"]) == 0
        other_prefix = tmp_path / "other"
        assert main(["train", "--corpus", str(other_corpus), "--seed", "7",
                     "--features", "count", "--model", "nb",
                     "--out", str(other_prefix)] + VOCAB_ARGS) == 0
        capsys.readouterr()
        code = main(["predict", "--corpus", str(corpus_path),
                     "--model", str(trained.with_name("detector.model.json")),
                     "--vocab", str(tmp_path / "other.vocab.json"),
                     "--seed", "1"])
        err = capsys.readouterr().err
        assert code == 1
        assert "vocabulary mismatch" in err

    def test_predict_rejects_corrupt_model_file(self, corpus_path, trained, tmp_path, capsys):
        bad = tmp_path / "bad.model.json"
        bad.write_text("{not json", encoding="utf-8")
        code = main(["predict", "--corpus", str(corpus_path), "--model", str(bad),
                     "--vocab", str(trained.with_name("detector.vocab.json")),
                     "--seed", "1"])
        assert code == 1

    def test_predict_rejects_model_without_fingerprint(
        self, corpus_path, trained, tmp_path, capsys
    ):
        bad = tmp_path / "stripped.model.json"
        obj = load_json(trained.with_name("detector.model.json"))
        del obj["vocab_fingerprint"]
        bad.write_text(json.dumps(obj), encoding="utf-8")
        code = main(["predict", "--corpus", str(corpus_path), "--model", str(bad),
                     "--vocab", str(trained.with_name("detector.vocab.json")),
                     "--seed", "1"])
        err = capsys.readouterr().err
        assert code == 1
        assert "fingerprint" in err


@pytest.fixture(scope="module")
def lda_prefix(tmp_path_factory, corpus_path):
    """A topic-mixture model trained on the module corpus."""
    prefix = tmp_path_factory.mktemp("models") / "lda"
    code = main(
        ["train", "--corpus", str(corpus_path), "--seed", "7",
         "--features", "lda", "--model", "nb", "--out", str(prefix)]
        + VOCAB_ARGS
        + ["--topics", "2", "--lda-sweeps", "20", "--lda-burn-in", "10",
           "--lda-sample-lag", "2"]
    )
    assert code == 0
    return prefix


class TestLdaRoundTrip:
    def test_topics_file_is_written(self, lda_prefix):
        assert lda_prefix.with_name("lda.topics.json").exists()

    def test_predict_requires_the_topics_file(self, corpus_path, lda_prefix, capsys):
        code = main(["predict", "--corpus", str(corpus_path),
                     "--model", str(lda_prefix.with_name("lda.model.json")),
                     "--vocab", str(lda_prefix.with_name("lda.vocab.json")),
                     "--seed", "1"])
        err = capsys.readouterr().err
        assert code == 2
        assert "--topics" in err

    def test_predict_with_topics_labels_everything(self, corpus_path, lda_prefix, capsys):
        code = main(["predict", "--corpus", str(corpus_path),
                     "--model", str(lda_prefix.with_name("lda.model.json")),
                     "--vocab", str(lda_prefix.with_name("lda.vocab.json")),
                     "--topics", str(lda_prefix.with_name("lda.topics.json")),
                     "--infer-iters", "20", "--seed", "1"])
        out = capsys.readouterr().out
        assert code == 0
        assert len(out.splitlines()) == 24


class TestRank:
    def test_table_and_json_outputs(self, corpus_path, tmp_path, capsys):
        out_json = tmp_path / "rank.json"
        code = main(["rank", "--corpus", str(corpus_path), "--seed", "5",
                     "--top", "3", "--out-json", str(out_json)] + VOCAB_ARGS)
        out = capsys.readouterr().out
        assert code == 0
        assert "top (positive-leaning)" in out
        entries = load_json(out_json)
        assert len(entries) == 6  # top list then bottom list
        top_terms = [e["term"] for e in entries[:3]]
        bottom_terms = [e["term"] for e in entries[3:]]
        assert all(t.startswith("sig-pos-") for t in top_terms)
        assert all(t.startswith("sig-neg-") for t in bottom_terms)

    def test_rank_json_is_deterministic(self, corpus_path, tmp_path, capsys):
        a = tmp_path / "a.json"
        b = tmp_path / "b.json"
        for path in (a, b):
            assert main(["rank", "--corpus", str(corpus_path), "--seed", "5",
                         "--top", "3", "--out-json", str(path)] + VOCAB_ARGS) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_nb_rate_estimator_runs(self, corpus_path, capsys):
        code = main(["rank", "--corpus", str(corpus_path), "--seed", "5",
                     "--top", "2", "--estimator", "nb-rate"] + VOCAB_ARGS)
        assert code == 0

    def test_oversized_top_is_an_error(self, corpus_path, capsys):
        code = main(["rank", "--corpus", str(corpus_path), "--seed", "5",
                     "--top", "5000"] + VOCAB_ARGS)
        err = capsys.readouterr().err
        assert code == 1
        assert "error:" in err


def test_version_flag_reports_package_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "0.1.0" in capsys.readouterr().out
