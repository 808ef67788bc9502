#!/usr/bin/env python3
"""Walk one synthetic corpus through the whole toolchain.

Generates a corpus with a moderate planted signal, evaluates the protocol
(with the leakage audit on), trains a standalone TF-IDF + logistic-regression
detector, scores a fresh corpus from the same distribution with it, and
prints the odds-ratio ranking. Everything lands in --workdir so the artifacts
can be inspected afterwards.
"""

import argparse
import sys
from pathlib import Path

from nssidetect.cli import main as cli


def run(step, argv):
    print(f"\n$ nssidetect {' '.join(argv)}\n")
    code = cli(argv)
    if code != 0:
        print(f"{step} failed with exit code {code}", file=sys.stderr)
        sys.exit(code)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--workdir", default="demo-out", help="artifact directory (default demo-out)")
    parser.add_argument("--seed", type=int, default=11, help="master seed (default 11)")
    parser.add_argument("--n-per-class", type=int, default=150, help="profiles per class (default 150)")
    args = parser.parse_args(argv)

    workdir = Path(args.workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    corpus = workdir / "corpus.jsonl"
    fresh = workdir / "fresh.jsonl"
    seed = str(args.seed)
    scale = ["--n-per-class", str(args.n_per_class), "--separation", "0.6"]

    run("synth", ["synth", "--out", str(corpus), "--seed", seed] + scale)
    run("synth", ["synth", "--out", str(fresh), "--seed", str(args.seed + 1)] + scale)

    run("evaluate", [
        "evaluate", "--corpus", str(corpus), "--seed", seed, "--audit",
        "--min-df", "20",
        "--lda-sweeps", "200", "--lda-burn-in", "150", "--lda-sample-lag", "5",
        "--infer-iters", "50",
        "--out-json", str(workdir / "report.json"),
    ])

    prefix = workdir / "detector"
    run("train", [
        "train", "--corpus", str(corpus), "--seed", seed,
        "--features", "tfidf", "--model", "lr",
        "--min-df", "20", "--out", str(prefix),
    ])
    run("predict", [
        "predict", "--corpus", str(fresh), "--seed", seed,
        "--model", f"{prefix}.model.json", "--vocab", f"{prefix}.vocab.json",
        "--out", str(workdir / "predictions.jsonl"),
    ])
    run("rank", [
        "rank", "--corpus", str(corpus), "--seed", seed,
        "--min-df", "20", "--top", "10",
        "--out-json", str(workdir / "ranked.json"),
    ])
    print(f"\nartifacts in {workdir}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
