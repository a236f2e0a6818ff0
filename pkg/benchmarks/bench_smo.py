#!/usr/bin/env python3
"""Benchmark the SMO backends (pure Python vs compiled) on real workloads.

Builds the training problems the pipeline actually produces (synthetic
corpus -> features -> one-vs-one + relevance binary problems), runs each
backend on identical CSR inputs, and prints a timing table.  Also checks
that the two backends return bit-identical results.

Usage: python benchmarks/bench_smo.py [--n-sentences 2400] [--repeats 3]
"""

import argparse
import importlib.util
import sys
import time
from array import array
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from attrforge import _smo_py
from attrforge.corpus import AttributeLabel, parse_corpus
from attrforge.features import FeatureMap, KeywordParams, select_keywords, vectorize
from attrforge.pipeline import training_instances
from attrforge.synthgen import GenParams, generate

HAS_EXT = importlib.util.find_spec("attrforge._smo_cy") is not None


def build_problems(n_sentences):
    text = generate(GenParams(seed=42, n_sentences=n_sentences, noise=0.2))
    instances = training_instances(parse_corpus(text))
    keywords = select_keywords(instances, KeywordParams())
    fmap = FeatureMap()
    xs = [vectorize(cand, fmap, keywords) for cand, _ in instances]
    fmap.freeze()
    labels = [lab for _, lab in instances]

    def csr(selector):
        indptr = array("i", [0])
        indices = array("i")
        data = array("d")
        ys = array("d")
        for x, lab in zip(xs, labels):
            y = selector(lab)
            if y == 0:
                continue
            for col, val in x.items():
                indices.append(col)
                data.append(val)
            indptr.append(len(indices))
            ys.append(float(y))
        return indptr, indices, data, ys

    problems = {
        "relevance": csr(lambda lab: 1 if lab is not AttributeLabel.Other else -1),
        "father-vs-mother": csr(
            lambda lab: {AttributeLabel.Father: 1, AttributeLabel.Mother: -1}.get(
                lab, 0
            )
        ),
    }
    return problems, len(fmap)


def run(backend, problem, n_features, repeats):
    indptr, indices, data, ys = problem
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = backend.solve(
            indptr, indices, data, ys, n_features, 1.0, 5e-4, 1e-8, 50
        )
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--n-sentences", type=int, default=2400)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    problems, n_features = build_problems(args.n_sentences)
    print(f"workload: {args.n_sentences} sentences, {n_features} features")
    print(f"{'problem':<18} {'n':>6} {'pure':>10} {'compiled':>10} {'speedup':>8}")

    for name, problem in problems.items():
        n = len(problem[3])
        t_pure, r_pure = run(_smo_py, problem, n_features, args.repeats)
        if HAS_EXT:
            from attrforge import _smo_cy

            t_cy, r_cy = run(_smo_cy, problem, n_features, args.repeats)
            identical = (
                list(r_pure[0]) == list(r_cy[0])
                and list(r_pure[1]) == list(r_cy[1])
                and r_pure[2] == r_cy[2]
            )
            print(
                f"{name:<18} {n:>6} {t_pure:>9.3f}s {t_cy:>9.3f}s "
                f"{t_pure / t_cy:>7.1f}x"
                + ("" if identical else "  RESULTS DIFFER")
            )
        else:
            print(f"{name:<18} {n:>6} {t_pure:>9.3f}s {'n/a':>10} {'n/a':>8}")

    if not HAS_EXT:
        print("\ncompiled backend not built; run: python setup.py build_ext --inplace")


if __name__ == "__main__":
    main()
