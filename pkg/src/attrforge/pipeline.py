"""End-to-end wiring: corpus -> candidates -> features -> models -> predictions.

Thin orchestration over the library modules; the CLI calls these, and so
do the end-to-end tests.  Extraction can fan out over a thread pool
(ATTRFORGE_THREADS or the `threads` argument); output order is canonical
regardless of scheduling.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

from .corpus import (
    AttributeLabel,
    CandidateInstance,
    TaggedSentence,
    candidate_pairs,
    filter_sentences,
    gold_label,
)
from .evaluation import Prediction
from .features import (
    FeatureMap,
    KeywordParams,
    select_keywords,
    vectorize,
)
from .hierarchy import (
    HierarchyConfig,
    extract_hybrid,
    extract_svm,
    train_hierarchy,
)
from .modelio import ModelBundle
from .svm import SvmParams
from .templates import RuleSet, extract_by_templates, rule_literal_surfaces

MODES = ("hybrid", "svm", "template")


def env_threads() -> int:
    try:
        return max(1, int(os.environ.get("ATTRFORGE_THREADS", "1")))
    except ValueError:
        return 1


def training_instances(
    sentences: list[TaggedSentence],
) -> list[tuple[CandidateInstance, AttributeLabel]]:
    """Candidate pairs of the filtered sentences, labeled from gold."""
    kept, _ = filter_sentences(sentences)
    out = []
    for sent in kept:
        for cand in candidate_pairs(sent):
            out.append((cand, gold_label(sent, cand.e1, cand.e2)))
    return out


def train_pipeline(
    sentences: list[TaggedSentence],
    rules: RuleSet | None = None,
    config: HierarchyConfig | None = None,
    svm_params: SvmParams | None = None,
    keyword_params: KeywordParams | None = None,
    trainer=None,
) -> ModelBundle:
    """Build a full extractor bundle from a gold-annotated training corpus.

    When a rule set is given its literal surfaces seed the keyword table.
    """
    instances = training_instances(sentences)
    if not instances:
        raise ValueError("no training candidates after filtering")
    seeds = rule_literal_surfaces(rules) if rules is not None else frozenset()
    keywords = select_keywords(instances, keyword_params, seeds)
    fmap = FeatureMap()
    xs = [vectorize(cand, fmap, keywords) for cand, _ in instances]
    fmap.freeze()
    labeled = [(x, lab) for x, (_, lab) in zip(xs, instances)]
    model = train_hierarchy(
        labeled, config, svm_params, n_features=len(fmap), trainer=trainer
    )
    return ModelBundle(fmap, keywords, model)


def extract_pipeline(
    sentences: list[TaggedSentence],
    bundle: ModelBundle | None = None,
    rules: RuleSet | None = None,
    mode: str = "hybrid",
    threads: int | None = None,
) -> list[Prediction]:
    """Run one extraction mode over a corpus; canonical prediction order."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if mode in ("hybrid", "svm") and bundle is None:
        raise ValueError(f"mode {mode!r} needs a trained model")
    if mode in ("hybrid", "template") and rules is None:
        raise ValueError(f"mode {mode!r} needs a rule set")
    kept, _ = filter_sentences(sentences)

    def featurize(cand: CandidateInstance):
        return vectorize(cand, bundle.fmap, bundle.keywords)

    def run_one(sent: TaggedSentence) -> list[Prediction]:
        cands = candidate_pairs(sent)
        if mode == "template":
            pairs = extract_by_templates(rules, cands)
        elif mode == "svm":
            pairs = extract_svm(bundle.model, cands, featurize)
        else:
            pairs = extract_hybrid(rules, bundle.model, cands, featurize)
        return [(sent.id, lab, c.e1, c.e2) for c, lab in pairs]

    threads = threads if threads is not None else env_threads()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(run_one, kept))
    else:
        chunks = [run_one(sent) for sent in kept]

    predictions = [pred for chunk in chunks for pred in chunk]
    predictions.sort(key=lambda p: (p[0], p[2], p[3], p[1].name))
    return predictions
