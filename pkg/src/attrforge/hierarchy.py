"""Hierarchical classifier: filter-side fast track, relevance layer, and a
one-vs-one leaf with cumulative-weight voting, plus the template+SVM hybrid.

The topology is configuration, not code: a config holds an optional binary
relevance node ({Relevant, Other}) above a leaf node spanning the positive
labels.  The classifier budget follows sum(p_i * (p_i - 1) / 2) over nodes,
so the default two-layer setup costs 1 + 6 = 7 binary trainings for four
positive labels.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import (
    ENTITY_TAGS,
    POSITIVE_LABELS,
    AttributeLabel,
    CandidateInstance,
)
from .features import SparseVector
from .svm import SvmModel, SvmParams, decision_value, train_binary
from .templates import RuleSet, extract_by_templates, match_rule

RELEVANCE_NODE = frozenset({"Relevant", "Other"})
LEAF_NODE = frozenset(lab.name for lab in POSITIVE_LABELS)

LabelPair = tuple[AttributeLabel, AttributeLabel]


class HierarchyError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class FastTrackRule:
    """Route a candidate straight to a label from its entity NE tags."""

    priority: int
    target: AttributeLabel
    e1_ne: str | None = None  # None matches any tag
    e2_ne: str | None = None

    def __post_init__(self):
        if self.target is AttributeLabel.Other:
            raise HierarchyError("fast track cannot target Other")
        for tag in (self.e1_ne, self.e2_ne):
            if tag is not None and tag not in ENTITY_TAGS:
                raise HierarchyError(f"unknown NE tag {tag!r}")

    def matches(self, cand: CandidateInstance) -> bool:
        return (self.e1_ne is None or cand.e1_ne == self.e1_ne) and (
            self.e2_ne is None or cand.e2_ne == self.e2_ne
        )


DEFAULT_FAST_TRACK = (
    FastTrackRule(priority=1, target=AttributeLabel.BirthDate, e2_ne="TIME"),
)


@dataclass(frozen=True)
class HierarchyConfig:
    layers: tuple[frozenset[str], ...] = (RELEVANCE_NODE, LEAF_NODE)
    fast_track: tuple[FastTrackRule, ...] = DEFAULT_FAST_TRACK
    k: int = len(POSITIVE_LABELS)

    def __post_init__(self):
        if self.k < 2:
            raise HierarchyError("k must be >= 2")
        if not self.layers or self.layers[-1] != LEAF_NODE:
            raise HierarchyError("last node must span the positive labels")
        if len(LEAF_NODE) != self.k:
            raise HierarchyError("k must equal the positive label count")
        for node in self.layers[:-1]:
            if node != RELEVANCE_NODE:
                raise HierarchyError("non-leaf nodes must be {Relevant, Other}")
        if len(self.layers) > 2:
            raise HierarchyError("at most one relevance layer is supported")

    @property
    def has_relevance(self) -> bool:
        return len(self.layers) == 2


FLAT_CONFIG = HierarchyConfig(layers=(LEAF_NODE,), fast_track=())


def classifier_count(config) -> int:
    """sum of p*(p-1)/2 over the nodes of a config (or raw node list)."""
    nodes = config.layers if isinstance(config, HierarchyConfig) else config
    return sum(len(node) * (len(node) - 1) // 2 for node in nodes)


def label_pairs() -> list[LabelPair]:
    out = []
    for i, a in enumerate(POSITIVE_LABELS):
        for b in POSITIVE_LABELS[i + 1 :]:
            out.append((a, b))
    return out


@dataclass(frozen=True)
class HierarchyModel:
    config: HierarchyConfig
    relevance: SvmModel | None
    pairwise: dict[LabelPair, SvmModel]

    def __post_init__(self):
        expected = len(POSITIVE_LABELS) * (len(POSITIVE_LABELS) - 1) // 2
        if len(self.pairwise) != expected:
            raise HierarchyError(f"need exactly {expected} pairwise models")
        if self.config.has_relevance and self.relevance is None:
            raise HierarchyError("config has a relevance layer but no model")


def apply_fast_track(
    rules: tuple[FastTrackRule, ...], cand: CandidateInstance
) -> AttributeLabel | None:
    """First rule in priority order whose condition holds; else None."""
    for rule in sorted(rules, key=lambda r: r.priority):
        if rule.matches(cand):
            return rule.target
    return None


def train_hierarchy(
    train: list[tuple[SparseVector, AttributeLabel]],
    config: HierarchyConfig | None = None,
    params: SvmParams | None = None,
    n_features: int | None = None,
    trainer=None,
) -> HierarchyModel:
    """Train the relevance classifier (if configured) plus the one-vs-one
    leaf group; exactly classifier_count(config) binary trainings happen.

    `trainer` substitutes for train_binary (instrumentation hook).
    """
    config = config or HierarchyConfig()
    params = params or SvmParams()
    trainer = trainer or train_binary

    present = {lab for _, lab in train}
    needed = set(POSITIVE_LABELS) | {AttributeLabel.Other}
    missing = sorted(lab.name for lab in needed - present)
    if missing:
        raise HierarchyError(f"training set lacks labels: {', '.join(missing)}")

    relevance = None
    if config.has_relevance:
        xs = [x for x, _ in train]
        ys = [1 if lab is not AttributeLabel.Other else -1 for _, lab in train]
        relevance = trainer(xs, ys, params, n_features)

    pairwise: dict[LabelPair, SvmModel] = {}
    for a, b in label_pairs():
        xs, ys = [], []
        for x, lab in train:
            if lab is a:
                xs.append(x)
                ys.append(1)
            elif lab is b:
                xs.append(x)
                ys.append(-1)
        pairwise[(a, b)] = trainer(xs, ys, params, n_features)
    return HierarchyModel(config, relevance, pairwise)


def vote_leaf(
    pair_values: dict[LabelPair, float],
) -> tuple[AttributeLabel, int, float]:
    """One-vs-one cumulative voting.

    Each pair's classifier votes for its winner (positive decision means
    the pair's first label) with weight min(|value|, 1).  Greatest vote
    count wins; ties fall to accumulated weight, then fixed label order.
    """
    votes = {lab: 0 for lab in POSITIVE_LABELS}
    weights = {lab: 0.0 for lab in POSITIVE_LABELS}
    for (a, b), value in pair_values.items():
        winner = a if value >= 0 else b
        votes[winner] += 1
        weights[winner] += min(abs(value), 1.0)
    best = POSITIVE_LABELS[0]
    for lab in POSITIVE_LABELS[1:]:
        if votes[lab] > votes[best] or (
            votes[lab] == votes[best] and weights[lab] > weights[best]
        ):
            best = lab
    return best, votes[best], weights[best]


def classify(
    model: HierarchyModel, cand: CandidateInstance, x: SparseVector
) -> tuple[AttributeLabel, float]:
    """Layer-by-layer descent: fast track, relevance cutoff, leaf voting.

    Fast-track hits score +inf; a relevance rejection returns (Other,
    decision value); a leaf decision scores the winner's accumulated
    vote weight.
    """
    fast = apply_fast_track(model.config.fast_track, cand)
    if fast is not None:
        return fast, float("inf")
    if model.relevance is not None:
        value = decision_value(model.relevance, x)
        if value < 0:
            return AttributeLabel.Other, value
    pair_values = {
        pair: decision_value(m, x) for pair, m in sorted(
            model.pairwise.items(), key=lambda kv: (kv[0][0].name, kv[0][1].name)
        )
    }
    label, _, weight = vote_leaf(pair_values)
    return label, weight


def extract_hybrid(
    rules: RuleSet,
    model: HierarchyModel,
    cands: list[CandidateInstance],
    featurizer,
) -> list[tuple[CandidateInstance, AttributeLabel]]:
    """Templates take precedence; the cascade covers unmatched candidates.

    Other outcomes yield no prediction.  `featurizer` maps a candidate to
    its sparse vector under the model's frozen feature map.
    """
    out = []
    for cand in cands:
        label = None
        for rule in rules.rules:
            if match_rule(rule, cand, rules.lexicon) is not None:
                label = rule.label
                break
        if label is None:
            label, _ = classify(model, cand, featurizer(cand))
        if label is not AttributeLabel.Other:
            out.append((cand, label))
    return out


def extract_svm(
    model: HierarchyModel,
    cands: list[CandidateInstance],
    featurizer,
) -> list[tuple[CandidateInstance, AttributeLabel]]:
    """Cascade-only extraction; Other outcomes yield no prediction."""
    out = []
    for cand in cands:
        label, _ = classify(model, cand, featurizer(cand))
        if label is not AttributeLabel.Other:
            out.append((cand, label))
    return out


__all__ = [
    "FastTrackRule",
    "HierarchyConfig",
    "HierarchyModel",
    "HierarchyError",
    "DEFAULT_FAST_TRACK",
    "FLAT_CONFIG",
    "classifier_count",
    "label_pairs",
    "apply_fast_track",
    "train_hierarchy",
    "vote_leaf",
    "classify",
    "extract_hybrid",
    "extract_svm",
    "extract_by_templates",
]
