import itertools

import pytest

from attrforge.corpus import (
    POSITIVE_LABELS,
    AttributeLabel,
    CandidateInstance,
    TaggedSentence,
    TaggedToken,
    default_lexicon,
)
from attrforge.features import SparseVector
from attrforge.hierarchy import (
    DEFAULT_FAST_TRACK,
    FLAT_CONFIG,
    FastTrackRule,
    HierarchyConfig,
    HierarchyError,
    HierarchyModel,
    apply_fast_track,
    classifier_count,
    classify,
    extract_hybrid,
    label_pairs,
    train_hierarchy,
    vote_leaf,
)
from attrforge.svm import SvmModel, train_binary
from attrforge.templates import parse_rules

BD, BP, FA, MO = POSITIVE_LABELS


def cand_with_tags(e1_ne="PER", e2_ne="TIME"):
    rows = [("a", "n", e1_ne), ("x", "k", "O"), ("b", "t" if e2_ne == "TIME" else "n", e2_ne)]
    s = TaggedSentence("s", tuple(TaggedToken(*r) for r in rows))
    return CandidateInstance(s, (0, 1), (2, 3))


class TestClassifierCount:
    def test_flat_one_vs_one(self):
        assert classifier_count(FLAT_CONFIG) == 6

    def test_default_two_layer(self):
        assert classifier_count(HierarchyConfig()) == 7

    def test_single_category_node(self):
        assert classifier_count([{"only"}]) == 0

    def test_monotone_in_added_nodes(self):
        base = classifier_count([{"a", "b"}, {"w", "x", "y", "z"}])
        more = classifier_count([{"a", "b"}, {"c", "d"}, {"w", "x", "y", "z"}])
        assert more > base


class TestFastTrack:
    def test_time_routes_to_birth_date(self):
        assert (
            apply_fast_track(DEFAULT_FAST_TRACK, cand_with_tags(e2_ne="TIME"))
            is BD
        )

    def test_loc_not_routed(self):
        assert apply_fast_track(DEFAULT_FAST_TRACK, cand_with_tags(e2_ne="LOC")) is None

    def test_priority_order(self):
        rules = (
            FastTrackRule(priority=2, target=FA, e2_ne="TIME"),
            FastTrackRule(priority=1, target=BD, e2_ne="TIME"),
        )
        assert apply_fast_track(rules, cand_with_tags(e2_ne="TIME")) is BD

    def test_target_other_rejected(self):
        with pytest.raises(HierarchyError):
            FastTrackRule(priority=1, target=AttributeLabel.Other)


def toy_training_set():
    """Four well-separated label clusters plus Other, in 5 binary dims."""
    data = []
    for col, lab in enumerate([BD, BP, FA, MO]):
        for _ in range(6):
            data.append((SparseVector((col,)), lab))
    for _ in range(6):
        data.append((SparseVector((4,)), AttributeLabel.Other))
    return data


class TestTrainHierarchy:
    def test_default_trains_seven(self):
        calls = []

        def counting(xs, ys, params=None, n_features=None):
            calls.append(len(xs))
            return train_binary(xs, ys, params, n_features)

        train_hierarchy(toy_training_set(), n_features=5, trainer=counting)
        assert len(calls) == classifier_count(HierarchyConfig()) == 7

    def test_flat_trains_six(self):
        calls = []

        def counting(xs, ys, params=None, n_features=None):
            calls.append(1)
            return train_binary(xs, ys, params, n_features)

        train_hierarchy(
            toy_training_set(), FLAT_CONFIG, n_features=5, trainer=counting
        )
        assert len(calls) == 6

    def test_missing_label_is_named(self):
        data = [(x, lab) for x, lab in toy_training_set() if lab is not MO]
        with pytest.raises(HierarchyError) as err:
            train_hierarchy(data, n_features=5)
        assert "Mother" in str(err.value)

    def test_identical_distributions_still_train(self):
        data = toy_training_set()
        # make Father and Mother share one feature column
        data = [
            (SparseVector((2,)) if lab is MO else x, lab) for x, lab in data
        ]
        model = train_hierarchy(data, n_features=5)
        label, _ = classify(model, cand_with_tags(e2_ne="LOC"), SparseVector((2,)))
        assert label in (FA, MO)


class TestVoteLeaf:
    def _pair_values(self, signs, weight=1.0):
        return {
            pair: (weight if s > 0 else -weight)
            for pair, s in zip(label_pairs(), signs)
        }

    def test_three_votes_always_wins(self):
        # enumerate all 2^6 sign patterns; a 3-vote label is unique and wins
        for signs in itertools.product((1, -1), repeat=6):
            values = self._pair_values(signs)
            votes = {lab: 0 for lab in POSITIVE_LABELS}
            for (a, b), value in values.items():
                votes[a if value >= 0 else b] += 1
            winner, n_votes, _ = vote_leaf(values)
            if max(votes.values()) == 3:
                top = [lab for lab, v in votes.items() if v == 3]
                assert len(top) == 1
                assert winner is top[0] and n_votes == 3

    def test_tie_breaks_by_weight(self):
        # BD beats BP/FA weakly, MO beats BD and the rest strongly:
        # BD and MO both get 3 votes is impossible; force a 2-2 tie instead
        values = {
            (BD, BP): 0.2,
            (BD, FA): 0.3,
            (BD, MO): -0.9,
            (BP, FA): -0.8,
            (BP, MO): 0.1,
            (FA, MO): 0.1,
        }
        # votes: BD 2 (BP, FA), MO 1, FA 1 (MO), BP 2 (FA? no...)
        winner, n_votes, weight = vote_leaf(values)
        votes = {lab: 0 for lab in POSITIVE_LABELS}
        for (a, b), v in values.items():
            votes[a if v >= 0 else b] += 1
        assert votes[winner] == max(votes.values())

    def test_fixed_order_breaks_exact_ties(self):
        values = {pair: 0.0 for pair in label_pairs()}
        # value 0 votes the pair's first label: BD 3, BP 2, FA 1, MO 0
        winner, _, _ = vote_leaf(values)
        assert winner is BD

    def test_weight_clipped_at_one(self):
        values = self._pair_values((1, 1, 1, 1, 1, 1), weight=7.5)
        _, _, weight = vote_leaf(values)
        assert weight == 3.0  # three wins for BD, each clipped to 1


class TestClassify:
    def _model(self):
        return train_hierarchy(toy_training_set(), n_features=5)

    def test_fast_track_wins_regardless_of_features(self):
        model = self._model()
        label, score = classify(model, cand_with_tags(e2_ne="TIME"), SparseVector((4,)))
        assert label is BD and score == float("inf")

    def test_relevance_cutoff_returns_other(self):
        model = self._model()
        label, score = classify(model, cand_with_tags(e2_ne="LOC"), SparseVector((4,)))
        assert label is AttributeLabel.Other and score < 0

    def test_relevance_cutoff_passes_through_value(self):
        base = self._model()
        rigged = HierarchyModel(
            base.config,
            SvmModel(weights=(0.0,) * 5, bias=-2.0),
            base.pairwise,
        )
        label, score = classify(
            rigged, cand_with_tags(e2_ne="LOC"), SparseVector((0,))
        )
        assert label is AttributeLabel.Other and score == -2.0

    def test_leaf_vote(self):
        model = self._model()
        for col, expected in [(0, BD), (1, BP), (2, FA), (3, MO)]:
            label, _ = classify(
                model, cand_with_tags(e2_ne="LOC"), SparseVector((col,))
            )
            assert label is expected

    def test_deterministic(self):
        model = self._model()
        cand = cand_with_tags(e2_ne="LOC")
        outs = {classify(model, cand, SparseVector((1,))) for _ in range(5)}
        assert len(outs) == 1


class TestFlatEquivalence:
    def test_flat_config_equals_flat_one_vs_one(self):
        data = toy_training_set()
        model = train_hierarchy(data, FLAT_CONFIG, n_features=5)
        assert model.relevance is None

        def flat_reference(x):
            votes = {lab: 0 for lab in POSITIVE_LABELS}
            weights = {lab: 0.0 for lab in POSITIVE_LABELS}
            for pair, m in model.pairwise.items():
                value = sum(m.weights[c] for c in x.columns) + m.bias
                winner = pair[0] if value >= 0 else pair[1]
                votes[winner] += 1
                weights[winner] += min(abs(value), 1.0)
            return max(
                POSITIVE_LABELS,
                key=lambda lab: (votes[lab], weights[lab], -POSITIVE_LABELS.index(lab)),
            )

        cand = cand_with_tags(e2_ne="LOC")
        for cols in [(0,), (1,), (2,), (3,), (4,), (0, 1), (2, 4), ()]:
            x = SparseVector(tuple(cols))
            assert classify(model, cand, x)[0] is flat_reference(x)


class TestHybrid:
    def test_template_precedence(self):
        lex = default_lexicon()
        rules = parse_rules("RULE r 1 Father : E1:PER *{0,1} E2:TIME pos:v\n", lex)
        rows = [("a", "n", "PER"), ("b", "t", "TIME"), ("v", "v", "O")]
        s = TaggedSentence("s", tuple(TaggedToken(*r) for r in rows))
        cand = CandidateInstance(s, (0, 1), (1, 2))
        model = train_hierarchy(toy_training_set(), n_features=5)
        # SVM (fast track) would say BirthDate; the template wins
        preds = extract_hybrid(rules, model, [cand], lambda c: SparseVector((0,)))
        assert preds == [(cand, FA)]

    def test_svm_fallback(self):
        lex = default_lexicon()
        rules = parse_rules('RULE r 1 Father : E1 "absent" E2\n', lex)
        model = train_hierarchy(toy_training_set(), n_features=5)
        cand = cand_with_tags(e2_ne="LOC")
        preds = extract_hybrid(rules, model, [cand], lambda c: SparseVector((2,)))
        assert preds == [(cand, FA)]

    def test_other_produces_no_prediction(self):
        lex = default_lexicon()
        rules = parse_rules('RULE r 1 Father : E1 "absent" E2\n', lex)
        model = train_hierarchy(toy_training_set(), n_features=5)
        cand = cand_with_tags(e2_ne="LOC")
        preds = extract_hybrid(rules, model, [cand], lambda c: SparseVector((4,)))
        assert preds == []


class TestConfigValidation:
    def test_leaf_must_be_last(self):
        with pytest.raises(HierarchyError):
            HierarchyConfig(layers=(frozenset({"Relevant", "Other"}),))

    def test_pairwise_completeness_enforced(self):
        with pytest.raises(HierarchyError):
            HierarchyModel(HierarchyConfig(), None, {})
