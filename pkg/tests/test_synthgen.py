import pytest

from attrforge.corpus import (
    POSITIVE_LABELS,
    AttributeLabel,
    parse_corpus,
)
from attrforge.evaluation import score
from attrforge.pipeline import extract_pipeline
from attrforge.synthgen import GenParams, apportion, default_label_mix, generate
from attrforge.templates import default_rules


class TestDeterminism:
    def test_same_params_same_bytes(self):
        a = generate(GenParams(seed=9, n_sentences=120, noise=0.3))
        b = generate(GenParams(seed=9, n_sentences=120, noise=0.3))
        assert a == b

    def test_different_seed_differs(self):
        a = generate(GenParams(seed=1, n_sentences=120))
        b = generate(GenParams(seed=2, n_sentences=120))
        assert a != b


class TestRoundTrip:
    @pytest.mark.parametrize("noise", [0.0, 0.25, 1.0])
    def test_parses_cleanly(self, noise):
        text = generate(GenParams(seed=3, n_sentences=150, noise=noise))
        sents = parse_corpus(text)
        assert len(sents) == 150

    def test_tibetan_alphabet(self):
        text = generate(GenParams(seed=5, n_sentences=60, alphabet="tibetan"))
        sents = parse_corpus(text)
        assert len(sents) == 60
        # template extraction still works over Tibetan surfaces
        rules = default_rules()
        preds = extract_pipeline(sents, rules=rules, mode="template")
        assert preds


class TestLabelMix:
    def test_default_counts_at_2400(self):
        counts = apportion(default_label_mix(), 2400)
        assert counts[AttributeLabel.Other] == 425
        assert sum(counts[lab] for lab in POSITIVE_LABELS) == 1975
        assert sum(counts.values()) == 2400

    def test_positive_sentence_count(self):
        text = generate(GenParams(seed=42, n_sentences=2400))
        sents = parse_corpus(text)
        positives = sum(1 for s in sents if s.gold)
        assert positives == 1975

    def test_marginals_track_mix(self):
        n = 2000
        text = generate(GenParams(seed=8, n_sentences=n))
        sents = parse_corpus(text)
        mix = default_label_mix()
        by_label = {lab: 0 for lab in POSITIVE_LABELS}
        for s in sents:
            for ann in s.gold:
                by_label[ann.label] += 1
        for lab in POSITIVE_LABELS:
            assert abs(by_label[lab] / n - mix[lab]) <= 0.02

    def test_apportion_is_exact(self):
        counts = apportion(default_label_mix(), 997)
        assert sum(counts.values()) == 997


class TestNoiseZero:
    def test_template_precision_is_perfect(self):
        text = generate(GenParams(seed=13, n_sentences=400, noise=0.0))
        sents = parse_corpus(text)
        rules = default_rules()
        preds = extract_pipeline(sents, rules=rules, mode="template")
        report = score(preds, sents)
        for lab in POSITIVE_LABELS:
            s = report.per_category[lab]
            assert s.counts.identified == s.counts.correct
            assert s.p == 100.0
            assert s.r == 100.0  # clean skeletons always match their rule


class TestNoise:
    def test_noise_reduces_template_recall(self):
        clean = generate(GenParams(seed=21, n_sentences=400, noise=0.0))
        noisy = generate(GenParams(seed=21, n_sentences=400, noise=0.5))
        rules = default_rules()
        r_clean = score(
            extract_pipeline(parse_corpus(clean), rules=rules, mode="template"),
            parse_corpus(clean),
        )
        r_noisy = score(
            extract_pipeline(parse_corpus(noisy), rules=rules, mode="template"),
            parse_corpus(noisy),
        )
        total_clean = sum(
            r_clean.per_category[lab].counts.correct for lab in POSITIVE_LABELS
        )
        total_noisy = sum(
            r_noisy.per_category[lab].counts.correct for lab in POSITIVE_LABELS
        )
        assert total_noisy < total_clean

    def test_noise_counts_exact(self):
        # noise fraction applies to round(noise * n) sentences
        text0 = generate(GenParams(seed=30, n_sentences=100, noise=0.0))
        text1 = generate(GenParams(seed=30, n_sentences=100, noise=0.1))
        a = parse_corpus(text0)
        b = parse_corpus(text1)
        differing = sum(1 for x, y in zip(a, b) if x.tokens != y.tokens)
        assert differing <= 10


class TestValidation:
    def test_bad_mix(self):
        with pytest.raises(ValueError):
            GenParams(label_mix={AttributeLabel.Other: 0.5})

    def test_bad_noise(self):
        with pytest.raises(ValueError):
            GenParams(noise=1.5)

    def test_bad_alphabet(self):
        with pytest.raises(ValueError):
            GenParams(alphabet="hex")
