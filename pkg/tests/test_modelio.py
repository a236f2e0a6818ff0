import pytest

from attrforge.corpus import parse_corpus, split_corpus
from attrforge.modelio import (
    HEADER,
    ModelFormatError,
    deserialize_bundle,
    serialize_bundle,
)
from attrforge.pipeline import train_pipeline
from attrforge.synthgen import GenParams, generate
from attrforge.templates import default_rules


@pytest.fixture(scope="module")
def bundle():
    text = generate(GenParams(seed=17, n_sentences=160, noise=0.15))
    sents = parse_corpus(text)
    train, _ = split_corpus(sents, 2 / 3, 17)
    return train_pipeline(train, rules=default_rules())


def test_round_trip_field_for_field(bundle):
    blob = serialize_bundle(bundle)
    loaded = deserialize_bundle(blob)

    assert loaded.fmap.key_to_col == bundle.fmap.key_to_col
    assert loaded.fmap.frozen
    assert loaded.keywords.entries == bundle.keywords.entries
    assert loaded.keywords.parameters == bundle.keywords.parameters
    assert loaded.model.config == bundle.model.config

    pairs = set(bundle.model.pairwise)
    assert set(loaded.model.pairwise) == pairs
    for pair in pairs:
        a = bundle.model.pairwise[pair]
        b = loaded.model.pairwise[pair]
        assert a.weights == b.weights
        assert a.bias == b.bias
        assert a.params == b.params
        assert a.n_support == b.n_support
    assert loaded.model.relevance.weights == bundle.model.relevance.weights
    assert loaded.model.relevance.bias == bundle.model.relevance.bias


def test_round_trip_is_byte_stable(bundle):
    blob = serialize_bundle(bundle)
    again = serialize_bundle(deserialize_bundle(blob))
    assert blob == again


def test_header_line(bundle):
    blob = serialize_bundle(bundle)
    assert blob.decode("utf-8").splitlines()[0] == HEADER


def test_version_mismatch(bundle):
    blob = serialize_bundle(bundle).replace(b"v1", b"v9", 1)
    with pytest.raises(ModelFormatError) as err:
        deserialize_bundle(blob)
    assert "version" in str(err.value)


def test_truncation_detected(bundle):
    blob = serialize_bundle(bundle)
    cut = blob[: len(blob) // 2]
    with pytest.raises(ModelFormatError):
        deserialize_bundle(cut)


def test_empty_stream():
    with pytest.raises(ModelFormatError):
        deserialize_bundle(b"")


def test_deserialized_models_do_not_retain_alphas(bundle):
    loaded = deserialize_bundle(serialize_bundle(bundle))
    assert loaded.model.relevance.alphas is None
