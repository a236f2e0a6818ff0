"""attrforge: template + SVM extraction of person-attribute relations
from POS/NE-tagged sentences."""

from .corpus import (
    AttributeLabel,
    CandidateInstance,
    CaseMarkerClass,
    CaseMarkerLexicon,
    CorpusError,
    GoldAnnotation,
    TaggedSentence,
    TaggedToken,
    candidate_pairs,
    classify_case_marker,
    default_lexicon,
    filter_sentences,
    parse_corpus,
    render_corpus,
    split_corpus,
)
from .svm import BACKEND

__version__ = "0.1.0"
