"""Tagged-corpus data model, column file format, and the case-marker lexicon.

Corpus files are UTF-8 text with LF line endings, one token per line:

    surface<TAB>pos<TAB>ne

Sentences are blank-line delimited blocks.  Header lines precede the token
lines of a block:

    #id <text>
    #rel <label> <e1start>-<e1end> <e2start>-<e2end>

Spans are half-open token index ranges.  Surfaces are NFC-normalized on
ingest; Tibetan combining marks have several encodings and matching must
compare canonical forms.

Lexicon files map one case-marker surface per line to its class:

    marker<TAB>major<TAB>sub?

Blank lines and `#` comments are allowed in lexicon files.
"""

from __future__ import annotations

import random
import unicodedata
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources

POS_TAGS = frozenset("nvtkadpmcx")
NE_TAGS = frozenset({"PER", "LOC", "TIME", "O"})
ENTITY_TAGS = frozenset({"PER", "LOC", "TIME"})

MAJOR_CLASSES = ("Nominative", "Possessive", "Pull", "From")
SUBS_BY_MAJOR = {
    "Nominative": ("Apply", "Tools"),
    "Pull": ("Occupation", "For", "Depend", "Community", "Time"),
}

Span = tuple[int, int]


class AttributeLabel(Enum):
    """The four person-attribute relations plus the negative category."""

    BirthDate = "BirthDate"
    BirthPlace = "BirthPlace"
    Father = "Father"
    Mother = "Mother"
    Other = "Other"

    def __lt__(self, other):
        order = list(type(self))
        return order.index(self) < order.index(other)


POSITIVE_LABELS = (
    AttributeLabel.BirthDate,
    AttributeLabel.BirthPlace,
    AttributeLabel.Father,
    AttributeLabel.Mother,
)


class CorpusError(ValueError):
    """Malformed corpus or lexicon input, located by line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


def nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


@dataclass(frozen=True, slots=True)
class TaggedToken:
    surface: str
    pos: str
    ne: str

    def __post_init__(self):
        object.__setattr__(self, "surface", nfc(self.surface))
        if not self.surface or "\t" in self.surface or "\n" in self.surface:
            raise CorpusError(f"bad surface {self.surface!r}")
        if self.pos not in POS_TAGS:
            raise CorpusError(f"unknown pos tag {self.pos!r}")
        if self.ne not in NE_TAGS:
            raise CorpusError(f"unknown ne tag {self.ne!r}")


def _spans_overlap(a: Span, b: Span) -> bool:
    return a[0] < b[1] and b[0] < a[1]


@dataclass(frozen=True, slots=True)
class GoldAnnotation:
    label: AttributeLabel
    e1: Span
    e2: Span

    def __post_init__(self):
        for span in (self.e1, self.e2):
            if span[0] < 0 or span[0] >= span[1]:
                raise CorpusError(f"empty or negative span {span}")
        if _spans_overlap(self.e1, self.e2):
            raise CorpusError(f"overlapping spans {self.e1} {self.e2}")


@dataclass(frozen=True, slots=True)
class TaggedSentence:
    id: str
    tokens: tuple[TaggedToken, ...]
    gold: tuple[GoldAnnotation, ...] = ()

    def __post_init__(self):
        if not self.tokens:
            raise CorpusError(f"sentence {self.id!r} has no tokens")
        n = len(self.tokens)
        for ann in self.gold:
            for span in (ann.e1, ann.e2):
                if span[1] > n:
                    raise CorpusError(
                        f"sentence {self.id!r}: span {span} outside 0..{n}"
                    )


@dataclass(frozen=True, slots=True)
class CandidateInstance:
    """An (entity-1, entity-2) pair inside one sentence."""

    sentence: TaggedSentence
    e1: Span
    e2: Span

    def __post_init__(self):
        if _spans_overlap(self.e1, self.e2):
            raise CorpusError(f"candidate spans overlap: {self.e1} {self.e2}")
        if self.sentence.tokens[self.e1[0]].ne != "PER":
            raise CorpusError("candidate e1 head must be PER")
        if self.sentence.tokens[self.e2[0]].ne not in ENTITY_TAGS:
            raise CorpusError("candidate e2 head must be an entity tag")

    @property
    def e1_ne(self) -> str:
        return self.sentence.tokens[self.e1[0]].ne

    @property
    def e2_ne(self) -> str:
        return self.sentence.tokens[self.e2[0]].ne


@dataclass(frozen=True, slots=True)
class CaseMarkerClass:
    major: str
    sub: str | None = None

    def __post_init__(self):
        if self.major not in MAJOR_CLASSES:
            raise CorpusError(f"unknown case-marker class {self.major!r}")
        if self.sub is not None:
            allowed = SUBS_BY_MAJOR.get(self.major, ())
            if self.sub not in allowed:
                raise CorpusError(
                    f"sub-class {self.sub!r} not valid for {self.major}"
                )


@dataclass(frozen=True)
class CaseMarkerLexicon:
    entries: dict[str, CaseMarkerClass] = field(default_factory=dict)

    def classify(self, surface: str) -> CaseMarkerClass | None:
        return self.entries.get(nfc(surface))


def classify_case_marker(
    surface: str, lexicon: CaseMarkerLexicon
) -> CaseMarkerClass | None:
    """Exact-match lookup of a surface in the lexicon; absent -> None."""
    return lexicon.classify(surface)


def parse_lexicon(text: str) -> CaseMarkerLexicon:
    entries: dict[str, CaseMarkerClass] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) not in (2, 3):
            raise CorpusError(f"expected 2 or 3 columns, got {len(cols)}", lineno)
        surface = nfc(cols[0])
        sub = cols[2] if len(cols) == 3 and cols[2] else None
        try:
            marker_class = CaseMarkerClass(cols[1], sub)
        except CorpusError as exc:
            raise CorpusError(str(exc), lineno) from None
        if surface in entries:
            raise CorpusError(f"duplicate marker {surface!r}", lineno)
        entries[surface] = marker_class
    return CaseMarkerLexicon(entries)


def render_lexicon(lexicon: CaseMarkerLexicon) -> str:
    lines = []
    for surface, cls in lexicon.entries.items():
        cols = [surface, cls.major] + ([cls.sub] if cls.sub else [])
        lines.append("\t".join(cols))
    return "\n".join(lines) + "\n"


def default_lexicon() -> CaseMarkerLexicon:
    """The bundled case-marker lexicon (data file, editable)."""
    data = resources.files("attrforge.data").joinpath("case_markers.lex")
    return parse_lexicon(data.read_text(encoding="utf-8"))


# --- corpus file parsing -------------------------------------------------


def _parse_span(text: str, lineno: int) -> Span:
    parts = text.split("-")
    if len(parts) != 2:
        raise CorpusError(f"bad span {text!r}", lineno)
    try:
        start, end = int(parts[0]), int(parts[1])
    except ValueError:
        raise CorpusError(f"bad span {text!r}", lineno) from None
    return (start, end)


def parse_corpus(text: str) -> list[TaggedSentence]:
    """Parse column-format corpus text into sentences.

    Raises CorpusError with the offending line number on any malformed
    line, unknown tag, or out-of-range span.
    """
    sentences: list[TaggedSentence] = []
    sent_id: str | None = None
    rels: list[tuple[int, str]] = []  # (lineno, payload) resolved at block end
    tokens: list[TaggedToken] = []
    block_start = None

    def flush(lineno: int):
        nonlocal sent_id, rels, tokens, block_start
        if not tokens and sent_id is None and not rels:
            return
        if not tokens:
            raise CorpusError("sentence block with no tokens", lineno)
        the_id = sent_id if sent_id is not None else f"s{len(sentences)}"
        gold = []
        for rel_line, payload in rels:
            parts = payload.split()
            if len(parts) != 3:
                raise CorpusError("#rel needs label and two spans", rel_line)
            try:
                label = AttributeLabel[parts[0]]
            except KeyError:
                raise CorpusError(f"unknown label {parts[0]!r}", rel_line) from None
            e1 = _parse_span(parts[1], rel_line)
            e2 = _parse_span(parts[2], rel_line)
            try:
                gold.append(GoldAnnotation(label, e1, e2))
            except CorpusError as exc:
                raise CorpusError(str(exc), rel_line) from None
        try:
            sentences.append(TaggedSentence(the_id, tuple(tokens), tuple(gold)))
        except CorpusError as exc:
            raise CorpusError(str(exc), block_start or lineno) from None
        sent_id, rels, tokens, block_start = None, [], [], None

    lineno = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            flush(lineno)
            continue
        if block_start is None:
            block_start = lineno
        if line.startswith("#"):
            if tokens:
                raise CorpusError("header line after token lines", lineno)
            if line.startswith("#id "):
                sent_id = line[4:].strip()
            elif line.startswith("#rel "):
                rels.append((lineno, line[5:].strip()))
            else:
                raise CorpusError(f"unknown header {line.split()[0]!r}", lineno)
            continue
        cols = line.split("\t")
        if len(cols) != 3:
            raise CorpusError(f"expected 3 columns, got {len(cols)}", lineno)
        try:
            tokens.append(TaggedToken(cols[0], cols[1], cols[2]))
        except CorpusError as exc:
            raise CorpusError(str(exc), lineno) from None
    flush(lineno + 1)
    return sentences


def render_corpus(sentences: list[TaggedSentence]) -> str:
    """Inverse of parse_corpus; parse_corpus(render_corpus(s)) == s."""
    out = []
    for sent in sentences:
        out.append(f"#id {sent.id}")
        for ann in sent.gold:
            out.append(
                f"#rel {ann.label.name} "
                f"{ann.e1[0]}-{ann.e1[1]} {ann.e2[0]}-{ann.e2[1]}"
            )
        for tok in sent.tokens:
            out.append(f"{tok.surface}\t{tok.pos}\t{tok.ne}")
        out.append("")
    return "\n".join(out) + ("\n" if out else "")


# --- filtering, candidate enumeration, splitting -------------------------


def filter_sentences(
    sentences: list[TaggedSentence],
) -> tuple[list[TaggedSentence], list[TaggedSentence]]:
    """Split off sentences that cannot hold a person-attribute pair.

    Kept sentences have at least one PER token plus at least one more
    non-O entity token; everything else is rejected.  Order preserved.
    """
    kept, rejected = [], []
    for sent in sentences:
        per = sum(1 for t in sent.tokens if t.ne == "PER")
        entities = sum(1 for t in sent.tokens if t.ne != "O")
        (kept if per >= 1 and entities >= 2 else rejected).append(sent)
    return kept, rejected


def entity_spans(sentence: TaggedSentence) -> list[tuple[Span, str]]:
    """Maximal runs of identical non-O NE tags, left to right."""
    spans = []
    i, n = 0, len(sentence.tokens)
    while i < n:
        tag = sentence.tokens[i].ne
        if tag == "O":
            i += 1
            continue
        j = i + 1
        while j < n and sentence.tokens[j].ne == tag:
            j += 1
        spans.append(((i, j), tag))
        i = j
    return spans


def candidate_pairs(sentence: TaggedSentence) -> list[CandidateInstance]:
    """Enumerate every (PER span, other entity span) pair, left to right.

    A PER span may serve as e2 of a different PER e1 but never pairs with
    itself.
    """
    spans = entity_spans(sentence)
    out = []
    for e1, tag1 in spans:
        if tag1 != "PER":
            continue
        for e2, _tag2 in spans:
            if e2 == e1:
                continue
            out.append(CandidateInstance(sentence, e1, e2))
    return out


def gold_label(sentence: TaggedSentence, e1: Span, e2: Span) -> AttributeLabel:
    """Label of the gold annotation matching both spans, else Other."""
    for ann in sentence.gold:
        if ann.e1 == e1 and ann.e2 == e2:
            return ann.label
    return AttributeLabel.Other


def split_corpus(
    sentences: list[TaggedSentence], train_fraction: float, seed: int
) -> tuple[list[TaggedSentence], list[TaggedSentence]]:
    """Deterministic seeded shuffle, then partition.

    |train| = round(train_fraction * n), half away from zero.
    """
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must be in (0, 1)")
    if len(sentences) < 2:
        raise ValueError("need at least 2 sentences to split")
    shuffled = list(sentences)
    random.Random(seed).shuffle(shuffled)
    cut = int(train_fraction * len(shuffled) + 0.5)
    return shuffled[:cut], shuffled[cut:]
