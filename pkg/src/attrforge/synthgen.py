"""Seeded synthetic-corpus generator.

Emits parse_corpus-compatible text from per-label sentence skeletons that
line up with the bundled template rules, so pipeline mechanics can be
exercised at desk scale without the real corpus.  The vocabulary is
opaque (ascii ids by default, Tibetan-range surfaces on request); case
markers are always the real lexicon surfaces so case atoms match.

Noise perturbs a chosen fraction of sentences with one of three kinds:
rotating the tokens after the first entity, swapping the relation keyword
for a filler, or wiping one entity's NE tag.  Everything is driven by one
seeded RNG, so equal params give byte-identical corpora.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .corpus import (
    POSITIVE_LABELS,
    AttributeLabel,
    GoldAnnotation,
    Span,
    TaggedSentence,
    TaggedToken,
    render_corpus,
)

OTHER_DEFAULT_MASS = 425 / 2400

FILLER_POS = ("a", "d", "m", "c", "x", "p")

# relation keyword surfaces per alphabet; markers are lexicon surfaces
_KEYS = {
    "ascii": {
        "born": "vborn",
        "cop": "vis",
        "father": "nfather",
        "mother": "nmother",
        "other_v1": "vmet",
        "other_v2": "vsaw",
    },
    "tibetan": {
        "born": "སྐྱེས་",
        "cop": "ཡིན་",
        "father": "ཕ་",
        "mother": "མ་",
        "other_v1": "མཇལ་",
        "other_v2": "བལྟས་",
    },
}
_MARK_PULL = "ལ་"
_MARK_FROM = "ནས་"
_MARK_POSS = "གི་"

_TIB_SYL = [chr(cp) for cp in range(0x0F40, 0x0F40 + 27)]


def default_label_mix() -> dict[AttributeLabel, float]:
    positive = (1.0 - OTHER_DEFAULT_MASS) / len(POSITIVE_LABELS)
    mix = {lab: positive for lab in POSITIVE_LABELS}
    mix[AttributeLabel.Other] = OTHER_DEFAULT_MASS
    return mix


@dataclass(frozen=True)
class GenParams:
    seed: int = 42
    n_sentences: int = 2400
    label_mix: dict[AttributeLabel, float] = field(
        default_factory=default_label_mix
    )
    noise: float = 0.0
    vocab_size: int = 400
    alphabet: str = "ascii"

    def __post_init__(self):
        if abs(sum(self.label_mix.values()) - 1.0) > 1e-9:
            raise ValueError("label_mix must sum to 1")
        if not 0.0 <= self.noise <= 1.0:
            raise ValueError("noise must be in [0, 1]")
        if self.alphabet not in ("ascii", "tibetan"):
            raise ValueError("alphabet must be ascii or tibetan")
        if self.n_sentences < 1 or self.vocab_size < 16:
            raise ValueError("need n_sentences >= 1 and vocab_size >= 16")


def apportion(mix: dict[AttributeLabel, float], n: int) -> dict[AttributeLabel, int]:
    """Largest-remainder apportionment in canonical label order."""
    order = [lab for lab in AttributeLabel if lab in mix]
    shares = [(lab, mix[lab] * n) for lab in order]
    counts = {lab: int(share) for lab, share in shares}
    leftover = n - sum(counts.values())
    by_remainder = sorted(
        shares, key=lambda kv: (-(kv[1] - int(kv[1])), order.index(kv[0]))
    )
    for lab, _ in by_remainder[:leftover]:
        counts[lab] += 1
    return counts


def _make_surface(alphabet: str, pool: str, i: int) -> str:
    if alphabet == "ascii":
        return f"{pool}{i:04d}"
    # two-syllable Tibetan-range surfaces, disjoint per pool by offset
    offset = {"per": 0, "loc": 200, "tim": 400, "fil": 600}[pool] + i
    a = _TIB_SYL[offset % 27]
    b = _TIB_SYL[(offset // 27 + offset) % 27]
    return a + b + "་"


@dataclass
class _Draft:
    tokens: list[tuple[str, str, str]]
    gold: list[tuple[AttributeLabel, Span, Span]]
    e1: Span
    e2: Span
    kw_idx: int
    core_end: int  # one past the last pattern token


class _Vocab:
    def __init__(self, params: GenParams):
        size = params.vocab_size
        n_per = max(4, int(size * 0.4))
        n_loc = max(4, int(size * 0.2))
        n_tim = max(4, int(size * 0.2))
        n_fil = max(4, size - n_per - n_loc - n_tim)
        a = params.alphabet
        self.persons = [_make_surface(a, "per", i) for i in range(n_per)]
        self.locs = [_make_surface(a, "loc", i) for i in range(n_loc)]
        self.times = [_make_surface(a, "tim", i) for i in range(n_tim)]
        self.fillers = [
            (_make_surface(a, "fil", i), FILLER_POS[i % len(FILLER_POS)])
            for i in range(n_fil)
        ]
        self.keys = _KEYS[a]


def _build(label: AttributeLabel, rng: random.Random, v: _Vocab) -> _Draft:
    def filler(ne="O"):
        surf, pos = rng.choice(v.fillers)
        return (surf, pos, ne)

    lead = [filler() for _ in range(rng.randint(0, 2))]
    trail = [filler() for _ in range(rng.randint(0, 1))]
    tokens = list(lead)
    i1 = len(tokens)
    tokens.append((rng.choice(v.persons), "n", "PER"))
    e1 = (i1, i1 + 1)

    if label is AttributeLabel.BirthDate or label is AttributeLabel.BirthPlace:
        tokens.extend(filler() for _ in range(rng.randint(0, 2)))
        i2 = len(tokens)
        if label is AttributeLabel.BirthDate:
            tokens.append((rng.choice(v.times), "t", "TIME"))
            tokens.append((_MARK_PULL, "k", "O"))
        else:
            tokens.append((rng.choice(v.locs), "n", "LOC"))
            tokens.append((_MARK_FROM, "k", "O"))
        kw_idx = len(tokens)
        tokens.append((v.keys["born"], "v", "O"))
    elif label is AttributeLabel.Father or label is AttributeLabel.Mother:
        tokens.append((_MARK_POSS, "k", "O"))
        i2 = len(tokens)
        tokens.append((rng.choice(v.persons), "n", "PER"))
        kw_idx = len(tokens)
        key = "father" if label is AttributeLabel.Father else "mother"
        tokens.append((v.keys[key], "n", "O"))
        tokens.append((v.keys["cop"], "v", "O"))
    else:  # Other: entity pair with a non-relation verb, never TIME
        if rng.random() < 0.5:
            tokens.extend(filler() for _ in range(rng.randint(1, 2)))
            i2 = len(tokens)
            tokens.append((rng.choice(v.persons), "n", "PER"))
            kw_idx = len(tokens)
            tokens.append((v.keys["other_v1"], "v", "O"))
        else:
            tokens.extend(filler() for _ in range(rng.randint(0, 2)))
            i2 = len(tokens)
            tokens.append((rng.choice(v.locs), "n", "LOC"))
            kw_idx = len(tokens)
            tokens.append((v.keys["other_v2"], "v", "O"))

    e2 = (i2, i2 + 1)
    core_end = len(tokens)
    tokens.extend(trail)
    gold = []
    if label is not AttributeLabel.Other:
        gold.append((label, e1, e2))
    return _Draft(tokens, gold, e1, e2, kw_idx, core_end)


def _perturb(draft: _Draft, rng: random.Random, v: _Vocab) -> None:
    kind = rng.randrange(3)
    if kind == 0:
        # rotate the post-e1 pattern tokens (entity positions untouched)
        mutable = [
            i
            for i in range(draft.e1[1], draft.core_end)
            if not draft.e2[0] <= i < draft.e2[1]
        ]
        if len(mutable) >= 2:
            vals = [draft.tokens[i] for i in mutable]
            vals = [vals[-1]] + vals[:-1]
            for i, val in zip(mutable, vals):
                draft.tokens[i] = val
            return
        kind = 1
    if kind == 1:
        surf, pos = rng.choice(v.fillers)
        draft.tokens[draft.kw_idx] = (surf, pos, "O")
        return
    entity_idx = [i for i, t in enumerate(draft.tokens) if t[2] != "O"]
    i = rng.choice(entity_idx)
    surf, pos, _ = draft.tokens[i]
    draft.tokens[i] = (surf, pos, "O")


def generate(params: GenParams) -> str:
    """Generate corpus text; byte-identical for identical params."""
    rng = random.Random(params.seed)
    vocab = _Vocab(params)
    counts = apportion(params.label_mix, params.n_sentences)
    labels: list[AttributeLabel] = []
    for lab in AttributeLabel:
        labels.extend([lab] * counts.get(lab, 0))
    rng.shuffle(labels)

    drafts = [_build(lab, rng, vocab) for lab in labels]

    n_noisy = int(params.noise * len(drafts) + 0.5)
    for idx in sorted(rng.sample(range(len(drafts)), n_noisy)):
        _perturb(drafts[idx], rng, vocab)

    sentences = []
    for i, draft in enumerate(drafts):
        gold = tuple(
            GoldAnnotation(lab, e1, e2) for lab, e1, e2 in draft.gold
        )
        tokens = tuple(TaggedToken(s, p, ne) for s, p, ne in draft.tokens)
        sentences.append(TaggedSentence(f"s{i:05d}", tokens, gold))
    return render_corpus(sentences)
