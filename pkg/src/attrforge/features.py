"""Feature extraction: keywords, POS-tag n-grams, and entity context windows.

Three binary feature families per candidate pair:

  kw:<surface>                     keyword present between or around entities
  tag2:<p1>_<p2> / tag3:...        POS n-grams of the strictly-between span
  ctx:<slot>:<off>:<kind>=<value>  token context at offsets -2, -1, +1

Keywords are nouns/verbs picked by chi-square association against the
positive labels.  Feature keys live in a FeatureMap that grows during
training and is frozen for inference; unknown keys vanish silently once
frozen.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .corpus import (
    POSITIVE_LABELS,
    AttributeLabel,
    CandidateInstance,
)

KEYWORD_POS = ("n", "v")
CONTEXT_OFFSETS = (-2, -1, 1)
CONTEXT_KINDS = ("surface", "pos", "ne")


@dataclass(frozen=True, slots=True)
class KeywordParams:
    min_frequency: int = 3
    top_k_per_label: int = 200


@dataclass(frozen=True)
class KeywordTable:
    """(surface, pos) -> association score, for pos in {n, v}."""

    entries: dict[tuple[str, str], float]
    parameters: KeywordParams

    def __contains__(self, key: tuple[str, str]) -> bool:
        return key in self.entries


@dataclass
class FeatureMap:
    """Bijection between feature keys and column ids."""

    key_to_col: dict[str, int] = field(default_factory=dict)
    frozen: bool = False

    def __len__(self) -> int:
        return len(self.key_to_col)

    def freeze(self) -> None:
        self.frozen = True

    def lookup(self, key: str) -> int | None:
        col = self.key_to_col.get(key)
        if col is None and not self.frozen:
            col = len(self.key_to_col)
            self.key_to_col[key] = col
        return col

    def columns_to_keys(self) -> list[str]:
        out = [""] * len(self.key_to_col)
        for key, col in self.key_to_col.items():
            out[col] = key
        return out


@dataclass(frozen=True, slots=True)
class SparseVector:
    """Strictly increasing columns; values default to all-ones (binary)."""

    columns: tuple[int, ...]
    values: tuple[float, ...] | None = None

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.columns, self.columns[1:])):
            raise ValueError("columns must be strictly increasing")
        if self.values is not None and len(self.values) != len(self.columns):
            raise ValueError("values length mismatch")

    def items(self):
        if self.values is None:
            return [(c, 1.0) for c in self.columns]
        return list(zip(self.columns, self.values))


def _region_indices(cand: CandidateInstance) -> list[int]:
    """Between-entities indices plus the +-2 window around each span."""
    n = len(cand.sentence.tokens)
    first, second = sorted((cand.e1, cand.e2))
    idx = set(range(first[1], second[0]))
    for span in (cand.e1, cand.e2):
        idx.update(range(max(0, span[0] - 2), span[0]))
        idx.update(range(span[1], min(n, span[1] + 2)))
    for span in (cand.e1, cand.e2):
        idx.difference_update(range(span[0], span[1]))
    return sorted(idx)


def _between_indices(cand: CandidateInstance) -> range:
    first, second = sorted((cand.e1, cand.e2))
    return range(first[1], second[0])


def _chi_square(a: int, b: int, c: int, d: int) -> float:
    # 2x2 contingency: a=word&label, b=word&other, c=label&no-word, d=rest
    n = a + b + c + d
    denom = (a + b) * (c + d) * (a + c) * (b + d)
    if denom == 0:
        return 0.0
    diff = a * d - b * c
    return n * diff * diff / denom


def select_keywords(
    train: list[tuple[CandidateInstance, AttributeLabel]],
    params: KeywordParams | None = None,
    seed_surfaces: frozenset[str] = frozenset(),
) -> KeywordTable:
    """Pick high-association nouns/verbs from training candidate regions.

    Words must occur at least min_frequency times in candidate regions;
    the top_k_per_label best chi-square scorers per positive label are
    kept, scored by their max over labels.  seed_surfaces (e.g. template
    literals) bypass the frequency and top-k cuts.
    """
    if not train:
        raise ValueError("empty training set")
    params = params or KeywordParams()
    freq: dict[tuple[str, str], int] = {}
    containing: dict[tuple[str, str], set[int]] = {}
    label_of: list[AttributeLabel] = []
    for inst_idx, (cand, label) in enumerate(train):
        label_of.append(label)
        tokens = cand.sentence.tokens
        for i in _region_indices(cand):
            tok = tokens[i]
            if tok.pos not in KEYWORD_POS:
                continue
            key = (tok.surface, tok.pos)
            freq[key] = freq.get(key, 0) + 1
            containing.setdefault(key, set()).add(inst_idx)

    n = len(train)
    label_total = {lab: 0 for lab in POSITIVE_LABELS}
    for lab in label_of:
        if lab in label_total:
            label_total[lab] += 1

    scores: dict[tuple[str, str], dict[AttributeLabel, float]] = {}
    for key, insts in containing.items():
        if freq[key] < params.min_frequency and key[0] not in seed_surfaces:
            continue
        with_word = len(insts)
        per_label = {}
        for lab in POSITIVE_LABELS:
            a = sum(1 for i in insts if label_of[i] is lab)
            b = with_word - a
            c = label_total[lab] - a
            d = n - with_word - c
            per_label[lab] = _chi_square(a, b, c, d)
        scores[key] = per_label

    selected: set[tuple[str, str]] = set()
    for lab in POSITIVE_LABELS:
        ranked = sorted(
            scores, key=lambda k: (-scores[k][lab], k[0], k[1])
        )
        selected.update(ranked[: params.top_k_per_label])
    for key in scores:
        if key[0] in seed_surfaces:
            selected.add(key)

    entries = {
        key: max(scores[key].values()) for key in sorted(selected)
    }
    return KeywordTable(entries, params)


def vectorize(
    cand: CandidateInstance,
    fmap: FeatureMap,
    keywords: KeywordTable,
) -> SparseVector:
    """Map one candidate to its binary sparse feature vector.

    With an unfrozen map, unseen keys are added; with a frozen map they
    are silently dropped.
    """
    tokens = cand.sentence.tokens
    keys: set[str] = set()

    for i in _region_indices(cand):
        tok = tokens[i]
        if (tok.surface, tok.pos) in keywords:
            keys.add(f"kw:{tok.surface}")

    between = [tokens[i].pos for i in _between_indices(cand)]
    for i in range(len(between) - 1):
        keys.add(f"tag2:{between[i]}_{between[i + 1]}")
    for i in range(len(between) - 2):
        keys.add(f"tag3:{between[i]}_{between[i + 1]}_{between[i + 2]}")

    n = len(tokens)
    for slot, span in (("e1", cand.e1), ("e2", cand.e2)):
        for off in CONTEXT_OFFSETS:
            idx = span[0] + off if off < 0 else span[1] + off - 1
            for kind in CONTEXT_KINDS:
                if idx < 0:
                    value = "BOS"
                elif idx >= n:
                    value = "EOS"
                else:
                    tok = tokens[idx]
                    value = {"surface": tok.surface, "pos": tok.pos, "ne": tok.ne}[
                        kind
                    ]
                keys.add(f"ctx:{slot}:{off}:{kind}={value}")

    cols = sorted(
        col for col in (fmap.lookup(key) for key in sorted(keys)) if col is not None
    )
    return SparseVector(tuple(cols))
