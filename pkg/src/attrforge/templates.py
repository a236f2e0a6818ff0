"""Entity-relation template rules: DSL parser, matcher, and generalizer.

Rule file grammar, one rule per line (``#`` starts a comment):

    RULE <id> <priority> <label> : <atoms...>

Atom forms:

    "surface"        literal token surface (NFC-compared), \\" and \\\\ escapes
    pos:t            POS tag
    case:PULL        case-marker major class
    case:PULL.TIME   major class with sub-class
    E1 / E1:PER      entity-1 slot, optional NE constraint (same for E2)
    *{0,3}           gap of 0..3 arbitrary tokens (max bound 10)

A pattern matches a contiguous token window; the E1/E2 atoms must align
exactly with the candidate's spans.  Gaps match shortest-first, so matching
is deterministic: the leftmost window with the shortest gaps wins.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .corpus import (
    MAJOR_CLASSES,
    POS_TAGS,
    SUBS_BY_MAJOR,
    AttributeLabel,
    CandidateInstance,
    CaseMarkerLexicon,
    GoldAnnotation,
    TaggedSentence,
    classify_case_marker,
    default_lexicon,
    nfc,
)

GAP_MAX = 10


class RuleError(ValueError):
    """Rule file syntax or consistency error, located by line and column."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        where = ""
        if line is not None:
            where = f"line {line}"
            if col is not None:
                where += f", col {col}"
            where += ": "
        super().__init__(where + message)
        self.line = line
        self.col = col


@dataclass(frozen=True, slots=True)
class Literal:
    text: str


@dataclass(frozen=True, slots=True)
class Pos:
    tag: str


@dataclass(frozen=True, slots=True)
class Case:
    major: str
    sub: str | None = None


@dataclass(frozen=True, slots=True)
class EntitySlot:
    which: int  # 1 or 2
    ne: str | None = None


@dataclass(frozen=True, slots=True)
class Gap:
    min: int
    max: int


PatternAtom = Literal | Pos | Case | EntitySlot | Gap


@dataclass(frozen=True, slots=True)
class TemplateRule:
    id: str
    priority: int
    label: AttributeLabel
    pattern: tuple[PatternAtom, ...]

    def __post_init__(self):
        if self.label is AttributeLabel.Other:
            raise RuleError(f"rule {self.id!r}: label Other is not allowed")
        slots = [a.which for a in self.pattern if isinstance(a, EntitySlot)]
        if sorted(slots) != [1, 2]:
            raise RuleError(
                f"rule {self.id!r}: pattern needs exactly one E1 and one E2"
            )


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[TemplateRule, ...]
    lexicon: CaseMarkerLexicon = field(default_factory=default_lexicon)

    def __post_init__(self):
        ids = [r.id for r in self.rules]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise RuleError(f"duplicate rule ids: {', '.join(dupes)}")
        ordered = tuple(sorted(self.rules, key=lambda r: (r.priority, r.id)))
        object.__setattr__(self, "rules", ordered)


@dataclass(frozen=True, slots=True)
class Match:
    start: int
    end: int


def _parse_atom(text: str, line: int, col: int) -> PatternAtom:
    if text.startswith('"'):
        if not text.endswith('"') or len(text) < 2:
            raise RuleError("unterminated literal", line, col)
        body = text[1:-1]
        out, i = [], 0
        while i < len(body):
            ch = body[i]
            if ch == "\\":
                if i + 1 >= len(body) or body[i + 1] not in '"\\':
                    raise RuleError("bad escape in literal", line, col)
                out.append(body[i + 1])
                i += 2
            elif ch == '"':
                raise RuleError("unescaped quote in literal", line, col)
            else:
                out.append(ch)
                i += 1
        if not out:
            raise RuleError("empty literal", line, col)
        return Literal(nfc("".join(out)))
    if text.startswith("pos:"):
        tag = text[4:]
        if tag not in POS_TAGS:
            raise RuleError(f"unknown pos tag {tag!r}", line, col)
        return Pos(tag)
    if text.startswith("case:"):
        body = text[5:]
        major_txt, _, sub_txt = body.partition(".")
        majors = {m.upper(): m for m in MAJOR_CLASSES}
        if major_txt.upper() not in majors:
            raise RuleError(f"unknown case class {major_txt!r}", line, col)
        major = majors[major_txt.upper()]
        sub = None
        if sub_txt:
            subs = {s.upper(): s for s in SUBS_BY_MAJOR.get(major, ())}
            if sub_txt.upper() not in subs:
                raise RuleError(
                    f"sub-class {sub_txt!r} not valid for {major}", line, col
                )
            sub = subs[sub_txt.upper()]
        return Case(major, sub)
    if text in ("E1", "E2") or text.startswith(("E1:", "E2:")):
        which = int(text[1])
        ne = None
        if len(text) > 2:
            ne = text[3:]
            if ne not in ("PER", "LOC", "TIME"):
                raise RuleError(f"unknown NE constraint {ne!r}", line, col)
        return EntitySlot(which, ne)
    if text.startswith("*{") and text.endswith("}"):
        body = text[2:-1]
        parts = body.split(",")
        if len(parts) != 2:
            raise RuleError(f"bad gap {text!r}", line, col)
        try:
            lo, hi = int(parts[0]), int(parts[1])
        except ValueError:
            raise RuleError(f"bad gap {text!r}", line, col) from None
        if lo < 0 or lo > hi or hi > GAP_MAX:
            raise RuleError(
                f"gap bounds must satisfy 0 <= min <= max <= {GAP_MAX}", line, col
            )
        return Gap(lo, hi)
    raise RuleError(f"unrecognized atom {text!r}", line, col)


def _split_with_cols(line: str) -> list[tuple[str, int]]:
    """Whitespace-split preserving 1-based column offsets."""
    out, i = [], 0
    while i < len(line):
        if line[i].isspace():
            i += 1
            continue
        j = i
        while j < len(line) and not line[j].isspace():
            j += 1
        out.append((line[i:j], i + 1))
        i = j
    return out


def parse_rules(text: str, lexicon: CaseMarkerLexicon | None = None) -> RuleSet:
    """Parse rule DSL text into a priority-sorted RuleSet."""
    rules: list[TemplateRule] = []
    seen_ids: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0] if raw.lstrip().startswith("#") else raw
        if not line.strip():
            continue
        parts = _split_with_cols(line)
        if parts[0][0] != "RULE":
            raise RuleError("expected RULE", lineno, parts[0][1])
        if len(parts) < 5:
            raise RuleError("truncated rule", lineno, parts[-1][1])
        rule_id = parts[1][0]
        if rule_id in seen_ids:
            raise RuleError(f"duplicate rule id {rule_id!r}", lineno, parts[1][1])
        try:
            priority = int(parts[2][0])
        except ValueError:
            raise RuleError(
                f"bad priority {parts[2][0]!r}", lineno, parts[2][1]
            ) from None
        try:
            label = AttributeLabel[parts[3][0]]
        except KeyError:
            raise RuleError(
                f"unknown label {parts[3][0]!r}", lineno, parts[3][1]
            ) from None
        if parts[4][0] != ":":
            raise RuleError("expected ':'", lineno, parts[4][1])
        atoms = tuple(
            _parse_atom(tok, lineno, col) for tok, col in parts[5:]
        )
        if not atoms:
            raise RuleError("rule has no atoms", lineno, parts[4][1])
        try:
            rules.append(TemplateRule(rule_id, priority, label, atoms))
        except RuleError as exc:
            raise RuleError(str(exc), lineno, parts[0][1]) from None
        seen_ids.add(rule_id)
    if lexicon is None:
        lexicon = default_lexicon()
    return RuleSet(tuple(rules), lexicon)


def default_rules(lexicon: CaseMarkerLexicon | None = None) -> RuleSet:
    from importlib import resources

    data = resources.files("attrforge.data").joinpath("templates.rules")
    return parse_rules(data.read_text(encoding="utf-8"), lexicon)


def rule_literal_surfaces(rules: RuleSet) -> frozenset[str]:
    """Literal surfaces used by the rules; feedable as keyword seeds."""
    out = set()
    for rule in rules.rules:
        for atom in rule.pattern:
            if isinstance(atom, Literal):
                out.add(atom.text)
    return frozenset(out)


# --- matching -------------------------------------------------------------


def _atom_matches_token(atom, token, lexicon) -> bool:
    if isinstance(atom, Literal):
        return token.surface == atom.text
    if isinstance(atom, Pos):
        return token.pos == atom.tag
    cls = classify_case_marker(token.surface, lexicon)
    if cls is None or cls.major != atom.major:
        return False
    # a lexicon entry without sub is ambiguous and satisfies any sub
    return atom.sub is None or cls.sub is None or cls.sub == atom.sub


def _match_from(
    pattern: tuple[PatternAtom, ...],
    k: int,
    pos: int,
    cand: CandidateInstance,
    lexicon: CaseMarkerLexicon,
) -> int | None:
    tokens = cand.sentence.tokens
    if k == len(pattern):
        return pos
    atom = pattern[k]
    if isinstance(atom, Gap):
        for g in range(atom.min, atom.max + 1):  # shortest-match-first
            if pos + g > len(tokens):
                break
            end = _match_from(pattern, k + 1, pos + g, cand, lexicon)
            if end is not None:
                return end
        return None
    if isinstance(atom, EntitySlot):
        span = cand.e1 if atom.which == 1 else cand.e2
        if pos != span[0]:
            return None
        if atom.ne is not None and tokens[span[0]].ne != atom.ne:
            return None
        return _match_from(pattern, k + 1, span[1], cand, lexicon)
    if pos >= len(tokens):
        return None
    if not _atom_matches_token(atom, tokens[pos], lexicon):
        return None
    return _match_from(pattern, k + 1, pos + 1, cand, lexicon)


def match_rule(
    rule: TemplateRule,
    cand: CandidateInstance,
    lexicon: CaseMarkerLexicon | None = None,
) -> Match | None:
    """Match a rule against a candidate; leftmost window, shortest gaps."""
    if lexicon is None:
        lexicon = default_lexicon()
    # the E1 slot pins the window: only starts <= e1 start can succeed
    for start in range(min(cand.e1[0], cand.e2[0]) + 1):
        end = _match_from(rule.pattern, 0, start, cand, lexicon)
        if end is not None:
            return Match(start, end)
    return None


def extract_by_templates(
    rules: RuleSet, cands: list[CandidateInstance]
) -> list[tuple[CandidateInstance, AttributeLabel]]:
    """First matching rule in (priority, id) order decides each label.

    Candidates without a match get no prediction.
    """
    out = []
    for cand in cands:
        for rule in rules.rules:
            if match_rule(rule, cand, rules.lexicon) is not None:
                out.append((cand, rule.label))
                break
    return out


# --- generalization -------------------------------------------------------


class GeneralizeError(ValueError):
    pass


def generalize_example(
    sentence: TaggedSentence,
    gold: GoldAnnotation,
    lexicon: CaseMarkerLexicon,
    rule_id: str | None = None,
    priority: int = 100,
) -> TemplateRule:
    """Lift one annotated sentence into a template rule.

    The rule spans e1 through the token at index max(e1.end, e2.end)+1
    (clipped).  Entity spans become typed slots, case markers become Case
    atoms, and every other token becomes its Pos atom.  Runs of two or more
    Pos atoms that are neither verbs nor adjacent to a slot collapse into a
    gap; runs longer than the gap bound are chunked so the rule still
    matches its own source.
    """
    if gold.label is AttributeLabel.Other:
        raise GeneralizeError("cannot build a rule for label Other")
    if gold.e1[0] > gold.e2[0]:
        raise GeneralizeError(
            "e1 after e2 in token order: rule direction unsupported"
        )
    tokens = sentence.tokens
    window_end = min(len(tokens), max(gold.e1[1], gold.e2[1]) + 2)

    atoms: list[PatternAtom] = []
    i = gold.e1[0]
    while i < window_end:
        if i == gold.e1[0]:
            atoms.append(EntitySlot(1, tokens[i].ne))
            i = gold.e1[1]
            continue
        if i == gold.e2[0]:
            atoms.append(EntitySlot(2, tokens[i].ne))
            i = gold.e2[1]
            continue
        cls = classify_case_marker(tokens[i].surface, lexicon)
        if cls is not None:
            atoms.append(Case(cls.major, cls.sub))
        else:
            atoms.append(Pos(tokens[i].pos))
        i += 1

    def collapsible(idx: int) -> bool:
        atom = atoms[idx]
        if not isinstance(atom, Pos) or atom.tag == "v":
            return False
        before = atoms[idx - 1] if idx > 0 else None
        after = atoms[idx + 1] if idx + 1 < len(atoms) else None
        return not isinstance(before, EntitySlot) and not isinstance(
            after, EntitySlot
        )

    out: list[PatternAtom] = []
    i = 0
    while i < len(atoms):
        if collapsible(i):
            j = i
            while j < len(atoms) and collapsible(j):
                j += 1
            run = j - i
            if run >= 2:
                while run > 0:
                    chunk = min(run, GAP_MAX)
                    out.append(Gap(0, chunk))
                    run -= chunk
                i = j
                continue
        out.append(atoms[i])
        i += 1

    if rule_id is None:
        rule_id = (
            f"gen-{sentence.id}-{gold.e1[0]}-{gold.e1[1]}-"
            f"{gold.e2[0]}-{gold.e2[1]}"
        )
    return TemplateRule(rule_id, priority, gold.label, tuple(out))
