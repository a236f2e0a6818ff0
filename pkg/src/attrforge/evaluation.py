"""Scoring against gold annotations and per-category P/R/F1 report tables.

A prediction is correct iff a gold annotation with the same label and the
exact same spans exists in the same sentence; each gold annotation credits
at most one prediction.  Percentages print with two decimals, rounded half
up.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

from .corpus import (
    POSITIVE_LABELS,
    AttributeLabel,
    Span,
    TaggedSentence,
)

# (sentence id, label, e1 span, e2 span)
Prediction = tuple[str, AttributeLabel, Span, Span]


class EvalError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class CategoryCounts:
    total: int
    identified: int
    correct: int

    def __post_init__(self):
        if self.correct > min(self.total, self.identified):
            raise EvalError("correct cannot exceed total or identified")


@dataclass(frozen=True, slots=True)
class CategoryScore:
    counts: CategoryCounts
    p: float  # percent
    r: float
    f1: float


@dataclass(frozen=True)
class EvalReport:
    per_category: dict[AttributeLabel, CategoryScore]


def score_counts(counts: CategoryCounts) -> CategoryScore:
    """P/R/F1 percentages from raw counts; zero denominators score 0."""
    p = 100.0 * counts.correct / counts.identified if counts.identified else 0.0
    r = 100.0 * counts.correct / counts.total if counts.total else 0.0
    f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return CategoryScore(counts, p, r, f1)


def score(
    predictions: list[Prediction], sentences: list[TaggedSentence]
) -> EvalReport:
    """Score predictions against the gold annotations of `sentences`."""
    by_id: dict[str, TaggedSentence] = {}
    for sent in sentences:
        by_id[sent.id] = sent

    total = {lab: 0 for lab in POSITIVE_LABELS}
    for sent in sentences:
        for ann in sent.gold:
            if ann.label in total:
                total[ann.label] += 1

    identified = {lab: 0 for lab in POSITIVE_LABELS}
    correct = {lab: 0 for lab in POSITIVE_LABELS}
    credited: set[tuple[str, int]] = set()
    for sent_id, label, e1, e2 in predictions:
        sent = by_id.get(sent_id)
        if sent is None:
            raise EvalError(f"unknown sentence id {sent_id!r}")
        if label not in identified:
            raise EvalError(f"prediction with non-positive label {label.name}")
        identified[label] += 1
        for idx, ann in enumerate(sent.gold):
            key = (sent_id, idx)
            if key in credited:
                continue
            if ann.label is label and ann.e1 == e1 and ann.e2 == e2:
                credited.add(key)
                correct[label] += 1
                break

    per_category = {
        lab: score_counts(
            CategoryCounts(total[lab], identified[lab], correct[lab])
        )
        for lab in POSITIVE_LABELS
    }
    return EvalReport(per_category)


def fmt_pct(value: float) -> str:
    return str(
        Decimal(repr(value)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    )


_COLUMNS = ("Category", "Total", "Identified", "Correct", "P", "R", "F1")


def render_report(report: EvalReport) -> str:
    """Fixed-width table in canonical category order."""
    rows = []
    for lab in POSITIVE_LABELS:
        if lab not in report.per_category:
            continue
        s = report.per_category[lab]
        rows.append(
            (
                lab.name,
                str(s.counts.total),
                str(s.counts.identified),
                str(s.counts.correct),
                fmt_pct(s.p),
                fmt_pct(s.r),
                fmt_pct(s.f1),
            )
        )
    widths = [
        max(len(_COLUMNS[i]), *(len(r[i]) for r in rows)) if rows else len(_COLUMNS[i])
        for i in range(len(_COLUMNS))
    ]
    lines = []
    header = "  ".join(c.ljust(widths[i]) for i, c in enumerate(_COLUMNS))
    lines.append(header.rstrip())
    lines.append("-" * len(header.rstrip()))
    for r in rows:
        lines.append(
            "  ".join(
                r[i].ljust(widths[i]) if i == 0 else r[i].rjust(widths[i])
                for i in range(len(r))
            ).rstrip()
        )
    return "\n".join(lines) + "\n"


def machine_lines(report: EvalReport) -> str:
    """label<TAB>total<TAB>identified<TAB>correct<TAB>p<TAB>r<TAB>f1 lines."""
    lines = []
    for lab in POSITIVE_LABELS:
        if lab not in report.per_category:
            continue
        s = report.per_category[lab]
        lines.append(
            "\t".join(
                (
                    lab.name,
                    str(s.counts.total),
                    str(s.counts.identified),
                    str(s.counts.correct),
                    fmt_pct(s.p),
                    fmt_pct(s.r),
                    fmt_pct(s.f1),
                )
            )
        )
    return "\n".join(lines) + ("\n" if lines else "")


# --- predictions file format ----------------------------------------------


def render_predictions(predictions: list[Prediction]) -> str:
    """sentence_id<TAB>label<TAB>e1s-e1e<TAB>e2s-e2e lines."""
    lines = []
    for sent_id, label, e1, e2 in predictions:
        lines.append(
            f"{sent_id}\t{label.name}\t{e1[0]}-{e1[1]}\t{e2[0]}-{e2[1]}"
        )
    return "\n".join(lines) + ("\n" if lines else "")


def parse_predictions(text: str) -> list[Prediction]:
    out: list[Prediction] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        cols = line.split("\t")
        if len(cols) != 4:
            raise EvalError(f"line {lineno}: expected 4 columns, got {len(cols)}")
        try:
            label = AttributeLabel[cols[1]]
        except KeyError:
            raise EvalError(f"line {lineno}: unknown label {cols[1]!r}") from None
        spans = []
        for col in cols[2:]:
            parts = col.split("-")
            try:
                spans.append((int(parts[0]), int(parts[1])))
            except (ValueError, IndexError):
                raise EvalError(f"line {lineno}: bad span {col!r}") from None
        out.append((cols[0], label, spans[0], spans[1]))
    return out
