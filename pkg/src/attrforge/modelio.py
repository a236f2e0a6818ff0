"""Versioned text serialization of a trained extractor.

Layout (UTF-8, LF):

    ATTRFORGE-MODEL v1
    featuremap <count>            one key per line, column = line order
    keywords <count> <min_frequency> <top_k_per_label>
    hierarchy <node;node;...> k=<k>
    fasttrack <count>             priority, e1 tag or *, e2 tag or *, target
    classifier <relevance | pair:A:B>
      params / bias / nsupport / converged / weights lines
    END

Floats are rendered with repr() so round trips are exact.  Alphas are a
training-time artifact and are not serialized; deserialized models cannot
feed check_kkt.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import AttributeLabel
from .features import FeatureMap, KeywordParams, KeywordTable
from .hierarchy import (
    FastTrackRule,
    HierarchyConfig,
    HierarchyModel,
    label_pairs,
)
from .svm import SvmModel, SvmParams

HEADER = "ATTRFORGE-MODEL v1"


class ModelFormatError(ValueError):
    pass


@dataclass(frozen=True)
class ModelBundle:
    fmap: FeatureMap
    keywords: KeywordTable
    model: HierarchyModel


def _fmt(x: float) -> str:
    return repr(float(x))


def _classifier_lines(out: list[str], name: str, m: SvmModel) -> None:
    out.append(f"classifier {name}")
    out.append(
        "params\t{}\t{}\t{}\t{}".format(
            _fmt(m.params.c), _fmt(m.params.tol), _fmt(m.params.eps),
            m.params.max_passes,
        )
    )
    out.append(f"bias\t{_fmt(m.bias)}")
    out.append(f"nsupport\t{m.n_support}")
    out.append(f"converged\t{1 if m.converged else 0}")
    cells = [
        f"{col}:{_fmt(val)}" for col, val in enumerate(m.weights) if val != 0.0
    ]
    out.append("weights\t" + " ".join(cells))


def serialize_bundle(bundle: ModelBundle) -> bytes:
    out: list[str] = [HEADER]

    keys = bundle.fmap.columns_to_keys()
    out.append(f"featuremap {len(keys)}")
    out.extend(keys)

    kw = bundle.keywords
    out.append(
        f"keywords {len(kw.entries)} {kw.parameters.min_frequency} "
        f"{kw.parameters.top_k_per_label}"
    )
    for (surface, pos), score in sorted(kw.entries.items()):
        out.append(f"{surface}\t{pos}\t{_fmt(score)}")

    config = bundle.model.config
    nodes = ";".join(",".join(sorted(node)) for node in config.layers)
    out.append(f"hierarchy {nodes} k={config.k}")
    out.append(f"fasttrack {len(config.fast_track)}")
    for rule in config.fast_track:
        out.append(
            "\t".join(
                (
                    str(rule.priority),
                    rule.e1_ne or "*",
                    rule.e2_ne or "*",
                    rule.target.name,
                )
            )
        )

    if bundle.model.relevance is not None:
        _classifier_lines(out, "relevance", bundle.model.relevance)
    for a, b in label_pairs():
        _classifier_lines(
            out, f"pair:{a.name}:{b.name}", bundle.model.pairwise[(a, b)]
        )
    out.append("END")
    return ("\n".join(out) + "\n").encode("utf-8")


class _Reader:
    def __init__(self, lines: list[str]):
        self.lines = lines
        self.pos = 0

    def next(self) -> str:
        if self.pos >= len(self.lines):
            raise ModelFormatError("truncated model file")
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def peek(self) -> str | None:
        return self.lines[self.pos] if self.pos < len(self.lines) else None


def _read_classifier(r: _Reader, n_features: int) -> SvmModel:
    params_line = r.next().split("\t")
    if params_line[0] != "params" or len(params_line) != 5:
        raise ModelFormatError("expected params line")
    params = SvmParams(
        c=float(params_line[1]),
        tol=float(params_line[2]),
        eps=float(params_line[3]),
        max_passes=int(params_line[4]),
    )
    bias_line = r.next().split("\t")
    if bias_line[0] != "bias":
        raise ModelFormatError("expected bias line")
    bias = float(bias_line[1])
    ns_line = r.next().split("\t")
    if ns_line[0] != "nsupport":
        raise ModelFormatError("expected nsupport line")
    n_support = int(ns_line[1])
    conv_line = r.next().split("\t")
    if conv_line[0] != "converged":
        raise ModelFormatError("expected converged line")
    converged = conv_line[1] == "1"
    w_line = r.next().split("\t")
    if w_line[0] != "weights":
        raise ModelFormatError("expected weights line")
    weights = [0.0] * n_features
    if len(w_line) > 1 and w_line[1]:
        for cell in w_line[1].split(" "):
            col_txt, _, val_txt = cell.partition(":")
            col = int(col_txt)
            if col >= n_features:
                raise ModelFormatError(f"weight column {col} out of range")
            weights[col] = float(val_txt)
    return SvmModel(
        weights=tuple(weights),
        bias=bias,
        params=params,
        n_support=n_support,
        alphas=None,
        converged=converged,
    )


def deserialize_bundle(data: bytes) -> ModelBundle:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ModelFormatError(f"not UTF-8: {exc}") from None
    lines = text.splitlines()
    if not lines:
        raise ModelFormatError("truncated model file")
    if lines[0] != HEADER:
        raise ModelFormatError(
            f"version mismatch: expected {HEADER!r}, got {lines[0]!r}"
        )
    if "END" not in lines:
        raise ModelFormatError("truncated model file (no END marker)")
    r = _Reader(lines)
    r.next()  # header

    fm_head = r.next().split(" ")
    if fm_head[0] != "featuremap" or len(fm_head) != 2:
        raise ModelFormatError("expected featuremap section")
    n_keys = int(fm_head[1])
    fmap = FeatureMap()
    for _ in range(n_keys):
        fmap.lookup(r.next())
    fmap.freeze()

    kw_head = r.next().split(" ")
    if kw_head[0] != "keywords" or len(kw_head) != 4:
        raise ModelFormatError("expected keywords section")
    entries: dict[tuple[str, str], float] = {}
    for _ in range(int(kw_head[1])):
        cols = r.next().split("\t")
        if len(cols) != 3:
            raise ModelFormatError("bad keyword line")
        entries[(cols[0], cols[1])] = float(cols[2])
    keywords = KeywordTable(
        entries, KeywordParams(int(kw_head[2]), int(kw_head[3]))
    )

    h_head = r.next().split(" ")
    if h_head[0] != "hierarchy" or len(h_head) != 3:
        raise ModelFormatError("expected hierarchy section")
    layers = tuple(
        frozenset(node.split(",")) for node in h_head[1].split(";")
    )
    k = int(h_head[2].removeprefix("k="))

    ft_head = r.next().split(" ")
    if ft_head[0] != "fasttrack" or len(ft_head) != 2:
        raise ModelFormatError("expected fasttrack section")
    fast_track = []
    for _ in range(int(ft_head[1])):
        cols = r.next().split("\t")
        if len(cols) != 4:
            raise ModelFormatError("bad fasttrack line")
        fast_track.append(
            FastTrackRule(
                priority=int(cols[0]),
                e1_ne=None if cols[1] == "*" else cols[1],
                e2_ne=None if cols[2] == "*" else cols[2],
                target=AttributeLabel[cols[3]],
            )
        )
    config = HierarchyConfig(layers, tuple(fast_track), k)

    relevance = None
    pairwise = {}
    while True:
        line = r.next()
        if line == "END":
            break
        if not line.startswith("classifier "):
            raise ModelFormatError(f"unexpected line {line!r}")
        name = line.removeprefix("classifier ")
        model = _read_classifier(r, n_keys)
        if name == "relevance":
            relevance = model
        elif name.startswith("pair:"):
            _, a, b = name.split(":")
            pairwise[(AttributeLabel[a], AttributeLabel[b])] = model
        else:
            raise ModelFormatError(f"unknown classifier {name!r}")

    return ModelBundle(fmap, keywords, HierarchyModel(config, relevance, pairwise))
