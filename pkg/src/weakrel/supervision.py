"""Labeling functions, annotation of mention candidates, conflict statistics.

A labeling function encodes one elementary piece of supervision and emits at
most one label (its own) per mention.  Two kinds are supported:

  pattern  fires when any trigger token occurs (case-insensitively) strictly
           between the two entity mentions, subject to optional gap and
           span-order constraints;
  kb       fires when the surface strings of the entity pair match a listed
           pair, regardless of context.  This context-blindness is the noise
           the downstream truth-discovery model is built to absorb.

The LF file is JSON lines:

  {"name": ..., "relation": ..., "type": "pattern",
   "between_any": [...], "max_gap": int?, "order": "e1_first"|"e2_first"?}
  {"name": ..., "relation": ..., "type": "kb", "pairs_file": path}

A pairs file is TSV `e1_text<TAB>e2_text`; relative paths resolve against
the LF file's directory.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from .errors import ConfigError, DataError

NONE_LABEL = "None"


@dataclass(frozen=True)
class LabelSpace:
    """Ordered relation-type names; the None label is fixed at index 0."""

    relations: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.relations)) != len(self.relations):
            raise ConfigError("duplicate relation names")
        if NONE_LABEL in self.relations:
            raise ConfigError(f"{NONE_LABEL!r} is implicit and cannot be a relation")
        if len(self.relations) < 1:
            raise ConfigError("need at least one relation type")

    @property
    def k(self) -> int:
        return len(self.relations)

    @property
    def size(self) -> int:
        return len(self.relations) + 1

    @property
    def names(self) -> tuple[str, ...]:
        return (NONE_LABEL,) + self.relations

    def index_of(self, name: str) -> int:
        if name == NONE_LABEL:
            return 0
        try:
            return self.relations.index(name) + 1
        except ValueError:
            raise ConfigError(f"unknown relation name {name!r}") from None

    def name_of(self, index: int) -> str:
        return self.names[index]


@dataclass(frozen=True)
class PatternRule:
    between_any: frozenset[str]
    max_gap: int | None = None
    required_order: str | None = None  # "e1_first" | "e2_first"

    def __post_init__(self):
        # trigger matching is case-insensitive; store triggers lowercased
        object.__setattr__(
            self, "between_any", frozenset(t.lower() for t in self.between_any)
        )


@dataclass(frozen=True)
class LabelingFunction:
    id: int
    name: str
    label: int
    kind: str  # "pattern" | "kb"
    pattern: PatternRule | None = None
    kb_pairs: frozenset[tuple[str, str]] = field(default_factory=frozenset)


def _norm_surface(text: str) -> str:
    return " ".join(text.split())


def _load_pairs_file(path) -> frozenset[tuple[str, str]]:
    pairs = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DataError("expected e1_text<TAB>e2_text", line=lineno)
            pairs.add((_norm_surface(parts[0]), _norm_surface(parts[1])))
    return frozenset(pairs)


def load_labeling_functions(path, label_space: LabelSpace) -> list[LabelingFunction]:
    """Parse the LF file; functions get dense ids in file order."""
    lfs = []
    base_dir = os.path.dirname(os.path.abspath(path))
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                record = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise DataError(f"invalid JSON: {exc.msg}", line=lineno) from exc
            try:
                name = record["name"]
                relation = record["relation"]
                kind = record["type"]
            except KeyError as exc:
                raise ConfigError(f"line {lineno}: missing LF field {exc}") from exc
            label = label_space.index_of(relation)
            if kind == "pattern":
                triggers = frozenset(t.lower() for t in record.get("between_any", []))
                if not triggers:
                    raise ConfigError(f"line {lineno}: LF {name!r} has no triggers")
                order = record.get("order")
                if order not in (None, "e1_first", "e2_first"):
                    raise ConfigError(f"line {lineno}: bad order {order!r}")
                rule = PatternRule(triggers, record.get("max_gap"), order)
                lfs.append(LabelingFunction(len(lfs), name, label, "pattern", rule))
            elif kind == "kb":
                pairs_path = record["pairs_file"]
                if not os.path.isabs(pairs_path):
                    pairs_path = os.path.join(base_dir, pairs_path)
                pairs = _load_pairs_file(pairs_path)
                lfs.append(
                    LabelingFunction(len(lfs), name, label, "kb", kb_pairs=pairs)
                )
            else:
                raise ConfigError(f"line {lineno}: unknown LF type {kind!r}")
    return lfs


def _between(mention, sentence):
    e1, e2 = mention.e1, mention.e2
    first, second = (e1, e2) if e1.start < e2.start else (e2, e1)
    return sentence.tokens[first.end : second.start]


def apply_lf(lf: LabelingFunction, mention, sentence):
    """Return lf.label if the function fires on this mention, else None.

    Note the None *relation label* is index 0, distinct from a non-firing
    return value of the Python None.
    """
    if lf.kind == "pattern":
        rule = lf.pattern
        if rule.required_order == "e1_first" and mention.e1.start > mention.e2.start:
            return None
        if rule.required_order == "e2_first" and mention.e2.start > mention.e1.start:
            return None
        between = _between(mention, sentence)
        if rule.max_gap is not None and len(between) > rule.max_gap:
            return None
        if any(tok.lower() in rule.between_any for tok in between):
            return lf.label
        return None
    surface1 = _norm_surface(" ".join(sentence.tokens[mention.e1.start : mention.e1.end]))
    surface2 = _norm_surface(" ".join(sentence.tokens[mention.e2.start : mention.e2.end]))
    if (surface1, surface2) in lf.kb_pairs:
        return lf.label
    return None


class AnnotationSet:
    """The sparse annotation table O: entries (mention_id, lf_id, label),
    sorted by (mention_id, lf_id), indexed by mention."""

    def __init__(self, entries):
        self.entries = sorted(entries)
        self.by_mention: dict[int, tuple[tuple[int, int], ...]] = {}
        grouped: dict[int, list[tuple[int, int]]] = {}
        for mid, lf_id, label in self.entries:
            grouped.setdefault(mid, []).append((lf_id, label))
        self.by_mention = {mid: tuple(rows) for mid, rows in grouped.items()}

    def __len__(self):
        return len(self.entries)

    @property
    def labeled_ids(self) -> list[int]:
        return sorted(self.by_mention)

    def labels_of(self, mention_id) -> set[int]:
        return {label for _, label in self.by_mention.get(mention_id, ())}


def annotate(corpus, mentions, lfs) -> AnnotationSet:
    """Apply every labeling function to every mention.

    Mentions with at least one annotation form the labeled pool; the rest
    stay unlabeled.  Entry order is deterministic.
    """
    sentences = {s.id: s for s in corpus}
    entries = []
    for m in mentions:
        sent = sentences[m.sentence_id]
        for lf in lfs:
            label = apply_lf(lf, m, sent)
            if label is not None:
                entries.append((m.id, lf.id, label))
    return AnnotationSet(entries)


def split_labeled(mentions, annotations: AnnotationSet):
    """Partition mention ids into (labeled, unlabeled)."""
    labeled = set(annotations.by_mention)
    c_l = [m.id for m in mentions if m.id in labeled]
    c_u = [m.id for m in mentions if m.id not in labeled]
    return c_l, c_u


@dataclass(frozen=True)
class ConflictStats:
    total_rm: int
    rm_annotated_as_none: int
    rm_with_conflicts: int
    conflicts_involving_none: int

    def as_dict(self):
        return {
            "total_rm": self.total_rm,
            "rm_annotated_as_none": self.rm_annotated_as_none,
            "rm_with_conflicts": self.rm_with_conflicts,
            "conflicts_involving_none": self.conflicts_involving_none,
        }


def conflict_stats(annotations: AnnotationSet, label_space: LabelSpace) -> ConflictStats:
    """Count annotated mentions, None-only mentions, conflicting mentions,
    and conflicts where one of the disagreeing labels is None."""
    none_idx = 0
    total = len(annotations.by_mention)
    none_only = 0
    conflicts = 0
    conflicts_none = 0
    for mid in annotations.by_mention:
        distinct = annotations.labels_of(mid)
        if distinct == {none_idx}:
            none_only += 1
        if len(distinct) >= 2:
            conflicts += 1
            if none_idx in distinct:
                conflicts_none += 1
    return ConflictStats(total, none_only, conflicts, conflicts_none)


def write_annotations_tsv(annotations: AnnotationSet, label_space: LabelSpace, path):
    """Export as TSV: mention_id<TAB>lf_id<TAB>label-name."""
    with open(path, "w", encoding="utf-8") as fh:
        for mid, lf_id, label in annotations.entries:
            fh.write(f"{mid}\t{lf_id}\t{label_space.name_of(label)}\n")


def read_annotations_tsv(path):
    """Read an annotation export; the label space is reconstructed from the
    label names in first-occurrence order (None excluded)."""
    rows = []
    relations = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise DataError("expected mention_id<TAB>lf_id<TAB>label", line=lineno)
            name = parts[2]
            if name != NONE_LABEL and name not in relations:
                relations.append(name)
            rows.append((int(parts[0]), int(parts[1]), name))
    # a file annotated only as None still needs a well-formed label space
    space = LabelSpace(tuple(relations) if relations else ("_unobserved_",))
    entries = [(mid, lf_id, space.index_of(name)) for mid, lf_id, name in rows]
    return AnnotationSet(entries), space
