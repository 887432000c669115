"""Corpus loading and relation-mention candidate generation.

The corpus file is UTF-8 JSON lines, one sentence per line:

    {"id": "...", "tokens": [...], "pos": [...],
     "entities": [{"start": int, "end": int, "head": int}, ...]}

Tokenization, POS tagging and entity detection happen upstream; this module
only validates and enumerates candidates.  Unknown fields are ignored.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import DataError


@dataclass(frozen=True)
class EntitySpan:
    """Token span [start, end) with a designated head token index."""

    start: int
    end: int
    head: int


@dataclass(frozen=True)
class Sentence:
    id: str
    tokens: tuple[str, ...]
    pos: tuple[str, ...]
    entities: tuple[EntitySpan, ...]


@dataclass(frozen=True)
class RelationMention:
    """An ordered pair of distinct entity spans in one sentence."""

    id: int
    sentence_id: str
    e1: EntitySpan
    e2: EntitySpan


def _validate_sentence(sent: Sentence, line=None):
    if len(sent.pos) != len(sent.tokens):
        raise DataError(
            f"sentence {sent.id!r}: {len(sent.pos)} POS tags for "
            f"{len(sent.tokens)} tokens",
            line=line,
        )
    n = len(sent.tokens)
    for span in sent.entities:
        if not (0 <= span.start < span.end <= n):
            raise DataError(
                f"sentence {sent.id!r}: entity span [{span.start}, {span.end}) "
                f"out of range for {n} tokens",
                line=line,
            )
        if not (span.start <= span.head < span.end):
            raise DataError(
                f"sentence {sent.id!r}: head {span.head} outside span "
                f"[{span.start}, {span.end})",
                line=line,
            )
    by_start = sorted(sent.entities, key=lambda s: (s.start, s.end))
    for prev, cur in zip(by_start, by_start[1:]):
        if cur.start < prev.end:
            raise DataError(
                f"sentence {sent.id!r}: overlapping entity spans "
                f"[{prev.start}, {prev.end}) and [{cur.start}, {cur.end})",
                line=line,
            )


def _parse_sentence(record: dict, line=None) -> Sentence:
    try:
        spans = tuple(
            EntitySpan(int(e["start"]), int(e["end"]), int(e["head"]))
            for e in record["entities"]
        )
        sent = Sentence(
            id=str(record["id"]),
            tokens=tuple(str(t) for t in record["tokens"]),
            pos=tuple(str(p) for p in record["pos"]),
            entities=spans,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"bad sentence record: {exc}", line=line) from exc
    _validate_sentence(sent, line=line)
    return sent


def load_corpus(path) -> list[Sentence]:
    """Read a JSON-lines corpus file; preserves input order.

    Raises DataError (carrying the 1-based line number) on malformed lines
    or invariant violations.  Blank lines are skipped.
    """
    sentences = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                record = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise DataError(f"invalid JSON: {exc.msg}", line=lineno) from exc
            if not isinstance(record, dict):
                raise DataError("sentence record must be a JSON object", line=lineno)
            sentences.append(_parse_sentence(record, line=lineno))
    return sentences


def generate_mentions(corpus, max_pairs_per_sentence=None) -> list[RelationMention]:
    """Enumerate every ordered pair of distinct entity spans per sentence.

    Pairs are emitted in (e1.start, e2.start) order within each sentence and
    mention ids are consecutive from 0 over the whole corpus, so regeneration
    on the same corpus is bit-identical.  Sentences with fewer than two
    entities contribute nothing.
    """
    mentions = []
    for sent in corpus:
        spans = sorted(sent.entities, key=lambda s: s.start)
        pairs = [(a, b) for a in spans for b in spans if a != b]
        pairs.sort(key=lambda p: (p[0].start, p[1].start))
        if max_pairs_per_sentence is not None:
            pairs = pairs[:max_pairs_per_sentence]
        for e1, e2 in pairs:
            mentions.append(RelationMention(len(mentions), sent.id, e1, e2))
    return mentions


def write_mentions_tsv(mentions, path):
    """Export mentions as TSV: mention_id, sentence_id, e1_start, e1_end, e2_start, e2_end."""
    with open(path, "w", encoding="utf-8") as fh:
        for m in mentions:
            fh.write(
                f"{m.id}\t{m.sentence_id}\t{m.e1.start}\t{m.e1.end}"
                f"\t{m.e2.start}\t{m.e2.end}\n"
            )
