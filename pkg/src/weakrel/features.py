"""Lexical feature extraction and the feature vocabulary.

Feature templates (for a mention with entity mentions EM1 and EM2):

  HEAD_EM1_w / HEAD_EM2_w      head token of each EM
  TKN_EM1_w / TKN_EM2_w        every token inside each EM
  w                            every token strictly between the EMs
  P                            every POS tag strictly between the EMs
  "w1 w2"                      bigrams in the 3-word window anchored at each
                               EM edge (two tokens outside plus the edge token)
  EM1_BEFORE_EM2 / EM2_BEFORE_EM1
  EM_DISTANCE_k                token count between the spans
  EM_NUMBER_k                  entity mentions strictly between the spans
  EM_BEFORE_w / EM_AFTER_w     unigrams adjacent to each EM
  BROWN_bits                   cluster bitstring for each EM head token and
                               each between-token present in the cluster map

Extraction is a pure function of (mention, sentence, cluster map); windows
truncate at sentence boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError


def _clean(feature: str) -> str:
    # TSV exports reserve tab/newline
    return (
        feature.replace("\t", "\\t").replace("\n", "\\n").replace("\r", "\\r")
    )


def _window_bigrams(tokens, lo, hi):
    window = tokens[max(0, lo) : min(len(tokens), hi)]
    return [f"{a} {b}" for a, b in zip(window, window[1:])]


def extract_features(mention, sentence, brown=None) -> list[str]:
    """Return the raw feature strings for one relation mention."""
    tokens = sentence.tokens
    e1, e2 = mention.e1, mention.e2
    first, second = (e1, e2) if e1.start < e2.start else (e2, e1)
    between_lo, between_hi = first.end, second.start

    feats = []
    feats.append(f"HEAD_EM1_{tokens[e1.head]}")
    feats.append(f"HEAD_EM2_{tokens[e2.head]}")
    for i in range(e1.start, e1.end):
        feats.append(f"TKN_EM1_{tokens[i]}")
    for i in range(e2.start, e2.end):
        feats.append(f"TKN_EM2_{tokens[i]}")
    feats.extend(tokens[between_lo:between_hi])
    feats.extend(sentence.pos[between_lo:between_hi])
    for span in (e1, e2):
        feats.extend(_window_bigrams(tokens, span.start - 2, span.start + 1))
        feats.extend(_window_bigrams(tokens, span.end - 1, span.end + 2))
    feats.append("EM1_BEFORE_EM2" if e1.start < e2.start else "EM2_BEFORE_EM1")
    feats.append(f"EM_DISTANCE_{max(0, between_hi - between_lo)}")
    n_inner = sum(
        1
        for other in sentence.entities
        if other not in (e1, e2)
        and other.start >= between_lo
        and other.end <= between_hi
    )
    feats.append(f"EM_NUMBER_{n_inner}")
    for span in (e1, e2):
        if span.start > 0:
            feats.append(f"EM_BEFORE_{tokens[span.start - 1]}")
        if span.end < len(tokens):
            feats.append(f"EM_AFTER_{tokens[span.end]}")
    if brown:
        for tok in (tokens[e1.head], tokens[e2.head]):
            if tok in brown:
                feats.append(f"BROWN_{brown[tok]}")
        for tok in tokens[between_lo:between_hi]:
            if tok in brown:
                feats.append(f"BROWN_{brown[tok]}")
    return [_clean(f) for f in feats]


@dataclass
class FeatureVocab:
    """Dense string-feature -> id map.

    Ids are assigned in order of first occurrence over the counting pass, so
    rebuilding on the same input yields the identical assignment.  `counts`
    is None for vocabularies restored from a model file.
    """

    feature_to_id: dict[str, int]
    counts: list[int] | None
    min_count: int

    def __len__(self):
        return len(self.feature_to_id)

    @property
    def features(self) -> list[str]:
        out = [""] * len(self.feature_to_id)
        for feat, idx in self.feature_to_id.items():
            out[idx] = feat
        return out


def build_vocab(feature_lists, min_count=2) -> FeatureVocab:
    """Count features over all lists, keep those with count >= min_count,
    assign dense ids in first-occurrence order."""
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    totals: dict[str, int] = {}
    for feats in feature_lists:
        for f in feats:
            totals[f] = totals.get(f, 0) + 1
    mapping = {}
    counts = []
    for feat, n in totals.items():
        if n >= min_count:
            mapping[feat] = len(mapping)
            counts.append(n)
    return FeatureVocab(mapping, counts, min_count)


@dataclass
class FeatureBag:
    """Deduplicated, sorted in-vocabulary feature ids for one mention."""

    mention_id: int
    feature_ids: np.ndarray

    def __len__(self):
        return len(self.feature_ids)


def encode(m_features, vocab: FeatureVocab, mention_id=-1) -> FeatureBag:
    """Map feature strings to a sorted unique id set, dropping OOV features."""
    mapping = vocab.feature_to_id
    ids = {mapping[f] for f in m_features if f in mapping}
    return FeatureBag(mention_id, np.array(sorted(ids), dtype=np.intp))


def build_bags(mentions, sentences_by_id, vocab, brown=None) -> list[FeatureBag]:
    """Extract and encode features for every mention, indexed by mention id."""
    bags = []
    for m in mentions:
        feats = extract_features(m, sentences_by_id[m.sentence_id], brown)
        bags.append(encode(feats, vocab, mention_id=m.id))
    return bags


def load_brown_clusters(path) -> dict[str, str]:
    """Read a TSV cluster file: token<TAB>bitstring, one per line."""
    clusters = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DataError("expected token<TAB>bitstring", line=lineno)
            clusters[parts[0]] = parts[1]
    return clusters


def write_vocab_tsv(vocab: FeatureVocab, path):
    """Export as TSV: id<TAB>count<TAB>feature-string."""
    counts = vocab.counts or [0] * len(vocab)
    with open(path, "w", encoding="utf-8") as fh:
        for feat, idx in vocab.feature_to_id.items():
            fh.write(f"{idx}\t{counts[idx]}\t{feat}\n")
