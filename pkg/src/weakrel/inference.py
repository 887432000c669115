"""Prediction with the None-entropy heuristic, and evaluation metrics.

A mention is predicted None when either the classifier's arg max is None or
the entropy of the type distribution over the relation entries exceeds the
threshold eta (a flat distribution over relations means the extractor has no
real preference).  Relation-classification mode ignores both None and eta
and takes the arg max over relations only.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .model import ModelParams, entropy_over_relations, mention_forward, type_distribution

logger = logging.getLogger(__name__)

REASON_CLASSIFIER = "classifier"
REASON_ENTROPY = "entropy"
REASON_NOT_NONE = "not-none"


def default_eta(k: int) -> float:
    """0.8 * ln(K): a fixed fraction of the maximum possible entropy over K
    relation types (K=1 falls back to K=2 to avoid a zero threshold)."""
    return 0.8 * math.log(max(k, 2))


@dataclass
class Prediction:
    mention_id: int
    label: int
    probs: np.ndarray
    entropy: float
    reason: str


def predict(bag, params: ModelParams, eta=None) -> Prediction:
    """Predict a label for one mention (no dropout at inference).

    Empty bags predict None with reason "classifier" and a degenerate
    all-None distribution.
    """
    if eta is None:
        eta = default_eta(params.n_labels - 1)
    if len(bag) == 0:
        logger.debug("mention %d has no in-vocabulary features", bag.mention_id)
        probs = np.zeros(params.n_labels)
        probs[0] = 1.0
        return Prediction(bag.mention_id, 0, probs, 0.0, REASON_CLASSIFIER)
    _, z = mention_forward(bag.feature_ids, params)
    probs = type_distribution(z, params.t)
    top = int(np.argmax(probs))
    entropy = entropy_over_relations(probs)
    if top == 0:
        return Prediction(bag.mention_id, 0, probs, entropy, REASON_CLASSIFIER)
    if entropy > eta:
        return Prediction(bag.mention_id, 0, probs, entropy, REASON_ENTROPY)
    return Prediction(bag.mention_id, top, probs, entropy, REASON_NOT_NONE)


def classify(bag, params: ModelParams) -> int:
    """Arg max over relation labels only (None and eta ignored); ties go to
    the smallest relation index.  Empty bags fall back to relation 1."""
    if len(bag) == 0:
        return 1
    _, z = mention_forward(bag.feature_ids, params)
    probs = type_distribution(z, params.t)
    return int(np.argmax(probs[1:])) + 1


def predict_all(bags, params: ModelParams, eta=None) -> list[Prediction]:
    return [predict(bag, params, eta) for bag in bags]


def sweep_eta(predictions, etas):
    """Count non-None predictions under each threshold, reusing the stored
    distributions: a mention stays non-None iff its arg max is a relation
    and its entropy is at or below eta."""
    argmax_nonnone = np.array([int(np.argmax(p.probs)) != 0 for p in predictions])
    entropies = np.array([p.entropy for p in predictions])
    return [
        (float(eta), int((argmax_nonnone & (entropies <= eta)).sum()))
        for eta in etas
    ]


@dataclass
class MetricsReport:
    mode: str  # "extraction" | "classification"
    precision: float | None = None
    recall: float | None = None
    f1: float | None = None
    accuracy: float | None = None
    counts: dict | None = None

    def as_dict(self):
        out = {"mode": self.mode, "counts": self.counts}
        if self.mode == "extraction":
            out.update(precision=self.precision, recall=self.recall, f1=self.f1)
        else:
            out.update(accuracy=self.accuracy)
        return out


def _check_ids(preds: dict, gold: dict):
    if set(preds) != set(gold):
        missing = set(gold) - set(preds)
        extra = set(preds) - set(gold)
        raise DataError(
            f"prediction/gold mention ids differ "
            f"({len(missing)} missing, {len(extra)} extra)"
        )


def evaluate_extraction(preds: dict, gold: dict, none_label=0) -> MetricsReport:
    """Micro precision/recall/F1 over non-None predictions.

    precision = correct non-None / predicted non-None,
    recall    = correct non-None / gold non-None;
    empty denominators yield 0 with a warning.
    """
    _check_ids(preds, gold)
    pred_nonnone = sum(1 for v in preds.values() if v != none_label)
    gold_nonnone = sum(1 for v in gold.values() if v != none_label)
    correct = sum(
        1 for mid, v in preds.items() if v != none_label and v == gold[mid]
    )
    if pred_nonnone == 0:
        logger.warning("no non-None predictions; precision set to 0")
    if gold_nonnone == 0:
        logger.warning("no non-None gold labels; recall set to 0")
    precision = correct / pred_nonnone if pred_nonnone else 0.0
    recall = correct / gold_nonnone if gold_nonnone else 0.0
    f1 = (
        2 * precision * recall / (precision + recall)
        if precision + recall > 0
        else 0.0
    )
    total = len(gold)
    counts = {
        "total": total,
        "gold_non_none": gold_nonnone,
        "predicted_non_none": pred_nonnone,
        "correct_non_none": correct,
        "gold_none_fraction": (total - gold_nonnone) / total if total else 0.0,
        "predicted_none_fraction": (total - pred_nonnone) / total if total else 0.0,
    }
    return MetricsReport("extraction", precision, recall, f1, None, counts)


def evaluate_classification(preds: dict, gold: dict, none_label=0) -> MetricsReport:
    """Accuracy over the gold non-None mentions (the predictions should come
    from classify, which never emits None)."""
    _check_ids(preds, gold)
    kept = [mid for mid, v in gold.items() if v != none_label]
    if not kept:
        logger.warning("no non-None gold labels; accuracy set to 0")
        accuracy = 0.0
    else:
        accuracy = sum(1 for mid in kept if preds[mid] == gold[mid]) / len(kept)
    counts = {
        "total": len(gold),
        "gold_non_none": len(kept),
        "correct": sum(1 for mid in kept if preds[mid] == gold[mid]),
    }
    return MetricsReport("classification", accuracy=accuracy, counts=counts)


def write_predictions_tsv(predictions, label_space, path):
    """TSV: mention_id<TAB>label<TAB>reason<TAB>entropy<TAB>p_None,p_r1,..."""
    with open(path, "w", encoding="utf-8") as fh:
        for p in predictions:
            probs = ",".join(f"{x:.9g}" for x in p.probs)
            fh.write(
                f"{p.mention_id}\t{label_space.name_of(p.label)}"
                f"\t{p.reason}\t{p.entropy:.9g}\t{probs}\n"
            )


def read_label_tsv(path) -> dict[int, str]:
    """Read mention_id -> label-name from a gold file (two columns) or a
    predictions file (label in the second column)."""
    labels = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) < 2:
                raise DataError("expected mention_id<TAB>label", line=lineno)
            labels[int(parts[0])] = parts[1]
    return labels


def write_gold_tsv(gold: dict, label_space, path):
    with open(path, "w", encoding="utf-8") as fh:
        for mid in sorted(gold):
            fh.write(f"{mid}\t{label_space.name_of(gold[mid])}\n")
