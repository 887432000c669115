"""Synthetic benchmark generator.

Builds a corpus of templated two-entity sentences over three relation types
plus None, a labeling-function file with two precise pattern functions per
relation, one deliberately over-firing function per relation (reliable only
on its own type's contexts), two None functions, and an order-guard None
function that fires on every reversed pair.  The over-firing triggers are
chosen so that a large share of mentions carries conflicting annotations,
including one-vs-one ties that a context-free majority vote resolves wrongly
(e.g. a "lives in" context annotated both lives_in and, via the loose "in"
trigger, born_in).

Outputs in the target directory: train.jsonl, test.jsonl, lfs.jsonl,
gold_train.tsv, gold_test.tsv, config.toml.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .corpus import EntitySpan, Sentence, generate_mentions
from .supervision import LabelSpace, annotate, conflict_stats, load_labeling_functions

RELATIONS = ("born_in", "works_at", "lives_in")

# Middle token sequences between the two entity mentions, with POS tags and
# sampling weights.  Contested variants carry a second, wrong annotation
# from a loose preposition trigger; anchor variants fire a single label.
# Every labeling function has anchor contexts sharing vocabulary with its
# contested contexts, so reliability learned on anchors transfers to ties.
TEMPLATES = {
    "born_in": [
        (["was", "born", "in"], ["VBD", "VBN", "IN"], 0.3),
        (["was", "born", "near"], ["VBD", "VBN", "IN"], 0.15),
        (["was", "born", "at"], ["VBD", "VBN", "IN"], 0.2),
        (["is", "a", "native", "of"], ["VBZ", "DT", "JJ", "IN"], 0.35),
    ],
    "works_at": [
        (["works", "at"], ["VBZ", "IN"], 0.3),
        (["works", "for"], ["VBZ", "IN"], 0.1),
        (["works", "in"], ["VBZ", "IN"], 0.3),
        (["is", "employed", "by"], ["VBZ", "VBN", "IN"], 0.3),
    ],
    "lives_in": [
        (["lives", "in"], ["VBZ", "IN"], 0.3),
        (["lives", "near"], ["VBZ", "IN"], 0.1),
        (["lives", "at"], ["VBZ", "IN"], 0.2),
        (["resides", "in"], ["VBZ", "IN"], 0.3),
        (["resides", "near"], ["VBZ", "IN"], 0.1),
    ],
    "None": [
        (["visited"], ["VBD"], 0.1),
        (["met", "with"], ["VBD", "IN"], 0.1),
        (["arrived", "in"], ["VBD", "IN"], 0.3),
        (["stayed", "at"], ["VBD", "IN"], 0.3),
        (["arrived", "early"], ["VBD", "RB"], 0.2),
    ],
}

TYPE_WEIGHTS = [("born_in", 0.25), ("works_at", 0.20), ("lives_in", 0.25), ("None", 0.30)]

FIRST_NAMES = [
    "Anna", "Omar", "Lena", "Ravi", "Maya", "Tomas", "Ines", "Diego", "Petra",
    "Yusuf", "Clara", "Emil", "Noor", "Ivan", "Sofia", "Hugo", "Aisha",
    "Marco", "Elif", "Jonas",
]
LAST_NAMES = [
    "Keller", "Mbeki", "Ortega", "Tanaka", "Novak", "Haddad", "Larsen",
    "Okafor", "Silva", "Weber", "Moreau", "Kovacs", "Banda", "Petrov",
    "Lindgren", "Costa", "Farah", "Ricci", "Aydin", "Olsen",
]
PLACES = [
    ["Lakewood"], ["Fairview"], ["Greenville"], ["Ashford"], ["Brookhaven"],
    ["Meridian"], ["Clearwater"], ["Ridgemont"], ["Silverton"], ["Oakdale"],
    ["Port", "Arden"], ["New", "Halden"], ["East", "Moreland"],
    ["Lake", "Vista"], ["Mount", "Corin"],
]
ORGS = [
    ["Acme", "Labs"], ["Northwind"], ["Vertex", "Group"],
    ["Blue", "Harbor", "Media"], ["Orion", "Freight"], ["Cascade", "Partners"],
    ["Helix", "Works"], ["Summit", "Forge"], ["Quanta", "Mills"],
    ["Ironwood", "Press"],
]

PREFIXES = [
    ([], []),
    (["Yesterday", ","], ["RB", ","]),
    (["Local", "reports", "say"], ["JJ", "NNS", "VBP"]),
]
SUFFIXES = [
    (["."], ["."]),
    (["last", "year", "."], ["JJ", "NN", "."]),
    ([",", "according", "to", "reports", "."], [",", "VBG", "TO", "NNS", "."]),
]

LF_RECORDS = [
    {"name": "lf_born_trigger", "relation": "born_in", "type": "pattern",
     "between_any": ["born"], "order": "e1_first"},
    {"name": "lf_born_native", "relation": "born_in", "type": "pattern",
     "between_any": ["native"], "order": "e1_first"},
    {"name": "lf_works_verb", "relation": "works_at", "type": "pattern",
     "between_any": ["works"], "order": "e1_first"},
    {"name": "lf_works_employed", "relation": "works_at", "type": "pattern",
     "between_any": ["employed"], "order": "e1_first"},
    {"name": "lf_lives_verb", "relation": "lives_in", "type": "pattern",
     "between_any": ["lives"], "order": "e1_first"},
    {"name": "lf_lives_resides", "relation": "lives_in", "type": "pattern",
     "between_any": ["resides"], "order": "e1_first"},
    # deliberately over-firing: preposition triggers cross type boundaries,
    # so each is reliable only on its own type's contexts
    {"name": "lf_born_in_loose", "relation": "born_in", "type": "pattern",
     "between_any": ["in"], "order": "e1_first"},
    {"name": "lf_works_at_loose", "relation": "works_at", "type": "pattern",
     "between_any": ["at"], "order": "e1_first"},
    {"name": "lf_lives_near_loose", "relation": "lives_in", "type": "pattern",
     "between_any": ["near"], "order": "e1_first"},
    {"name": "lf_none_social", "relation": "None", "type": "pattern",
     "between_any": ["visited", "met"]},
    {"name": "lf_none_travel", "relation": "None", "type": "pattern",
     "between_any": ["arrived", "stayed"]},
    # closed-world direction guard: any template token with the pair reversed
    {"name": "lf_none_reversed", "relation": "None", "type": "pattern",
     "between_any": ["born", "native", "works", "employed", "lives", "resides",
                     "visited", "met", "arrived", "stayed", "in", "at", "of",
                     "by", "near", "for", "with", "early"],
     "order": "e2_first"},
]

CONFIG_KEYS = [
    ("relations", ",".join(RELATIONS)),
    ("alpha", "0.025"),
    ("lambda1", "1.0"),
    ("lambda2", "1.0"),
    ("negatives", "5"),
    ("dropout", "0.5"),
    ("epochs", "10"),
    ("min_count", "2"),
    ("dim_v", "100"),
    ("dim_z", "50"),
]


def _pick(rng, seq):
    return seq[int(rng.integers(0, len(seq)))]


def _pick_weighted(rng, rows, weight_at):
    x = rng.random()
    acc = 0.0
    for row in rows:
        acc += row[weight_at]
        if x < acc:
            return row
    return rows[-1]


def _make_sentence(rng, sent_id):
    """Return (Sentence, type_name). Entities are (person, object)."""
    type_name = _pick_weighted(rng, TYPE_WEIGHTS, 1)[0]
    middle, middle_pos, _ = _pick_weighted(rng, TEMPLATES[type_name], 2)
    person = [_pick(rng, FIRST_NAMES), _pick(rng, LAST_NAMES)]
    if type_name == "works_at":
        obj = _pick(rng, ORGS)
    elif type_name == "None":
        obj = _pick(rng, PLACES + ORGS)
    else:
        obj = _pick(rng, PLACES)
    prefix, prefix_pos = _pick(rng, PREFIXES)
    suffix, suffix_pos = _pick(rng, SUFFIXES)

    tokens = prefix + person + middle + obj + suffix
    pos = prefix_pos + ["NNP"] * len(person) + middle_pos + ["NNP"] * len(obj) + suffix_pos
    p_start = len(prefix)
    p_end = p_start + len(person)
    o_start = p_end + len(middle)
    o_end = o_start + len(obj)
    sent = Sentence(
        id=sent_id,
        tokens=tuple(tokens),
        pos=tuple(pos),
        entities=(
            EntitySpan(p_start, p_end, p_end - 1),
            EntitySpan(o_start, o_end, o_end - 1),
        ),
    )
    return sent, type_name


def _gold_for(corpus, types, label_space):
    """Gold labels keyed by mention id: the forward (person, object) pair
    carries the sentence's relation, every reversed pair is None."""
    type_by_sid = dict(zip((s.id for s in corpus), types))
    gold = {}
    for m in generate_mentions(corpus):
        sent_type = type_by_sid[m.sentence_id]
        forward = m.e1.start < m.e2.start
        gold[m.id] = label_space.index_of(sent_type) if forward else 0
    return gold


def _write_corpus(corpus, path):
    with open(path, "w", encoding="utf-8") as fh:
        for s in corpus:
            record = {
                "id": s.id,
                "tokens": list(s.tokens),
                "pos": list(s.pos),
                "entities": [
                    {"start": e.start, "end": e.end, "head": e.head}
                    for e in s.entities
                ],
            }
            fh.write(json.dumps(record) + "\n")


def _write_gold(gold, label_space, path):
    with open(path, "w", encoding="utf-8") as fh:
        for mid in sorted(gold):
            fh.write(f"{mid}\t{label_space.name_of(gold[mid])}\n")


def generate(out_dir, seed=7, train_sentences=2500, test_sentences=500) -> dict:
    """Write the synthetic dataset and return its summary statistics."""
    os.makedirs(out_dir, exist_ok=True)
    rng = np.random.default_rng(seed)
    label_space = LabelSpace(RELATIONS)

    train, train_types = [], []
    for i in range(train_sentences):
        sent, type_name = _make_sentence(rng, f"train-{i:05d}")
        train.append(sent)
        train_types.append(type_name)
    test, test_types = [], []
    for i in range(test_sentences):
        sent, type_name = _make_sentence(rng, f"test-{i:05d}")
        test.append(sent)
        test_types.append(type_name)

    paths = {
        "train": os.path.join(out_dir, "train.jsonl"),
        "test": os.path.join(out_dir, "test.jsonl"),
        "lfs": os.path.join(out_dir, "lfs.jsonl"),
        "gold_train": os.path.join(out_dir, "gold_train.tsv"),
        "gold_test": os.path.join(out_dir, "gold_test.tsv"),
        "config": os.path.join(out_dir, "config.toml"),
    }
    _write_corpus(train, paths["train"])
    _write_corpus(test, paths["test"])
    with open(paths["lfs"], "w", encoding="utf-8") as fh:
        for record in LF_RECORDS:
            fh.write(json.dumps(record) + "\n")
    _write_gold(_gold_for(train, train_types, label_space), label_space, paths["gold_train"])
    _write_gold(_gold_for(test, test_types, label_space), label_space, paths["gold_test"])
    with open(paths["config"], "w", encoding="utf-8") as fh:
        for key, value in CONFIG_KEYS + [("seed", str(seed))]:
            fh.write(f"{key} = {value}\n")

    lfs = load_labeling_functions(paths["lfs"], label_space)
    mentions = generate_mentions(train)
    stats = conflict_stats(annotate(train, mentions, lfs), label_space)
    summary = {
        "train_sentences": len(train),
        "test_sentences": len(test),
        "train_mentions": len(mentions),
        "test_mentions": 2 * len(test),
        "labeling_functions": len(lfs),
        "annotated_mentions": stats.total_rm,
        "conflicted_mentions": stats.rm_with_conflicts,
        "conflict_fraction": (
            stats.rm_with_conflicts / stats.total_rm if stats.total_rm else 0.0
        ),
        "files": paths,
    }
    return summary
