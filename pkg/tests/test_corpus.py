import json

import numpy as np
import pytest

from weakrel.corpus import (
    EntitySpan,
    generate_mentions,
    load_corpus,
    write_mentions_tsv,
)
from weakrel.errors import DataError

from conftest import build_sentence


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r) + "\n")


GOOD = {
    "id": "s0",
    "tokens": ["Hussein", "was", "born", "in", "Amman"],
    "pos": ["NNP", "VBD", "VBN", "IN", "NNP"],
    "entities": [{"start": 0, "end": 1, "head": 0}, {"start": 4, "end": 5, "head": 4}],
}


class TestLoadCorpus:
    def test_single_sentence(self, tmp_path):
        path = tmp_path / "c.jsonl"
        write_jsonl(path, [GOOD])
        corpus = load_corpus(path)
        assert len(corpus) == 1
        sent = corpus[0]
        assert sent.tokens == ("Hussein", "was", "born", "in", "Amman")
        assert sent.pos[1] == "VBD"
        assert len(sent.entities) == 2
        assert sent.entities[0] == EntitySpan(0, 1, 0)

    def test_empty_file_gives_empty_corpus(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text("")
        assert load_corpus(path) == []

    def test_overlapping_entities_rejected(self, tmp_path):
        bad = dict(GOOD)
        bad["entities"] = [
            {"start": 0, "end": 2, "head": 0},
            {"start": 1, "end": 3, "head": 1},
        ]
        path = tmp_path / "c.jsonl"
        write_jsonl(path, [bad])
        with pytest.raises(DataError, match="overlapping"):
            load_corpus(path)

    def test_pos_length_mismatch_rejected(self, tmp_path):
        bad = dict(GOOD)
        bad["pos"] = ["NNP"]
        path = tmp_path / "c.jsonl"
        write_jsonl(path, [bad])
        with pytest.raises(DataError, match="POS"):
            load_corpus(path)

    def test_malformed_json_reports_line_number(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text(json.dumps(GOOD) + "\n{broken\n")
        with pytest.raises(DataError, match="line 2"):
            load_corpus(path)

    def test_head_outside_span_rejected(self, tmp_path):
        bad = dict(GOOD)
        bad["entities"] = [{"start": 0, "end": 1, "head": 3}]
        path = tmp_path / "c.jsonl"
        write_jsonl(path, [bad])
        with pytest.raises(DataError, match="head"):
            load_corpus(path)

    def test_span_out_of_range_rejected(self, tmp_path):
        bad = dict(GOOD)
        bad["entities"] = [{"start": 4, "end": 9, "head": 4}]
        path = tmp_path / "c.jsonl"
        write_jsonl(path, [bad])
        with pytest.raises(DataError, match="out of range"):
            load_corpus(path)

    def test_unknown_fields_ignored(self, tmp_path):
        rec = dict(GOOD)
        rec["extra"] = {"anything": 1}
        path = tmp_path / "c.jsonl"
        write_jsonl(path, [rec])
        assert len(load_corpus(path)) == 1

    def test_input_order_preserved(self, tmp_path):
        records = [dict(GOOD, id=f"s{i}") for i in range(5)]
        path = tmp_path / "c.jsonl"
        write_jsonl(path, records)
        assert [s.id for s in load_corpus(path)] == [f"s{i}" for i in range(5)]


class TestGenerateMentions:
    def test_two_entities_yield_both_ordered_pairs(self):
        sent = build_sentence("s", list("abcde"), entities=[(0, 1, 0), (3, 4, 3)])
        ms = generate_mentions([sent])
        assert len(ms) == 2
        assert (ms[0].e1.start, ms[0].e2.start) == (0, 3)
        assert (ms[1].e1.start, ms[1].e2.start) == (3, 0)

    def test_three_entities_yield_six_pairs(self):
        sent = build_sentence(
            "s", list("abcdef"), entities=[(0, 1, 0), (2, 3, 2), (4, 5, 4)]
        )
        assert len(generate_mentions([sent])) == 6

    def test_ids_consecutive_across_sentences(self):
        # two sentences with two entities each: ids 0..3 in sentence order
        s1 = build_sentence("s1", list("abcd"), entities=[(0, 1, 0), (2, 3, 2)])
        s2 = build_sentence("s2", list("wxyz"), entities=[(1, 2, 1), (3, 4, 3)])
        ms = generate_mentions([s1, s2])
        assert [m.id for m in ms] == [0, 1, 2, 3]
        assert [m.sentence_id for m in ms] == ["s1", "s1", "s2", "s2"]

    def test_single_entity_contributes_nothing(self):
        sent = build_sentence("s", list("abc"), entities=[(0, 1, 0)])
        assert generate_mentions([sent]) == []

    def test_cap_keeps_first_pairs(self):
        sent = build_sentence(
            "s", list("abcdef"), entities=[(0, 1, 0), (2, 3, 2), (4, 5, 4)]
        )
        ms = generate_mentions([sent], max_pairs_per_sentence=2)
        assert len(ms) == 2
        assert ms[0].e1.start == 0 and ms[1].e1.start == 0

    def test_regeneration_is_identical_and_ids_bijective(self):
        rng = np.random.default_rng(11)
        corpus = []
        for i in range(40):
            n = int(rng.integers(4, 12))
            spans = []
            pos = 0
            while pos + 1 < n and len(spans) < 4:
                width = int(rng.integers(1, 3))
                end = min(pos + width, n)
                spans.append((pos, end, pos))
                pos = end + int(rng.integers(1, 3))
            corpus.append(
                build_sentence(f"s{i}", [f"t{j}" for j in range(n)], entities=spans)
            )
        first = generate_mentions(corpus)
        second = generate_mentions(corpus)
        assert first == second
        assert [m.id for m in first] == list(range(len(first)))
        by_id = {s.id: s for s in corpus}
        for m in first:
            assert m.e1 in by_id[m.sentence_id].entities
            assert m.e2 in by_id[m.sentence_id].entities
            assert m.e1 != m.e2

    def test_mentions_tsv_export(self, tmp_path):
        sent = build_sentence("s9", list("abcd"), entities=[(0, 1, 0), (2, 4, 3)])
        ms = generate_mentions([sent])
        out = tmp_path / "m.tsv"
        write_mentions_tsv(ms, out)
        lines = out.read_text().splitlines()
        assert lines[0] == "0\ts9\t0\t1\t2\t4"
        assert lines[1] == "1\ts9\t2\t4\t0\t1"
