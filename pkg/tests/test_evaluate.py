"""Confusion counting, metric rounding, degree breakdowns, and writers."""
import csv
import json
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from causemine.evaluate import (
    Confusion,
    Metrics,
    confusion,
    degree_report,
    evaluate_sets,
    gold_sentence_ids,
    gold_triple_ids,
    metrics,
    round_half_up,
    write_histogram_csv,
    write_report_csv,
    write_report_json,
)
from causemine.datasets import AnnotatedSentence
from causemine.extract import Quad

from oracles import oracle_confusion, oracle_degree_histogram


class FakeSentence:
    def __init__(self, sentence_id):
        self.sentence_id = sentence_id


class FakeExample:
    def __init__(self, sentence_id, relation_label):
        self.sentence = FakeSentence(sentence_id)
        self.annotation = AnnotatedSentence(
            sent_id=sentence_id, text="", e1_text="", e2_text="",
            relation_label=relation_label, direction="",
        )


class TestConfusion:
    def test_known_counts(self):
        conf = confusion(
            predicted={"a", "b", "c"},
            gold={"b", "c", "d"},
            universe={"a", "b", "c", "d", "e"},
        )
        assert (conf.tp, conf.fp, conf.fn, conf.tn) == (2, 1, 1, 1)
        assert conf.total == 5
        assert conf.predicted_positive == 3
        assert conf.predicted_negative == 2

    def test_stray_predicted_id_raises(self):
        with pytest.raises(ValueError, match="predicted ids outside"):
            confusion({"x"}, set(), {"a"})

    def test_stray_gold_id_raises(self):
        with pytest.raises(ValueError, match="gold ids outside"):
            confusion(set(), {"x"}, {"a"})

    def test_empty_universe(self):
        conf = confusion(set(), set(), set())
        assert (conf.tp, conf.fp, conf.fn, conf.tn) == (0, 0, 0, 0)

    def test_random_sets_match_oracle(self):
        rng = random.Random(20240)
        ids = [f"i{k}" for k in range(40)]
        for _ in range(200):
            universe = {i for i in ids if rng.random() < 0.7}
            predicted = {i for i in universe if rng.random() < 0.4}
            gold = {i for i in universe if rng.random() < 0.4}
            conf = confusion(predicted, gold, universe)
            assert (conf.tp, conf.fp, conf.fn, conf.tn) == oracle_confusion(
                predicted, gold, universe
            )


class TestRounding:
    def test_half_rounds_up(self):
        # banker's rounding would give 0.12 here; half-up must not
        assert round_half_up(0.125) == 0.13
        assert round_half_up(0.135) == 0.14
        assert round_half_up(2.675) == 2.68

    def test_plain_cases(self):
        assert round_half_up(1.004) == 1.0
        assert round_half_up(1.005) == 1.01
        assert round_half_up(99.999) == 100.0

    def test_places_parameter(self):
        assert round_half_up(0.15, places=1) == 0.2
        assert round_half_up(123.456, places=0) == 123.0

    def test_operates_on_repr_not_binary_float(self):
        # 2.675 is stored as 2.67499999...; repr-based quantize still sees 2.675
        assert round_half_up(2.675) == 2.68


class TestMetrics:
    def test_known_percentages(self):
        m = metrics(Confusion(tp=3, fp=1, fn=2, tn=4))
        assert m.accuracy == 70.0
        assert m.precision == 75.0
        assert m.recall == 60.0

    def test_zero_denominators_are_none(self):
        m = metrics(Confusion(tp=0, fp=0, fn=0, tn=0))
        assert m.accuracy is None
        assert m.precision is None
        assert m.recall is None
        m = metrics(Confusion(tp=0, fp=0, fn=3, tn=5))
        assert m.precision is None
        assert m.recall == 0.0
        m = metrics(Confusion(tp=0, fp=4, fn=0, tn=5))
        assert m.recall is None
        assert m.precision == 0.0

    def test_rounding_applied(self):
        # 1/3 = 33.333... -> 33.33; 2/3 = 66.666... -> 66.67
        m = metrics(Confusion(tp=1, fp=2, fn=0, tn=0))
        assert m.precision == 33.33
        m = metrics(Confusion(tp=2, fp=1, fn=0, tn=0))
        assert m.precision == 66.67

    @given(
        st.integers(0, 50), st.integers(0, 50),
        st.integers(0, 50), st.integers(0, 50),
    )
    def test_ranges(self, tp, fp, fn, tn):
        m = metrics(Confusion(tp=tp, fp=fp, fn=fn, tn=tn))
        for value in (m.accuracy, m.precision, m.recall):
            assert value is None or 0.0 <= value <= 100.0


class TestEvaluateSets:
    def test_row_shape(self):
        row = evaluate_sets("overall", {"a"}, {"a", "b"}, {"a", "b", "c"})
        assert row.label == "overall"
        assert (row.conf.tp, row.conf.fp, row.conf.fn, row.conf.tn) == (1, 0, 1, 1)
        assert row.scores.recall == 50.0

    def test_to_json_keys_and_null(self):
        row = evaluate_sets("empty", set(), set(), set())
        payload = row.to_json()
        assert payload == {
            "label": "empty",
            "tp": 0, "fp": 0, "fn": 0, "tn": 0,
            "predicted_positive": 0, "predicted_negative": 0,
            "accuracy": None, "precision": None, "recall": None,
        }
        # None must serialize as JSON null
        assert json.loads(json.dumps(payload))["precision"] is None


class TestDegreeReport:
    def test_requires_two_sets(self):
        with pytest.raises(ValueError, match="at least 2"):
            degree_report({"m1": {"a"}}, gold=set())

    def test_histogram_matches_oracle(self):
        rng = random.Random(77)
        ids = [f"t{k}" for k in range(30)]
        model_sets = {
            f"m{j}": {i for i in ids if rng.random() < 0.5} for j in range(4)
        }
        report = degree_report(model_sets, gold=set(ids[:10]))
        universe = set().union(*model_sets.values())
        expected = oracle_degree_histogram(model_sets, universe)
        observed = {d: c for d, c in report.histogram.items() if c}
        assert observed == expected
        assert report.universe_size == len(universe)
        assert sum(report.histogram.values()) == len(universe)

    def test_gold_intersected_with_union_universe(self):
        model_sets = {"m1": {"a", "b"}, "m2": {"b"}}
        report = degree_report(model_sets, gold={"b", "zzz"})
        assert report.gold_in_universe == 1
        assert report.gold_per_degree == {1: 0, 2: 1}

    def test_group_split(self):
        model_sets = {
            "m1": {"a", "b", "c", "d"},
            "m2": {"b", "c", "d"},
            "m3": {"c", "d"},
            "m4": {"d"},
        }
        report = degree_report(model_sets, gold={"c", "d"}, split_at=3)
        assert [g.label for g in report.groups] == ["degree 1..2", "degree 3..4"]
        low, high = report.groups
        # low group treats degree-1..2 items {a, b} as the predicted set
        assert (low.row.conf.tp, low.row.conf.fp) == (0, 2)
        # high group treats {c, d} as the predicted set; both are gold
        assert (high.row.conf.tp, high.row.conf.fp) == (2, 0)
        assert high.row.conf.fn == 0
        # both groups are scored over the same union universe
        assert low.row.conf.total == high.row.conf.total == 4

    def test_split_at_one_drops_low_group(self):
        model_sets = {"m1": {"a"}, "m2": {"a", "b"}}
        report = degree_report(model_sets, gold={"a"}, split_at=1)
        assert len(report.groups) == 1
        assert report.groups[0].lo == 1 and report.groups[0].hi == 2

    def test_degrees_mapping_exposed(self):
        model_sets = {"m1": {"a", "b"}, "m2": {"b"}, "m3": {"b"}}
        report = degree_report(model_sets, gold=set())
        assert report.degrees == {"a": 1, "b": 3}


class TestGoldSets:
    def test_gold_sentences(self):
        examples = [
            FakeExample("s1", "Cause-Effect"),
            FakeExample("s2", "Other"),
        ]
        assert gold_sentence_ids(examples) == {"s1"}

    def test_gold_triples(self):
        quads = [
            Quad(subject="smoke", trigger="cause", object="cancer",
                 confidence=1.0, sentence_id="s1"),
            Quad(subject="rain", trigger="cause", object="flood",
                 confidence=1.0, sentence_id="s2"),
        ]
        ids = gold_triple_ids(quads, causal_sentence_ids={"s1"})
        assert len(ids) == 1
        only = next(iter(ids))
        assert len(only) == 16

    def test_same_triple_from_any_causal_sentence(self):
        quads = [
            Quad(subject="a", trigger="b", object="c",
                 confidence=1.0, sentence_id="s1"),
            Quad(subject="a", trigger="b", object="c",
                 confidence=1.0, sentence_id="s2"),
        ]
        assert len(gold_triple_ids(quads, {"s2"})) == 1
        assert len(gold_triple_ids(quads, {"s3"})) == 0


class TestWriters:
    def test_report_csv_layout(self, tmp_path):
        rows = [
            evaluate_sets("overall", {"a"}, {"a", "b"}, {"a", "b", "c"}),
            evaluate_sets("empty", set(), set(), {"x"}),
        ]
        path = tmp_path / "report.csv"
        write_report_csv(path, rows, dataset="demo", stage="stage4")
        with open(path, newline="") as fh:
            parsed = list(csv.reader(fh))
        assert parsed[0] == ["dataset", "stage", "row",
                             "PP", "PN", "TP", "FN", "FP", "TN", "A", "P", "R"]
        assert parsed[1] == ["demo", "stage4", "overall",
                             "1", "2", "1", "1", "0", "1",
                             "66.67", "100.0", "50.0"]
        # zero-denominator metrics surface as NA, not 0 or blank
        assert parsed[2][-3:] == ["100.0", "NA", "NA"]

    def test_report_json_stable(self, tmp_path):
        path = tmp_path / "report.json"
        write_report_json(path, {"b": 1, "a": {"nested": None}})
        text = path.read_text()
        assert text.endswith("\n")
        assert json.loads(text) == {"b": 1, "a": {"nested": None}}
        # keys are sorted for diff-friendly output
        assert text.index('"a"') < text.index('"b"')

    def test_histogram_csv(self, tmp_path):
        path = tmp_path / "hist.csv"
        write_histogram_csv(path, {2: 5, 1: 9}, gold_per_degree={2: 3})
        with open(path, newline="") as fh:
            parsed = list(csv.reader(fh))
        assert parsed == [
            ["degree", "count", "tp_in_degree"],
            ["1", "9", "0"],
            ["2", "5", "3"],
        ]

    def test_histogram_csv_without_gold(self, tmp_path):
        path = tmp_path / "hist.csv"
        write_histogram_csv(path, {1: 4})
        with open(path, newline="") as fh:
            parsed = list(csv.reader(fh))
        assert parsed[1] == ["1", "4", "0"]
