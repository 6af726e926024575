import json

import numpy as np
import pytest

from causemine.embed import HashEmbeddingProvider
from causemine.ensemble import ModelChannel
from causemine.errors import ClassificationIncompleteError
from causemine.extract import quad_id
from causemine.feedback import (
    Blocklist,
    VerdictRecord,
    append_verdict,
    apply_feedback,
    effective_verdicts,
    load_verdicts,
)
from causemine.store import BinnedVectorStore, build_store


def record(qid="q1", verdict="causal", ts="2024-01-01T00:00:00+00:00",
           expert="e1", **kw):
    return VerdictRecord(quad_id=qid, verdict=verdict, expert_id=expert,
                         timestamp=ts, **kw)


class TestVerdictRecord:
    def test_json_round_trip_canonical_keys(self):
        rec = record(note="looks right", confidence_override=0.7,
                     subject="smoking", trigger="cause", object="cancer")
        row = rec.to_json()
        assert set(row) == {
            "quad_id", "verdict", "expert_id", "timestamp", "note",
            "confidence_override", "subject", "trigger", "object",
        }
        assert VerdictRecord.from_json(row) == rec

    def test_json_without_triple_keeps_six_keys(self):
        row = record().to_json()
        assert set(row) == {
            "quad_id", "verdict", "expert_id", "timestamp", "note",
            "confidence_override",
        }
        assert row["note"] is None

    def test_from_json_derives_quad_id_from_triple(self):
        row = {
            "verdict": "causal", "expert_id": "e", "timestamp": "t",
            "subject": "a", "trigger": "b", "object": "c",
        }
        rec = VerdictRecord.from_json(row)
        assert rec.quad_id == quad_id("a", "b", "c")

    def test_invalid_verdict_rejected(self):
        with pytest.raises(ValueError):
            VerdictRecord.from_json({
                "quad_id": "q", "verdict": "perhaps", "expert_id": "e",
                "timestamp": "t",
            })

    def test_phrase_joins_triple(self):
        rec = record(subject="a", trigger="b", object="c")
        assert rec.phrase == "a b c"
        assert record().phrase == ""

    def test_append_and_load(self, tmp_path):
        path = tmp_path / "verdicts.jsonl"
        append_verdict(path, record(qid="q1"))
        append_verdict(path, record(qid="q2", verdict="non_causal"))
        got = load_verdicts(path)
        assert [r.quad_id for r in got] == ["q1", "q2"]
        assert load_verdicts(tmp_path / "missing.jsonl") == []


class TestEffectiveVerdicts:
    def test_latest_timestamp_wins(self):
        recs = [
            record(qid="q1", verdict="causal", ts="2024-01-02T00:00:00+00:00"),
            record(qid="q1", verdict="non_causal", ts="2024-01-01T00:00:00+00:00"),
        ]
        assert effective_verdicts(recs)["q1"].verdict == "causal"

    def test_equal_timestamps_fall_back_to_file_order(self):
        recs = [
            record(qid="q1", verdict="causal"),
            record(qid="q1", verdict="non_causal"),
        ]
        assert effective_verdicts(recs)["q1"].verdict == "non_causal"

    def test_independent_quads_kept_apart(self):
        recs = [record(qid="q1"), record(qid="q2", verdict="non_causal")]
        eff = effective_verdicts(recs)
        assert eff["q1"].verdict == "causal"
        assert eff["q2"].verdict == "non_causal"


class TestBlocklist:
    def test_add_persists_jsonl_and_vectors(self, tmp_path):
        bl = Blocklist(tmp_path / "blocklist.jsonl")
        bl.add("a", "b", "c", {"m1": np.array([1.0, 0.0])},
               added_at="2024-01-01T00:00:00+00:00")
        rows = [json.loads(l) for l in
                (tmp_path / "blocklist.jsonl").read_text().splitlines()]
        assert rows[0]["phrase"] == "a b c"
        qid = quad_id("a", "b", "c")
        rel = rows[0]["vectors"]["m1"]
        assert rel == f"blocklist_vecs/{qid}.m1.npy"
        assert (tmp_path / rel).exists()

    def test_reload_restores_entries(self, tmp_path):
        path = tmp_path / "blocklist.jsonl"
        Blocklist(path).add("a", "b", "c", {"m1": np.array([1.0, 0.0])})
        bl = Blocklist(path)
        assert len(bl) == 1
        assert bl.phrases() == ["a b c"]
        assert np.array_equal(bl.entries[0].vectors["m1"], [1.0, 0.0])

    def test_is_blocked_any_model_over_threshold(self, tmp_path):
        bl = Blocklist(tmp_path / "b.jsonl")
        bl.add("a", "b", "c", {
            "m1": np.array([1.0, 0.0]),
            "m2": np.array([0.0, 1.0]),
        })
        assert bl.is_blocked({"m1": np.array([1.0, 0.05])}, threshold=0.85)
        assert not bl.is_blocked({"m1": np.array([0.0, 1.0])}, threshold=0.85)
        # second model saves the day
        assert bl.is_blocked({
            "m1": np.array([0.0, 1.0]),
            "m2": np.array([0.0, 2.0]),
        }, threshold=0.85)

    def test_blocked_mask_via_providers(self, tmp_path):
        provider = HashEmbeddingProvider("m1", dimension=16)
        bl = Blocklist(tmp_path / "b.jsonl")
        vec = provider.embed(["a b c"])[0]
        bl.add("a", "b", "c", {"m1": vec})
        mask = bl.blocked_mask(["a b c", "x y z"], [provider], threshold=0.95)
        assert mask == [True, False]

    def test_empty_blocklist_blocks_nothing(self, tmp_path):
        bl = Blocklist(tmp_path / "b.jsonl")
        assert bl.blocked_mask(["a"], [], threshold=0.9) == [False]


def make_channels(n=2, dimension=16, seed_texts=("alpha beta",)):
    channels = []
    for i in range(1, n + 1):
        provider = HashEmbeddingProvider(f"m{i}", dimension=dimension)
        if seed_texts:
            store = build_store(provider.embed(list(seed_texts)),
                                list(seed_texts), model_id=f"m{i}", bin_size=8)
        else:
            store = BinnedVectorStore(f"m{i}", dimension, bin_size=8)
        channels.append(ModelChannel(provider=provider, store=store))
    return channels


class TestApplyFeedback:
    def test_causal_appends_to_every_store(self, tmp_path):
        channels = make_channels()
        bl = Blocklist(tmp_path / "b.jsonl")
        rec = record(qid=quad_id("x", "causes", "y"),
                     subject="x", trigger="causes", object="y")
        report = apply_feedback([rec], channels, bl)
        assert report.appended == 1
        assert report.blocklisted == 0
        for ch in channels:
            assert rec.quad_id in ch.store.active_ids()

    def test_non_causal_blocklists_and_removes(self, tmp_path):
        channels = make_channels(seed_texts=("alpha beta",))
        bl = Blocklist(tmp_path / "b.jsonl")
        rec = record(qid=quad_id("alpha", "", "beta"), verdict="non_causal",
                     subject="alpha", trigger="", object="beta")
        # phrase "alpha beta" embeds identically to the seeded store entry
        report = apply_feedback([rec], channels, bl, removal_threshold=0.999)
        assert report.blocklisted == 1
        assert report.removed_per_model == {"m1": 1, "m2": 1}
        assert len(bl) == 1
        for ch in channels:
            assert ch.store.count_active == 0

    def test_empty_records_no_op(self, tmp_path):
        channels = make_channels()
        report = apply_feedback([], channels, Blocklist(tmp_path / "b.jsonl"))
        assert report.appended == 0
        assert report.removed_per_model == {"m1": 0, "m2": 0}

    def test_missing_triple_text_rejected(self, tmp_path):
        channels = make_channels()
        with pytest.raises(ValueError):
            apply_feedback([record(qid="q-unknown")], channels,
                           Blocklist(tmp_path / "b.jsonl"))

    def test_embedding_failure_leaves_everything_untouched(self, tmp_path):
        class FailingProvider:
            model_id = "m2"
            dimension = 16

            def embed(self, texts):
                raise RuntimeError("service down")

        good = make_channels(n=1)[0]
        bad = ModelChannel(provider=FailingProvider(),
                           store=BinnedVectorStore("m2", 16))
        bl = Blocklist(tmp_path / "b.jsonl")
        before_active = good.store.count_active
        recs = [
            record(qid="q1", subject="a", trigger="b", object="c"),
            record(qid="q2", verdict="non_causal",
                   subject="d", trigger="e", object="f"),
        ]
        with pytest.raises(ClassificationIncompleteError):
            apply_feedback(recs, [good, bad], bl)
        assert good.store.count_active == before_active
        assert len(bl) == 0
        assert not (tmp_path / "b.jsonl").exists()

    def test_confidence_override_persisted_not_consumed(self, tmp_path):
        # the override travels with the record; applying feedback ignores it
        channels = make_channels()
        bl = Blocklist(tmp_path / "b.jsonl")
        rec = record(qid=quad_id("x", "y", "z"), subject="x", trigger="y",
                     object="z", confidence_override=0.42)
        report = apply_feedback([rec], channels, bl)
        assert report.appended == 1
        assert rec.to_json()["confidence_override"] == 0.42
