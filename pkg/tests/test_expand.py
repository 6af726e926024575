import numpy as np
import pytest

from causemine.expand import (
    SynonymLexicon,
    build_expanded_set,
    dedupe_quads,
    expand_quad,
    filter_quads,
    load_word_vectors,
    top_k_similar,
)
from causemine.extract import Quad


def quad(s, t, o, conf=1.0, prov="extracted"):
    return Quad(subject=s, trigger=t, object=o, confidence=conf,
                sentence_id="s1", provenance=prov)


# unit circle vectors: angle controls cosine to "cause" exactly
def on_circle(deg):
    rad = np.deg2rad(deg)
    return np.array([np.cos(rad), np.sin(rad)])


VECTORS = {
    "cause": on_circle(0),
    "induce": on_circle(10),      # cos ~ 0.985
    "trigger": on_circle(20),     # cos ~ 0.940
    "provoke": on_circle(30),     # cos ~ 0.866
    "prevent": on_circle(120),    # cos = -0.5
}


class TestTopKSimilar:
    def test_orders_by_score_descending(self):
        got = top_k_similar("cause", VECTORS, k=10, min_similarity=0.5)
        assert [t for t, _ in got] == ["induce", "trigger", "provoke"]
        scores = [s for _, s in got]
        assert scores == sorted(scores, reverse=True)

    def test_term_itself_excluded(self):
        got = top_k_similar("cause", VECTORS, k=10, min_similarity=-1.0)
        assert "cause" not in [t for t, _ in got]

    def test_min_similarity_is_inclusive(self):
        table = {"a": on_circle(0), "b": on_circle(60)}  # cos = 0.5 exactly
        got = top_k_similar("a", table, k=5, min_similarity=0.5)
        assert [t for t, _ in got] == ["b"]

    def test_k_truncates(self):
        got = top_k_similar("cause", VECTORS, k=2, min_similarity=0.5)
        assert [t for t, _ in got] == ["induce", "trigger"]

    def test_rank_k_tie_breaks_lexicographically(self):
        table = {
            "base": on_circle(0),
            "zeta": on_circle(15),
            "alpha": on_circle(15),
            "mid": on_circle(25),
        }
        got = top_k_similar("base", table, k=1, min_similarity=0.5)
        assert [t for t, _ in got] == ["alpha"]

    def test_unknown_term_expands_to_nothing(self):
        assert top_k_similar("mystery", VECTORS) == []

    def test_case_insensitive_term(self):
        got = top_k_similar("CAUSE", VECTORS, k=1)
        assert got and got[0][0] == "induce"


class TestExpandQuad:
    def test_identity_always_present_with_source_provenance(self):
        q = quad("smoking", "cause", "cancer", conf=0.8)
        out = expand_quad(q, vectors=None, synonyms=None)
        assert len(out) == 1
        only = out[0]
        assert only.triple() == ("smoking", "cause", "cancer")
        assert only.confidence == pytest.approx(0.8)
        assert only.provenance == "extracted"

    def test_vector_substitution_multiplies_confidence(self):
        q = quad("smoking", "cause", "cancer", conf=0.9)
        out = expand_quad(q, vectors=VECTORS, synonyms=None,
                          k=1, min_similarity=0.9)
        # trigger slot expands to "induce"; subject and object are unknown
        by_trigger = {c.trigger: c for c in out}
        assert set(by_trigger) == {"cause", "induce"}
        induced = by_trigger["induce"]
        assert induced.provenance == "expanded"
        expected = 0.9 * float(np.cos(np.deg2rad(10)))
        assert induced.confidence == pytest.approx(expected)

    def test_synonym_substitution_inherits_confidence(self):
        syn = SynonymLexicon({"cancer": ["carcinoma"]})
        q = quad("smoking", "cause", "cancer", conf=0.7)
        out = expand_quad(q, vectors=None, synonyms=syn)
        by_obj = {c.object: c for c in out}
        assert by_obj["carcinoma"].confidence == pytest.approx(0.7)
        assert by_obj["carcinoma"].provenance == "synonym"

    def test_head_substitution_keeps_modifiers(self):
        syn = SynonymLexicon({"cancer": ["carcinoma"]})
        q = quad("heavy smoking", "cause", "lung cancer")
        out = expand_quad(q, vectors=None, synonyms=syn)
        objects = {c.object for c in out}
        assert "lung carcinoma" in objects
        assert all(c.subject == "heavy smoking" for c in out)

    def test_cartesian_product_of_slots(self):
        syn = SynonymLexicon({
            "smoking": ["tobacco"],
            "cause": ["produce"],
            "cancer": ["carcinoma"],
        })
        out = expand_quad(quad("smoking", "cause", "cancer"),
                          vectors=None, synonyms=syn)
        assert len(out) == 8
        assert len({c.triple() for c in out}) == 8

    def test_mixed_origins_label_expanded(self):
        syn = SynonymLexicon({"cancer": ["carcinoma"]})
        out = expand_quad(quad("smoking", "cause", "cancer"),
                          vectors=VECTORS, synonyms=syn, k=1, min_similarity=0.9)
        mixed = [c for c in out
                 if c.trigger == "induce" and c.object == "carcinoma"]
        assert mixed and all(c.provenance == "expanded" for c in mixed)


class TestDedupeAndFilter:
    def test_dedupe_keeps_max_confidence_first_seen_order(self):
        qs = [
            quad("a", "b", "c", conf=0.6),
            quad("x", "y", "z", conf=0.9),
            quad("a", "b", "c", conf=0.8),
        ]
        out = dedupe_quads(qs)
        assert [q.triple() for q in out] == [("a", "b", "c"), ("x", "y", "z")]
        assert out[0].confidence == pytest.approx(0.8)

    def test_filter_threshold_inclusive(self):
        qs = [quad("a", "b", "c", conf=0.5), quad("d", "e", "f", conf=0.4999)]
        out = filter_quads(qs, min_confidence=0.5)
        assert [q.triple() for q in out] == [("a", "b", "c")]

    def test_build_expanded_set_pipeline(self):
        syn = SynonymLexicon({"cause": ["produce"]})
        qs = [quad("a", "cause", "b", conf=0.6),
              quad("a", "cause", "b", conf=0.9)]
        out = build_expanded_set(qs, vectors=None, synonyms=syn,
                                 min_confidence=0.5)
        triples = [q.triple() for q in out]
        assert triples == [("a", "cause", "b"), ("a", "produce", "b")]
        assert out[0].confidence == pytest.approx(0.9)
        assert out[1].confidence == pytest.approx(0.9)

    def test_low_confidence_expansions_dropped(self):
        vectors = {"cause": on_circle(0), "relate": on_circle(55)}  # cos ~ 0.574
        q = quad("a", "cause", "b", conf=0.8)
        out = build_expanded_set([q], vectors=vectors, synonyms=None,
                                 k=5, min_similarity=0.5, min_confidence=0.5)
        # 0.8 * 0.574 = 0.459 < 0.5: the substitution is expanded then filtered
        assert [x.triple() for x in out] == [("a", "cause", "b")]


class TestSynonymLexicon:
    def test_directed_and_lowercased(self):
        syn = SynonymLexicon()
        syn.add("Cancer", "Carcinoma")
        assert syn.synonyms("cancer") == ["carcinoma"]
        assert syn.synonyms("carcinoma") == []

    def test_from_tsv(self, tmp_path):
        p = tmp_path / "syn.tsv"
        p.write_text("cancer\tcarcinoma|neoplasm\n# comment\ncause\tproduce\n",
                     encoding="utf-8")
        syn = SynonymLexicon.from_tsv(p)
        assert syn.synonyms("cancer") == ["carcinoma", "neoplasm"]
        assert syn.synonyms("cause") == ["produce"]


class TestLoadWordVectors:
    def test_reads_word2vec_text(self, tmp_path):
        p = tmp_path / "vv.txt"
        p.write_text("2 3\ncause 1 0 0\nINDUCE 0 1 0\n", encoding="utf-8")
        table = load_word_vectors(p)
        assert set(table) == {"cause", "induce"}
        assert table["cause"].tolist() == [1.0, 0.0, 0.0]
