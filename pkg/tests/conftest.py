import json

import pytest

from causemine.preprocess import TaggedSentence, Token

TRAIN_ANNOTATED = '''1\t"The <e1>infection</e1> caused severe <e2>inflammation</e2> in the lung."
Cause-Effect(e1,e2)
Comment:

2\t"Chronic <e1>stress</e1> induces <e2>hypertension</e2> in adults."
Cause-Effect(e1,e2)
Comment:

3\t"The <e1>patient</e1> visited the <e2>clinic</e2> on Monday."
Other
Comment:

4\t"<e1>Smoking</e1> causes <e2>cancer</e2> in many patients."
Cause-Effect(e1,e2)
Comment:

5\t"A <e1>virus</e1> triggers the <e2>fever</e2> quickly."
Cause-Effect(e1,e2)
Comment:
'''

TEST_ANNOTATED = '''101\t"The <e1>infection</e1> caused severe <e2>inflammation</e2> again."
Cause-Effect(e1,e2)
Comment:

102\t"Heavy <e1>smoking</e1> causes <e2>cancer</e2> in adults."
Cause-Effect(e1,e2)
Comment:

103\t"The <e1>doctor</e1> reviewed the <e2>chart</e2> slowly."
Other
Comment:

104\t"The <e1>virus</e1> triggers a <e2>fever</e2> within days."
Cause-Effect(e1,e2)
Comment:

105\t"<e1>Stress</e1> induces <e2>hypertension</e2> sometimes."
Cause-Effect(e1,e2)
Comment:
'''

CONCEPTS_TSV = "\n".join([
    "infection\tC0009450\tInfection\tdsyn",
    "inflammation\tC0021368\tInflammation\tpatf",
    "smoking\tC0037369\tSmoking\tinbe",
    "cancer\tC0006826\tMalignant Neoplasm\tneop",
    "virus\tC0042776\tVirus\tvirs",
    "fever\tC0015967\tFever\tsosy",
    "stress\tC0038435\tStress\tmobd",
    "hypertension\tC0020538\tHypertension\tdsyn",
]) + "\n"


def make_sentence(pairs, sentence_id="s1", stopwords=frozenset()):
    """TaggedSentence from (surface, tag) pairs; lemma = lowercased surface."""
    tokens = tuple(
        Token(surface=s, lemma=s.lower(), pos=t, index=i,
              is_stopword=s.lower() in stopwords)
        for i, (s, t) in enumerate(pairs)
    )
    text = " ".join(s for s, _ in pairs)
    return TaggedSentence(sentence_id=sentence_id, doc_id="doc",
                          raw_text=text, normalized_text=text, tokens=tokens)


@pytest.fixture
def dataset_dir(tmp_path):
    d = tmp_path / "data"
    d.mkdir()
    (d / "train.txt").write_text(TRAIN_ANNOTATED, encoding="utf-8")
    (d / "test.txt").write_text(TEST_ANNOTATED, encoding="utf-8")
    (d / "concepts.tsv").write_text(CONCEPTS_TSV, encoding="utf-8")
    return d


def hash_models(n, dimension=32):
    return [{"model_id": f"hash{i}", "kind": "hash", "dimension": dimension}
            for i in range(1, n + 1)]


@pytest.fixture
def config_path(tmp_path, dataset_dir):
    cfg = {
        "models": hash_models(4),
        "classify": {"flag_threshold": 0.70, "min_degree": 4},
        "concepts": {"kind": "local", "path": str(dataset_dir / "concepts.tsv")},
        "tagger": {"kind": "heuristic"},
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg), encoding="utf-8")
    return path


@pytest.fixture
def single_model_config_path(tmp_path, dataset_dir):
    cfg = {
        "models": hash_models(1),
        "classify": {"flag_threshold": 0.70, "min_degree": 4},
        "tagger": {"kind": "heuristic"},
    }
    path = tmp_path / "config1.json"
    path.write_text(json.dumps(cfg), encoding="utf-8")
    return path
