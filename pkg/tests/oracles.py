"""Independent brute-force reference implementations used by the tests.

Each oracle re-derives the expected result by direct enumeration of the
definitions, deliberately avoiding the library's own scan strategies, so
a shared bug cannot hide in both.
"""
import numpy as np

NOUNS = {"NN", "NNS", "NNP", "NNPS"}
ADJS = {"JJ", "JJR", "JJS"}


def oracle_noun_phrases(tokens):
    """All noun phrases by span enumeration: every (i, j) is tested for
    being a maximal noun run, then extended left over adjectives."""
    n = len(tokens)
    spans = []
    for i in range(n):
        for j in range(i, n):
            all_nouns = all(tokens[k].pos in NOUNS for k in range(i, j + 1))
            left_maximal = i == 0 or tokens[i - 1].pos not in NOUNS
            right_maximal = j == n - 1 or tokens[j + 1].pos not in NOUNS
            if all_nouns and left_maximal and right_maximal:
                spans.append((i, j))
    phrases = []
    for i, j in spans:
        non_stop_nouns = [k for k in range(i, j + 1) if not tokens[k].is_stopword]
        if not non_stop_nouns:
            continue
        head = tokens[max(non_stop_nouns)].lemma
        start = i
        while start - 1 >= 0 and tokens[start - 1].pos in ADJS:
            start -= 1
        words = [tokens[k].lemma for k in range(start, j + 1)
                 if not tokens[k].is_stopword]
        phrases.append({"text": " ".join(words), "head": head,
                        "start": start, "end": j})
    return phrases


def oracle_extract(sentence):
    """Expected (subject, trigger, object) triples: every ordered phrase
    pair, kept iff exactly one verb token lies strictly between them."""
    tokens = sentence.tokens
    phrases = oracle_noun_phrases(tokens)
    triples = []
    for a in range(len(phrases)):
        for b in range(a + 1, len(phrases)):
            subj, obj = phrases[a], phrases[b]
            verbs_between = [
                t for t in tokens
                if t.pos.startswith("VB") and subj["end"] < t.index < obj["start"]
            ]
            if len(verbs_between) == 1:
                triples.append((subj["text"], verbs_between[0].lemma, obj["text"]))
    return triples


def oracle_cosine(u, v):
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    return float(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)))


def oracle_remove_similar(entries, probes, threshold):
    """Which active entry ids a removal pass should deactivate: any entry
    whose cosine with ANY probe reaches the threshold.

    entries: list of (entry_id, vector, active) in insertion order.
    """
    removed = []
    for entry_id, vec, active in entries:
        if not active:
            continue
        v = np.asarray(vec, dtype=np.float64)
        if not np.linalg.norm(v) > 0.0:
            continue
        for probe in probes:
            if oracle_cosine(v, probe) >= threshold:
                removed.append(entry_id)
                break
    return removed


def oracle_confusion(predicted, gold, universe):
    tp = len(predicted & gold)
    fp = len(predicted - gold)
    fn = len(gold - predicted)
    tn = len(universe - predicted - gold)
    return tp, fp, fn, tn


def oracle_degree_histogram(model_sets, universe):
    """degree -> item count, by per-item counting over the union universe."""
    hist = {}
    for item in universe:
        d = sum(1 for s in model_sets.values() if item in s)
        hist[d] = hist.get(d, 0) + 1
    return {d: c for d, c in hist.items() if d > 0}
