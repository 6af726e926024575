"""Run orchestration: train stores, classify, enrich, evaluate, evolve.

A run lives in one directory and is reproducible from it alone:

    run_dir/
      run.json            state: stage, models, status, iteration, actioned
      config.json         frozen copy of the effective config
      stores/             one .vs + .vs.json per model
      train_quads.jsonl   phrases the stores were seeded with
      iter_000/           first classification iteration
        predictions.jsonl candidates.jsonl enriched.jsonl
        report.json report.csv degree_histogram.csv
      verdicts.jsonl      append-only expert feedback
      blocklist.jsonl     rejected phrases (+ blocklist_vecs/)

Stages differ in what seeds the stores and what the universe is:
sentence-level runs (stage1 trains on whole causal sentences, stage2 on
their trigger verbs) classify test sentences; triple-level runs (stage3
single model, stage4 ensemble, feedback = stage4 plus blocklist) train on
substitution-expanded quad phrases and classify extracted test triples.
Prediction files carry no timestamps or absolute paths, so byte-identical
reruns are expected.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .config import PipelineConfig, load_config, save_config
from .datasets import TaggedExample, parse_annotated_file, tag_annotated
from .embed import make_provider
from .enrich import ConceptCache, HttpConceptProvider, LocalConceptProvider, enrich_quads
from .ensemble import EnsembleClassifier, ModelChannel
from .errors import ConfigError, NotFoundError, StageOrderError
from .evaluate import (
    degree_report,
    evaluate_sets,
    gold_sentence_ids,
    gold_triple_ids,
    write_histogram_csv,
    write_report_csv,
    write_report_json,
)
from .expand import SynonymLexicon, build_expanded_set, dedupe_quads, load_word_vectors
from .extract import Quad, extract_corpus, extract_training_quads, quad_id
from .feedback import Blocklist, apply_feedback, effective_verdicts, load_verdicts
from .preprocess import (
    HeuristicTagger,
    HttpTagger,
    PretaggedTagger,
    default_lemma_lexicon,
    default_stopwords,
)
from .store import BinnedVectorStore

STAGES = ("stage1", "stage2", "stage3", "stage4", "feedback")
SENTENCE_STAGES = ("stage1", "stage2")
TRIPLE_STAGES = ("stage3", "stage4", "feedback")

# Forward-only run phases; "evolved" may loop back to "classifying".
STATUSES = ("training", "classifying", "awaiting_review", "evolved", "failed")


@dataclass
class RunState:
    run_id: str
    stage: str
    dataset: str
    model_ids: list[str]
    status: str = "training"
    created_at: str = ""
    iteration: int = 0                      # completed iterations
    actioned: dict[str, str] = field(default_factory=dict)  # quad_id -> verdict

    def to_json(self) -> dict:
        return {
            "run_id": self.run_id,
            "stage": self.stage,
            "dataset": self.dataset,
            "model_ids": self.model_ids,
            "status": self.status,
            "created_at": self.created_at,
            "iteration": self.iteration,
            "actioned": self.actioned,
        }

    @classmethod
    def from_json(cls, row: dict) -> "RunState":
        return cls(
            run_id=row["run_id"],
            stage=row["stage"],
            dataset=row["dataset"],
            model_ids=list(row["model_ids"]),
            status=row.get("status", "awaiting_review"),
            created_at=row.get("created_at", ""),
            iteration=int(row.get("iteration", 0)),
            actioned=dict(row.get("actioned", {})),
        )


def _state_path(run_dir: Path) -> Path:
    return run_dir / "run.json"


def load_state(run_dir: str | Path) -> RunState:
    path = _state_path(Path(run_dir))
    if not path.exists():
        raise StageOrderError(f"no trained run at {run_dir}; run train first", "train")
    with open(path, encoding="utf-8") as fh:
        return RunState.from_json(json.load(fh))


def save_state(run_dir: str | Path, state: RunState) -> None:
    with open(_state_path(Path(run_dir)), "w", encoding="utf-8") as fh:
        json.dump(state.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def iter_dir(run_dir: str | Path, iteration: int) -> Path:
    return Path(run_dir) / f"iter_{iteration:03d}"


def build_tagger(cfg: PipelineConfig):
    if cfg.tagger.kind == "heuristic":
        return HeuristicTagger()
    if cfg.tagger.kind == "http":
        return HttpTagger(cfg.tagger.base_url, timeout=cfg.tagger.timeout,
                          retries=cfg.tagger.retries)
    return PretaggedTagger()


def build_concept_provider(cfg: PipelineConfig):
    if cfg.concepts.kind == "local":
        return LocalConceptProvider(cfg.concepts.path)
    if cfg.concepts.kind == "http":
        return HttpConceptProvider(cfg.concepts.base_url, timeout=cfg.concepts.timeout,
                                   retries=cfg.concepts.retries)
    return None


def _model_entries(cfg: PipelineConfig, model_ids: list[str] | None) -> list[dict]:
    entries = cfg.models
    if model_ids:
        by_id = {e["model_id"]: e for e in entries}
        missing = [m for m in model_ids if m not in by_id]
        if missing:
            raise ConfigError(f"models not in config: {missing}")
        entries = [by_id[m] for m in model_ids]
    if not entries:
        raise ConfigError("no embedding models configured")
    return entries


def _load_examples(dataset_dir: str | Path, split: str, cfg: PipelineConfig) -> list[TaggedExample]:
    path = Path(dataset_dir) / f"{split}.txt"
    if not path.exists():
        raise NotFoundError(f"dataset split missing: {path}")
    examples = parse_annotated_file(path)
    tagger = build_tagger(cfg)
    return tag_annotated(
        examples, tagger,
        lemma_lexicon=default_lemma_lexicon(),
        stopword_list=default_stopwords(),
        doc_id=split,
    )


@dataclass(frozen=True)
class TrainPhrase:
    text: str
    confidence: float
    provenance: str
    subject: str = ""
    trigger: str = ""
    object: str = ""

    @property
    def entry_id(self) -> str:
        if self.subject or self.object:
            return quad_id(self.subject, self.trigger, self.object)
        return self.text


def _phrase_text(q: Quad) -> str:
    parts = [p for p in (q.subject, q.trigger, q.object) if p]
    return " ".join(parts)


def _training_phrases(cfg: PipelineConfig, stage: str,
                      train_examples: list[TaggedExample]) -> list[TrainPhrase]:
    """What seeds the stores: sentences, verbs, or expanded quad phrases."""
    causal = [ex for ex in train_examples if ex.annotation.is_causal]
    if stage == "stage1":
        return [
            TrainPhrase(text=ex.sentence.normalized_text, confidence=1.0,
                        provenance="sentence")
            for ex in causal
        ]
    quads = [q for ex in causal for q in extract_training_quads(ex)]
    if stage == "stage2":
        verbs = sorted({q.trigger for q in quads})
        return [TrainPhrase(text=v, confidence=1.0, provenance="verb", trigger=v)
                for v in verbs]
    vectors = None
    synonyms = None
    if cfg.expansion.vectors_path:
        vectors = load_word_vectors(cfg.expansion.vectors_path)
    if cfg.expansion.synonyms_path:
        synonyms = SynonymLexicon.from_tsv(cfg.expansion.synonyms_path)
    if vectors is None and synonyms is None:
        quads = dedupe_quads(quads)
    else:
        quads = build_expanded_set(
            quads, vectors, synonyms,
            k=cfg.expansion.top_k,
            min_similarity=cfg.expansion.min_similarity,
            min_confidence=cfg.expansion.min_confidence,
        )
    return [
        TrainPhrase(text=_phrase_text(q), confidence=q.confidence,
                    provenance=q.provenance, subject=q.subject,
                    trigger=q.trigger, object=q.object)
        for q in quads
    ]


def train(config_path: str | Path | None, dataset_dir: str | Path,
          run_dir: str | Path, stage: str,
          model_ids: list[str] | None = None) -> RunState:
    """Seed per-model stores from the train split and freeze the run config."""
    if stage not in STAGES:
        raise ConfigError(f"stage must be one of {STAGES}, got {stage!r}")
    cfg = load_config(config_path)
    entries = _model_entries(cfg, model_ids)
    if stage in SENTENCE_STAGES or stage == "stage3":
        if len(entries) != 1:
            raise ConfigError(f"{stage} runs on exactly one model, got {len(entries)}")
    else:
        if len(entries) < cfg.classify.min_degree:
            raise ConfigError(
                f"{stage} needs at least {cfg.classify.min_degree} models, got {len(entries)}"
            )
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    stores_dir = run_dir / "stores"
    stores_dir.mkdir(exist_ok=True)

    train_examples = _load_examples(dataset_dir, "train", cfg)
    phrases = _training_phrases(cfg, stage, train_examples)
    texts = [p.text for p in phrases]

    with open(run_dir / "train_quads.jsonl", "w", encoding="utf-8") as fh:
        for p in phrases:
            row = {
                "entry_id": p.entry_id,
                "text": p.text,
                "subject": p.subject,
                "trigger": p.trigger,
                "object": p.object,
                "confidence": p.confidence,
                "provenance": p.provenance,
            }
            fh.write(json.dumps(row, sort_keys=True) + "\n")

    entry_ids = [p.entry_id for p in phrases]
    for entry in entries:
        provider = make_provider(entry)
        store = BinnedVectorStore(provider.model_id, provider.dimension,
                                  bin_size=cfg.store.bin_size)
        if texts:
            store.append_many(provider.embed(texts), entry_ids)
        store.save(stores_dir)

    # The frozen copy narrows models to the ones actually trained.
    cfg.models = entries
    save_config(cfg, run_dir / "config.json")
    state = RunState(
        run_id=run_dir.name,
        stage=stage,
        dataset=str(dataset_dir),
        model_ids=[e["model_id"] for e in entries],
        status="classifying",
        created_at=datetime.now(timezone.utc).isoformat(),
        iteration=0,
    )
    save_state(run_dir, state)
    return state


def _load_channels(cfg: PipelineConfig, run_dir: Path, model_ids: list[str]) -> list[ModelChannel]:
    channels = []
    by_id = {e["model_id"]: e for e in cfg.models}
    for mid in model_ids:
        provider = make_provider(by_id[mid])
        store = BinnedVectorStore.load(run_dir / "stores", mid)
        channels.append(ModelChannel(provider=provider, store=store))
    return channels


@dataclass(frozen=True)
class TestItem:
    item_id: str
    text: str
    subject: str = ""
    trigger: str = ""
    object: str = ""
    sentences: tuple[str, ...] = ()
    sentence_texts: tuple[str, ...] = ()


def _test_items(stage: str, test_examples: list[TaggedExample]) -> tuple[list[TestItem], set[str]]:
    """Universe items plus gold ids for the stage's granularity."""
    if stage in SENTENCE_STAGES:
        items = [
            TestItem(item_id=ex.sentence.sentence_id, text=ex.sentence.normalized_text)
            for ex in test_examples
        ]
        return items, gold_sentence_ids(test_examples)
    quads = extract_corpus([ex.sentence for ex in test_examples])
    causal_ids = gold_sentence_ids(test_examples)
    gold = gold_triple_ids(quads, causal_ids)
    raw_by_id = {ex.sentence.sentence_id: ex.sentence.raw_text for ex in test_examples}
    order: list[str] = []
    meta: dict[str, dict] = {}
    for q in quads:
        qid = quad_id(*q.triple())
        if qid not in meta:
            order.append(qid)
            meta[qid] = {"quad": q, "sentences": []}
        if q.sentence_id not in meta[qid]["sentences"]:
            meta[qid]["sentences"].append(q.sentence_id)
    items = []
    for qid in order:
        q = meta[qid]["quad"]
        sids = meta[qid]["sentences"]
        items.append(
            TestItem(
                item_id=qid,
                text=_phrase_text(q),
                subject=q.subject,
                trigger=q.trigger,
                object=q.object,
                sentences=tuple(sids),
                sentence_texts=tuple(raw_by_id[s] for s in sids),
            )
        )
    return items, gold


def _classify(run_dir: Path, state: RunState, cfg: PipelineConfig) -> Path:
    channels = _load_channels(cfg, run_dir, state.model_ids)
    min_degree = cfg.classify.min_degree if state.stage in ("stage4", "feedback") else 1
    classifier = EnsembleClassifier(channels, cfg.classify.flag_threshold, min_degree)

    test_examples = _load_examples(state.dataset, "test", cfg)
    items, gold = _test_items(state.stage, test_examples)
    texts = [it.text for it in items]
    results = classifier.classify_many(texts)

    blocked = [False] * len(items)
    if state.stage == "feedback":
        blocklist = Blocklist(run_dir / "blocklist.jsonl")
        providers = [ch.provider for ch in channels]
        blocked = blocklist.blocked_mask(texts, providers)

    out_dir = iter_dir(run_dir, state.iteration)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "predictions.jsonl", "w", encoding="utf-8") as fh:
        for item, result, is_blocked in zip(items, results, blocked):
            row = {
                "item_id": item.item_id,
                "kind": "sentence" if state.stage in SENTENCE_STAGES else "triple",
                "text": item.text,
                "degree": result.degree,
                "causal": bool(result.causal and not is_blocked),
                "blocked": bool(is_blocked),
                "confidence": result.confidence,
                "per_model": [
                    {"model_id": v.model_id, "flagged": v.flagged, "score": v.best_score}
                    for v in result.verdicts
                ],
            }
            if item.subject or item.object:
                row["quad_id"] = item.item_id
                row["subject"] = item.subject
                row["trigger"] = item.trigger
                row["object"] = item.object
                row["sentences"] = list(item.sentences)
                row["sentence_texts"] = list(item.sentence_texts)
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    # Freeze the gold labels with the predictions so evaluation never has
    # to re-extract from the dataset (the run dir stays self-contained).
    with open(out_dir / "gold.json", "w", encoding="utf-8") as fh:
        json.dump({"gold_ids": sorted(gold)}, fh, indent=2)
        fh.write("\n")
    _write_candidates(out_dir)
    return out_dir


def classify(run_dir: str | Path) -> Path:
    """Run one classification pass over the test split into the current
    iteration directory; re-running overwrites it deterministically."""
    run_dir = Path(run_dir)
    state = load_state(run_dir)
    cfg = load_config(run_dir / "config.json")
    out_dir = _classify(run_dir, state, cfg)
    state.status = "awaiting_review"
    save_state(run_dir, state)
    return out_dir


def _read_jsonl(path: Path) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    return rows


def _write_candidates(out_dir: Path) -> None:
    """Pending-review rows: the predicted-causal triples of this iteration.

    When an enrichment pass has produced enriched.jsonl, candidates carry
    concept annotations and shrink to the grounded subset.
    """
    rows = _read_jsonl(out_dir / "predictions.jsonl")
    enriched_path = out_dir / "enriched.jsonl"
    enriched_by_id: dict[str, dict] | None = None
    if enriched_path.exists():
        enriched_by_id = {r["item_id"]: r for r in _read_jsonl(enriched_path)}
    with open(out_dir / "candidates.jsonl", "w", encoding="utf-8") as fh:
        for row in rows:
            if row["kind"] != "triple" or not row["causal"]:
                continue
            if enriched_by_id is not None and row["item_id"] not in enriched_by_id:
                continue
            candidate = {
                "quad_id": row["item_id"],
                "subject": row["subject"],
                "trigger": row["trigger"],
                "object": row["object"],
                "text": row["text"],
                "sentences": row["sentences"],
                "sentence_texts": row["sentence_texts"],
                "degree": row["degree"],
                "confidence": row["confidence"],
                "per_model": row["per_model"],
                "status": "pending",
            }
            if enriched_by_id is not None:
                e = enriched_by_id[row["item_id"]]
                candidate["subject_concepts"] = e["subject_concepts"]
                candidate["object_concepts"] = e["object_concepts"]
            fh.write(json.dumps(candidate, sort_keys=True) + "\n")


def _enrich(run_dir: Path, state: RunState, cfg: PipelineConfig) -> Path:
    provider = build_concept_provider(cfg)
    if provider is None:
        raise ConfigError("no concept provider configured (concepts.kind is null)")
    out_dir = iter_dir(run_dir, state.iteration)
    pred_path = out_dir / "predictions.jsonl"
    if not pred_path.exists():
        raise StageOrderError("enrich needs a classified iteration; run classify first",
                              "classify")
    rows = [r for r in _read_jsonl(pred_path) if r["kind"] == "triple" and r["causal"]]
    quads = [
        Quad(subject=r["subject"], trigger=r["trigger"], object=r["object"],
             confidence=r["confidence"] or 0.0,
             sentence_id=r["sentences"][0] if r.get("sentences") else "")
        for r in rows
    ]
    cache = ConceptCache(provider)
    enriched = enrich_quads(quads, provider, cache)
    kept = {quad_id(*e.quad.triple()): e for e in enriched}
    with open(out_dir / "enriched.jsonl", "w", encoding="utf-8") as fh:
        for row in rows:
            e = kept.get(row["item_id"])
            if e is None:
                continue
            fh.write(json.dumps({
                "item_id": row["item_id"],
                "subject": row["subject"],
                "trigger": row["trigger"],
                "object": row["object"],
                "subject_concepts": [
                    {"cui": c.cui, "name": c.name, "semtypes": list(c.semtypes)}
                    for c in e.subject_concepts
                ],
                "object_concepts": [
                    {"cui": c.cui, "name": c.name, "semtypes": list(c.semtypes)}
                    for c in e.object_concepts
                ],
                "subject_match": e.subject_match,
                "object_match": e.object_match,
            }, sort_keys=True) + "\n")
    _write_candidates(out_dir)
    return out_dir / "enriched.jsonl"


def enrich(run_dir: str | Path) -> Path:
    """Ground this iteration's causal predictions in the concept vocabulary."""
    run_dir = Path(run_dir)
    state = load_state(run_dir)
    cfg = load_config(run_dir / "config.json")
    return _enrich(run_dir, state, cfg)


def _evaluate(run_dir: Path, state: RunState, cfg: PipelineConfig) -> dict:
    out_dir = iter_dir(run_dir, state.iteration)
    pred_path = out_dir / "predictions.jsonl"
    if not pred_path.exists():
        raise StageOrderError("evaluate needs a classified iteration; run classify first",
                              "classify")
    rows = _read_jsonl(pred_path)

    with open(out_dir / "gold.json", encoding="utf-8") as fh:
        gold = set(json.load(fh)["gold_ids"])
    universe = {r["item_id"] for r in rows}
    predicted = {r["item_id"] for r in rows if r["causal"]}
    enriched_path = out_dir / "enriched.jsonl"
    if enriched_path.exists():
        predicted &= {r["item_id"] for r in _read_jsonl(enriched_path)}

    eval_rows = [evaluate_sets("overall", predicted, gold, universe)]
    dataset_name = Path(state.dataset).name
    payload: dict = {
        "run_id": state.run_id,
        "dataset": dataset_name,
        "stage": state.stage,
        "iteration": state.iteration,
        "universe": {
            "kind": "sentences" if state.stage in SENTENCE_STAGES else "triples",
            "size": len(universe),
        },
        "gold_size": len(gold),
        "rows": [],
    }

    if state.stage in ("stage4", "feedback"):
        flagged_by_model: dict[str, set[str]] = {m: set() for m in state.model_ids}
        for r in rows:
            for v in r["per_model"]:
                if v["flagged"]:
                    flagged_by_model[v["model_id"]].add(r["item_id"])
        for mid in state.model_ids:
            eval_rows.append(evaluate_sets(f"model:{mid}", flagged_by_model[mid], gold, universe))
        dreport = degree_report(flagged_by_model, gold, split_at=cfg.classify.min_degree)
        payload["degree"] = {
            "histogram": {str(k): v for k, v in dreport.histogram.items()},
            "gold_per_degree": {str(k): v for k, v in dreport.gold_per_degree.items()},
            "universe_size": dreport.universe_size,
            "gold_in_universe": dreport.gold_in_universe,
            "groups": [g.row.to_json() for g in dreport.groups],
        }
        eval_rows.extend(g.row for g in dreport.groups)
        write_histogram_csv(out_dir / "degree_histogram.csv", dreport.histogram,
                            dreport.gold_per_degree)

    payload["rows"] = [r.to_json() for r in eval_rows]
    write_report_json(out_dir / "report.json", payload)
    write_report_csv(out_dir / "report.csv", eval_rows, dataset_name, state.stage)
    return payload


def evaluate(run_dir: str | Path) -> dict:
    """Score the current iteration and write report.json/.csv alongside it."""
    run_dir = Path(run_dir)
    state = load_state(run_dir)
    cfg = load_config(run_dir / "config.json")
    return _evaluate(run_dir, state, cfg)


def run_stage(config_path: str | Path | None, dataset_dir: str | Path,
              run_dir: str | Path, stage: str,
              model_ids: list[str] | None = None,
              with_enrich: bool | None = None) -> dict:
    """Train, classify, optionally enrich, and evaluate in one call."""
    train(config_path, dataset_dir, run_dir, stage, model_ids)
    classify(run_dir)
    cfg = load_config(Path(run_dir) / "config.json")
    state = load_state(run_dir)
    if with_enrich is None:
        with_enrich = cfg.concepts.kind is not None
    if with_enrich:
        _enrich(Path(run_dir), state, cfg)
    return _evaluate(Path(run_dir), state, cfg)


def _resolve_triples(run_dir: Path, state: RunState, records: list) -> list:
    """Fill missing triple text on verdicts from the run's predictions.

    The triple universe is fixed per run, so any iteration's predictions
    can resolve a quad id; verdicts on unknown quads are an error.
    """
    needed = [rec for rec in records if not rec.phrase]
    if not needed:
        return records
    by_qid: dict[str, dict] = {}
    for n in range(state.iteration + 1):
        pred_path = iter_dir(run_dir, n) / "predictions.jsonl"
        if pred_path.exists():
            for row in _read_jsonl(pred_path):
                if row["kind"] == "triple":
                    by_qid[row["item_id"]] = row
    resolved = []
    from dataclasses import replace
    for rec in records:
        if rec.phrase:
            resolved.append(rec)
            continue
        row = by_qid.get(rec.quad_id)
        if row is None:
            raise NotFoundError(f"verdict references unknown quad {rec.quad_id!r}")
        resolved.append(replace(rec, subject=row["subject"], trigger=row["trigger"],
                                object=row["object"]))
    return resolved


def evolve(run_dir: str | Path) -> dict:
    """Fold new expert verdicts into the stores, then re-run an iteration.

    Only verdicts that are new or changed since the last evolve are
    applied (latest per quad wins). The iteration count moves exactly once
    per successful call: state is persisted after the new iteration's
    report exists, never before.
    """
    run_dir = Path(run_dir)
    state = load_state(run_dir)
    cfg = load_config(run_dir / "config.json")
    records = load_verdicts(run_dir / "verdicts.jsonl")
    effective = effective_verdicts(records)
    to_apply = [
        rec for qid, rec in sorted(effective.items())
        if state.actioned.get(qid) != rec.verdict
    ]
    to_apply = _resolve_triples(run_dir, state, to_apply)
    channels = _load_channels(cfg, run_dir, state.model_ids)
    blocklist = Blocklist(run_dir / "blocklist.jsonl")
    report = apply_feedback(
        to_apply, channels, blocklist,
        removal_threshold=cfg.classify.flag_threshold,
    )
    for ch in channels:
        ch.store.save(run_dir / "stores")
    for rec in to_apply:
        state.actioned[rec.quad_id] = rec.verdict
    state.iteration += 1
    state.status = "evolved"

    _classify(run_dir, state, cfg)
    if cfg.concepts.kind is not None:
        _enrich(run_dir, state, cfg)
    payload = _evaluate(run_dir, state, cfg)
    state.status = "awaiting_review"
    save_state(run_dir, state)
    payload["evolution"] = {
        "appended": report.appended,
        "blocklisted": report.blocklisted,
        "removed_per_model": report.removed_per_model,
    }
    return payload
