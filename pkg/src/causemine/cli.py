"""Command line entry points for the mining pipeline."""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import pipeline
from .config import load_config
from .datasets import (
    load_jsonl_documents,
    load_plain_documents,
    load_pretagged_document,
    parse_annotated_file,
    tag_annotated,
)
from .errors import CauseMineError
from .extract import extract_corpus, quad_id
from .preprocess import default_lemma_lexicon, default_stopwords, preprocess_document


# CLI stage flags are short; internal stage names are explicit.
STAGE_BY_FLAG = {
    "1": "stage1",
    "2": "stage2",
    "3": "stage3",
    "4": "stage4",
    "feedback": "feedback",
}


def _fail_on_error(stage_name: str):
    """Exit nonzero with an error that names the failing pipeline stage."""
    def decorate(fn):
        def wrapper(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except CauseMineError as exc:
                raise click.ClickException(f"[{stage_name}] {exc}") from exc
        wrapper.__name__ = fn.__name__
        wrapper.__doc__ = fn.__doc__
        return wrapper
    return decorate


@click.group()
def main() -> None:
    """Causality mining over clinical text: train, classify, review, evolve."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="JSON config; defaults apply when omitted.")
@click.option("--dataset", required=True, type=click.Path(exists=True),
              help="Dataset directory holding train.txt and test.txt.")
@click.option("--run-dir", required=True, type=click.Path(),
              help="Run directory to create or reuse.")
@click.option("--stage", required=True,
              type=click.Choice(list(STAGE_BY_FLAG)),
              help="1/2/3/4 for the single-model and ensemble stages, or feedback.")
@click.option("--models", default=None,
              help="Comma-separated model ids; defaults to every configured model.")
@_fail_on_error("train")
def train(config_path, dataset, run_dir, stage, models) -> None:
    """Seed the per-model vector stores from the train split."""
    model_ids = [m.strip() for m in models.split(",") if m.strip()] if models else None
    state = pipeline.train(config_path, dataset, run_dir, STAGE_BY_FLAG[stage], model_ids)
    click.echo(f"trained {state.run_id}: stage={state.stage} models={','.join(state.model_ids)}")


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--format", "input_format", default="annotated",
              type=click.Choice(["annotated", "plain", "jsonl", "pretagged"]))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--output", type=click.Path(), default="-",
              help="Output JSONL path; - for stdout.")
@_fail_on_error("extract")
def extract(input_path, input_format, config_path, output) -> None:
    """Extract candidate quads from a corpus file to JSONL."""
    cfg = load_config(config_path)
    tagger = pipeline.build_tagger(cfg)
    lemmas = default_lemma_lexicon()
    stopwords = default_stopwords()
    if input_format == "annotated":
        examples = tag_annotated(parse_annotated_file(input_path), tagger,
                                 lemma_lexicon=lemmas, stopword_list=stopwords)
        sentences = [ex.sentence for ex in examples]
    else:
        if input_format == "plain":
            docs = load_plain_documents(input_path)
        elif input_format == "jsonl":
            docs = load_jsonl_documents(input_path)
        else:
            docs = [load_pretagged_document(input_path)]
        sentences = []
        for doc in docs:
            sentences.extend(
                preprocess_document(doc, tagger, lemma_lexicon=lemmas,
                                    stopword_list=stopwords)
            )
    quads = extract_corpus(sentences)
    out = sys.stdout if output == "-" else open(output, "w", encoding="utf-8")
    try:
        for q in quads:
            out.write(json.dumps({
                "quad_id": quad_id(*q.triple()),
                "subject": q.subject,
                "trigger": q.trigger,
                "object": q.object,
                "confidence": q.confidence,
                "sentence_id": q.sentence_id,
                "provenance": q.provenance,
            }, sort_keys=True) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    click.echo(f"extracted {len(quads)} quads from {len(sentences)} sentences", err=True)


@main.command()
@click.option("--run-dir", required=True, type=click.Path(exists=True))
@_fail_on_error("classify")
def classify(run_dir) -> None:
    """Classify the test split against the trained stores."""
    out_dir = pipeline.classify(run_dir)
    click.echo(f"wrote {out_dir / 'predictions.jsonl'}")


@main.command()
@click.option("--run-dir", required=True, type=click.Path(exists=True))
@_fail_on_error("enrich")
def enrich(run_dir) -> None:
    """Filter causal predictions to those grounding in the concept vocabulary."""
    path = pipeline.enrich(run_dir)
    click.echo(f"wrote {path}")


def _echo_report(payload: dict) -> None:
    size = payload["universe"]["size"]
    kind = payload["universe"]["kind"]
    click.echo(f"universe: {size} {kind}; gold: {payload['gold_size']}")
    for row in payload["rows"]:
        def show(v):
            return "NA" if v is None else f"{v:.2f}"
        click.echo(
            f"{row['label']}: tp={row['tp']} fp={row['fp']} fn={row['fn']} tn={row['tn']} "
            f"accuracy={show(row['accuracy'])} precision={show(row['precision'])} "
            f"recall={show(row['recall'])}"
        )


@main.command()
@click.option("--run-dir", required=True, type=click.Path(exists=True))
@click.option("--figures", is_flag=True, default=False,
              help="Render PNG figures next to the reports.")
@_fail_on_error("evaluate")
def evaluate(run_dir, figures) -> None:
    """Score the current iteration and write report.json/report.csv."""
    payload = pipeline.evaluate(run_dir)
    _echo_report(payload)
    if figures:
        from .figures import render_run_figures

        for path in render_run_figures(run_dir, payload["iteration"]):
            click.echo(f"wrote {path}")


@main.command("feedback-apply")
@click.option("--run-dir", required=True, type=click.Path(exists=True))
@click.option("--figures", is_flag=True, default=False)
@_fail_on_error("feedback-apply")
def feedback_apply(run_dir, figures) -> None:
    """Fold new expert verdicts into the stores and re-run an iteration."""
    payload = pipeline.evolve(run_dir)
    evo = payload["evolution"]
    click.echo(
        f"applied feedback: appended={evo['appended']} blocklisted={evo['blocklisted']} "
        f"removed={json.dumps(evo['removed_per_model'], sort_keys=True)}"
    )
    _echo_report(payload)
    if figures:
        from .figures import render_run_figures

        for path in render_run_figures(run_dir, payload["iteration"]):
            click.echo(f"wrote {path}")


@main.command()
@click.option("--runs-root", required=True, type=click.Path(exists=True))
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8000, type=int)
@click.option("--token", default=None, help="Static bearer token; anonymous when omitted.")
@_fail_on_error("serve")
def serve(runs_root, host, port, token) -> None:
    """Serve the review and feedback HTTP API over a directory of runs."""
    try:
        import uvicorn
    except ImportError as exc:
        raise click.ClickException(
            "uvicorn is not installed; install the 'serve' extra"
        ) from exc
    from .api import create_app

    uvicorn.run(create_app(runs_root, api_token=token), host=host, port=port)


if __name__ == "__main__":
    main()
