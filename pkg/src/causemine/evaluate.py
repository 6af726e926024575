"""Set-based evaluation: confusion counts, metrics, and degree breakdowns.

Predictions, gold, and the universe are id sets. Metrics are percentages
rounded half-up to two decimals; a zero denominator yields None rather
than a fake zero, and serializers write it as null (JSON) or NA (CSV).
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

from .extract import Quad, quad_id

UNDEFINED = "NA"


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def predicted_positive(self) -> int:
        return self.tp + self.fp

    @property
    def predicted_negative(self) -> int:
        return self.fn + self.tn


def confusion(predicted: set, gold: set, universe: set) -> Confusion:
    """Count tp/fp/fn/tn over an explicit universe.

    Ids outside the universe are a modeling error, not data to be clipped
    silently, so they raise.
    """
    stray_pred = predicted - universe
    if stray_pred:
        raise ValueError(f"{len(stray_pred)} predicted ids outside the universe")
    stray_gold = gold - universe
    if stray_gold:
        raise ValueError(f"{len(stray_gold)} gold ids outside the universe")
    tp = len(predicted & gold)
    fp = len(predicted - gold)
    fn = len(gold - predicted)
    tn = len(universe) - tp - fp - fn
    return Confusion(tp=tp, fp=fp, fn=fn, tn=tn)


def round_half_up(value: float, places: int = 2) -> float:
    quantum = Decimal(10) ** -places
    return float(Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class Metrics:
    accuracy: float | None
    precision: float | None
    recall: float | None


def metrics(conf: Confusion) -> Metrics:
    """Accuracy, precision, recall as percentages; undefined stays None."""
    def pct(num: int, den: int) -> float | None:
        if den == 0:
            return None
        return round_half_up(100.0 * num / den)

    return Metrics(
        accuracy=pct(conf.tp + conf.tn, conf.total),
        precision=pct(conf.tp, conf.tp + conf.fp),
        recall=pct(conf.tp, conf.tp + conf.fn),
    )


@dataclass(frozen=True)
class EvalRow:
    label: str
    conf: Confusion
    scores: Metrics

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "tp": self.conf.tp,
            "fp": self.conf.fp,
            "fn": self.conf.fn,
            "tn": self.conf.tn,
            "predicted_positive": self.conf.predicted_positive,
            "predicted_negative": self.conf.predicted_negative,
            "accuracy": self.scores.accuracy,
            "precision": self.scores.precision,
            "recall": self.scores.recall,
        }


def evaluate_sets(label: str, predicted: set, gold: set, universe: set) -> EvalRow:
    conf = confusion(predicted, gold, universe)
    return EvalRow(label=label, conf=conf, scores=metrics(conf))


@dataclass(frozen=True)
class DegreeGroup:
    label: str
    lo: int
    hi: int
    row: EvalRow


@dataclass(frozen=True)
class DegreeReport:
    histogram: dict[int, int]
    gold_per_degree: dict[int, int]
    groups: tuple[DegreeGroup, ...]
    universe_size: int
    gold_in_universe: int
    degrees: dict[str, int]


def degree_report(
    model_sets: dict[str, set],
    gold: set,
    split_at: int = 4,
) -> DegreeReport:
    """Agreement-degree breakdown over the union of the models' flag sets.

    Each id's degree is the number of model sets containing it; the
    universe is every id some model flagged, and gold is intersected with
    it. Two groups are scored as if they were the predicted-positive set:
    degrees below split_at, and split_at up to the model count.
    """
    if len(model_sets) < 2:
        raise ValueError("degree breakdown needs at least 2 model sets")
    max_degree = len(model_sets)
    degrees: dict[str, int] = {}
    for flagged in model_sets.values():
        for item in flagged:
            degrees[item] = degrees.get(item, 0) + 1
    universe = set(degrees)
    gold_u = gold & universe
    histogram = {d: 0 for d in range(1, max_degree + 1)}
    gold_per_degree = {d: 0 for d in range(1, max_degree + 1)}
    for item, d in degrees.items():
        histogram[d] += 1
        if item in gold_u:
            gold_per_degree[d] += 1
    groups = []
    for label, lo, hi in (
        (f"degree {1}..{split_at - 1}", 1, split_at - 1),
        (f"degree {split_at}..{max_degree}", split_at, max_degree),
    ):
        if lo > hi:
            continue
        members = {item for item, d in degrees.items() if lo <= d <= hi}
        groups.append(
            DegreeGroup(label=label, lo=lo, hi=hi,
                        row=evaluate_sets(label, members, gold_u, universe))
        )
    return DegreeReport(
        histogram=histogram,
        gold_per_degree=gold_per_degree,
        groups=tuple(groups),
        universe_size=len(universe),
        gold_in_universe=len(gold_u),
        degrees=degrees,
    )


def gold_sentence_ids(examples) -> set[str]:
    """Ids of annotated sentences whose relation is the causal one."""
    return {ex.sentence.sentence_id for ex in examples if ex.annotation.is_causal}


def gold_triple_ids(quads: list[Quad], causal_sentence_ids: set[str]) -> set[str]:
    """A triple is gold when any causal sentence ever produced it."""
    return {
        quad_id(*q.triple())
        for q in quads
        if q.sentence_id in causal_sentence_ids
    }


def write_report_json(path: str | Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _cell(value: float | None):
    return UNDEFINED if value is None else value


def write_report_csv(path: str | Path, rows: list[EvalRow],
                     dataset: str, stage: str) -> None:
    """Flat CSV mirroring the reference table columns, one line per row."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dataset", "stage", "row",
                         "PP", "PN", "TP", "FN", "FP", "TN", "A", "P", "R"])
        for row in rows:
            writer.writerow([
                dataset, stage, row.label,
                row.conf.predicted_positive, row.conf.predicted_negative,
                row.conf.tp, row.conf.fn, row.conf.fp, row.conf.tn,
                _cell(row.scores.accuracy), _cell(row.scores.precision),
                _cell(row.scores.recall),
            ])


def write_histogram_csv(path: str | Path, histogram: dict[int, int],
                        gold_per_degree: dict[int, int] | None = None) -> None:
    gold_per_degree = gold_per_degree or {}
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["degree", "count", "tp_in_degree"])
        for degree in sorted(histogram):
            writer.writerow([degree, histogram[degree], gold_per_degree.get(degree, 0)])
