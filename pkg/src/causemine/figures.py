"""Report figures rendered to files next to the delimited output.

Everything draws on the Agg backend, so runs stay headless. Each function
returns the written path; render_run_figures drives them all for a run
iteration.
"""
from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

_METRICS = ("accuracy", "precision", "recall")


def metric_bars(report: dict, out_path: str | Path) -> Path:
    """Grouped bars of accuracy/precision/recall for each report row.

    Undefined metrics (null) plot as zero-height bars hatched out, so a
    missing value never masquerades as a real zero.
    """
    rows = report.get("rows", [])
    labels = [r["label"] for r in rows]
    x = range(len(rows))
    width = 0.27
    fig, ax = plt.subplots(figsize=(max(6.0, 1.8 * len(rows)), 4.0))
    for k, metric in enumerate(_METRICS):
        offsets = [xi + (k - 1) * width for xi in x]
        values = [r.get(metric) for r in rows]
        heights = [v if v is not None else 0.0 for v in values]
        hatches = ["//" if v is None else "" for v in values]
        bars = ax.bar(offsets, heights, width, label=metric)
        for bar, hatch in zip(bars, hatches):
            bar.set_hatch(hatch)
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels, rotation=20, ha="right")
    ax.set_ylabel("percent")
    ax.set_ylim(0, 100)
    ax.set_title(f"{report.get('stage', '')} iteration {report.get('iteration', 0)}")
    ax.legend()
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return out_path


def degree_histogram_figure(histogram: dict, out_path: str | Path) -> Path:
    """Bar chart of how many items each agreement degree collected."""
    degrees = sorted(int(k) for k in histogram)
    counts = [histogram[str(d)] if str(d) in histogram else histogram[d] for d in degrees]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.bar(degrees, counts, color="#4878a8")
    ax.set_xlabel("models in agreement")
    ax.set_ylabel("items")
    ax.set_xticks(degrees)
    ax.set_title("agreement degree histogram")
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return out_path


def iteration_trend(reports: list[dict], out_path: str | Path) -> Path:
    """Overall metrics across feedback iterations, one line per metric."""
    iters = [r.get("iteration", i) for i, r in enumerate(reports)]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for metric in _METRICS:
        values = []
        for r in reports:
            overall = next((row for row in r.get("rows", []) if row["label"] == "overall"), {})
            values.append(overall.get(metric))
        ax.plot(iters, [v if v is not None else float("nan") for v in values],
                marker="o", label=metric)
    ax.set_xlabel("iteration")
    ax.set_ylabel("percent")
    ax.set_ylim(0, 100)
    ax.set_xticks(iters)
    ax.set_title("metrics across iterations")
    ax.legend()
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return out_path


def render_run_figures(run_dir: str | Path, iteration: int) -> list[Path]:
    """Render every figure the current reports support; returns written paths."""
    run_dir = Path(run_dir)
    out: list[Path] = []
    it_dir = run_dir / f"iter_{iteration:03d}"
    report_path = it_dir / "report.json"
    if not report_path.exists():
        return out
    with open(report_path, encoding="utf-8") as fh:
        report = json.load(fh)
    out.append(metric_bars(report, it_dir / "report_metrics.png"))
    if "degree" in report:
        out.append(degree_histogram_figure(report["degree"]["histogram"],
                                           it_dir / "degree_histogram.png"))
    reports = []
    for n in range(iteration + 1):
        p = run_dir / f"iter_{n:03d}" / "report.json"
        if p.exists():
            with open(p, encoding="utf-8") as fh:
                reports.append(json.load(fh))
    if len(reports) > 1:
        out.append(iteration_trend(reports, it_dir / "iteration_trend.png"))
    return out
