import { describe, expect, it } from "vitest";

import { ReviewApi } from "../src/api.js";
import { DashboardState, isEvolveReport } from "../src/dashboard.js";
import type { EvaluationReport, EvolveReport, MetricsRow } from "../src/types.js";

function row(label: string, cells: Partial<MetricsRow>): MetricsRow {
  return {
    label,
    tp: 0,
    fp: 0,
    fn: 0,
    tn: 0,
    predicted_positive: 0,
    predicted_negative: 0,
    accuracy: null,
    precision: null,
    recall: null,
    ...cells,
  };
}

function report(iteration: number, rows: MetricsRow[]): EvaluationReport {
  return {
    run_id: "run-a",
    dataset: "demo",
    stage: "feedback",
    iteration,
    universe: { kind: "triples", size: 50 },
    gold_size: 30,
    rows,
  };
}

describe("DashboardState", () => {
  it("returns metric cells exactly as reported, never recomputed", () => {
    // these percentages are deliberately inconsistent with the counts:
    // any client-side arithmetic would produce different numbers
    const planted = row("overall", {
      tp: 3,
      fp: 1,
      fn: 2,
      tn: 4,
      predicted_positive: 4,
      predicted_negative: 6,
      accuracy: 12.34,
      precision: 41.42,
      recall: 99.99,
    });
    const dash = new DashboardState();
    dash.record(report(0, [planted]));
    const got = dash.row(0, "overall");
    expect(got).toEqual(planted);
    expect(got?.precision).toBe(41.42);
    expect(got?.accuracy).toBe(12.34);
    expect(got?.recall).toBe(99.99);
  });

  it("keeps null metrics null instead of inventing a zero", () => {
    const dash = new DashboardState();
    dash.record(report(0, [row("overall", { tn: 10, predicted_negative: 10 })]));
    const got = dash.row(0, "overall");
    expect(got?.precision).toBeNull();
    expect(got?.recall).toBeNull();
  });

  it("builds the iteration series from stored reports in order", () => {
    const dash = new DashboardState();
    dash.record(report(2, [row("overall", { accuracy: 82.0 })]));
    dash.record(report(0, [row("overall", { accuracy: 66.0 })]));
    dash.record(report(1, [row("overall", { accuracy: 74.0 })]));
    const series = dash.series("overall");
    expect(series.map((p) => p.iteration)).toEqual([0, 1, 2]);
    expect(series.map((p) => p.row.accuracy)).toEqual([66.0, 74.0, 82.0]);
  });

  it("replaces a re-recorded iteration instead of duplicating it", () => {
    const dash = new DashboardState();
    dash.record(report(0, [row("overall", { accuracy: 50.0 })]));
    dash.record(report(0, [row("overall", { accuracy: 51.0 })]));
    expect(dash.iterations()).toEqual([0]);
    expect(dash.row(0, "overall")?.accuracy).toBe(51.0);
  });

  it("separates per-model rows from the overall row", () => {
    const dash = new DashboardState();
    dash.record(
      report(0, [
        row("overall", { tp: 5 }),
        row("model:pubmed", { tp: 4 }),
        row("model:wiki", { tp: 3 }),
        row("degree>=2", { tp: 5 }),
      ]),
    );
    expect(dash.modelRows(0).map((r) => r.label)).toEqual(["model:pubmed", "model:wiki"]);
  });

  it("captures the evolution summary carried by an evolve report", () => {
    const dash = new DashboardState();
    const evolved: EvolveReport = {
      ...report(1, [row("overall", { tp: 5 })]),
      evolution: { appended: 2, blocklisted: 4, removed_per_model: { pubmed: 4, wiki: 3 } },
    };
    expect(isEvolveReport(evolved)).toBe(true);
    dash.record(evolved);
    expect(dash.evolution(1)).toEqual({
      appended: 2,
      blocklisted: 4,
      removed_per_model: { pubmed: 4, wiki: 3 },
    });
    expect(dash.latestEvolution()?.blocklisted).toBe(4);
    expect(dash.evolution(0)).toBeNull();
  });

  it("reports the blocklist total straight from the API page", () => {
    const dash = new DashboardState();
    expect(dash.blocklistTotal).toBeNull();
    dash.setBlocklist({
      entries: [
        { phrase: "a b c", subject: "a", trigger: "b", object: "c", added_at: "t" },
      ],
      total: 7,
    });
    // trusts the server's count even when the page is partial
    expect(dash.blocklistTotal).toBe(7);
    expect(dash.blocklistEntries).toHaveLength(1);
  });

  it("maps an evolve 409 to the in-progress outcome without state changes", async () => {
    const fetchImpl = (() =>
      Promise.resolve(
        new Response(JSON.stringify({ detail: "evolve already running for 'run-a'" }), {
          status: 409,
          headers: { "content-type": "application/json" },
        }),
      )) as typeof fetch;
    const api = new ReviewApi({ baseUrl: "http://mock", token: "t", fetchImpl });
    const dash = new DashboardState();
    const outcome = await dash.evolveViaApi(api, "run-a");
    expect(outcome).toEqual({ kind: "in_progress" });
    expect(dash.iterations()).toEqual([]);
    expect(dash.latestEvolution()).toBeNull();
  });

  it("rethrows non-409 evolve failures", async () => {
    const fetchImpl = (() =>
      Promise.resolve(
        new Response(JSON.stringify({ detail: "no new verdicts to apply" }), {
          status: 400,
          headers: { "content-type": "application/json" },
        }),
      )) as typeof fetch;
    const api = new ReviewApi({ baseUrl: "http://mock", token: "t", fetchImpl });
    const dash = new DashboardState();
    await expect(dash.evolveViaApi(api, "run-a")).rejects.toMatchObject({ status: 400 });
  });
});
