// Iteration dashboard state. Holds the evaluation reports the API
// produced, keyed by iteration, and answers every display question by
// returning the server's own numbers. No metric is ever derived (or
// re-derived) on the client; if the API did not report it, the
// dashboard does not show it.

import { ApiError, ReviewApi } from "./api.js";
import type {
  BlocklistPage,
  EvaluationReport,
  EvolutionSummary,
  EvolveReport,
  MetricsRow,
} from "./types.js";

export function isEvolveReport(report: EvaluationReport): report is EvolveReport {
  return "evolution" in report;
}

export type EvolveOutcome =
  | { kind: "evolved"; report: EvolveReport }
  | { kind: "in_progress" };

export interface IterationPoint {
  iteration: number;
  row: MetricsRow;
}

export class DashboardState {
  private reports = new Map<number, EvaluationReport>();
  private evolutions = new Map<number, EvolutionSummary>();
  private blocklist: BlocklistPage | null = null;

  record(report: EvaluationReport): void {
    this.reports.set(report.iteration, report);
    if (isEvolveReport(report)) {
      this.evolutions.set(report.iteration, report.evolution);
    }
  }

  setBlocklist(page: BlocklistPage): void {
    this.blocklist = page;
  }

  get blocklistTotal(): number | null {
    return this.blocklist ? this.blocklist.total : null;
  }

  get blocklistEntries(): BlocklistPage["entries"] {
    return this.blocklist ? this.blocklist.entries : [];
  }

  iterations(): number[] {
    return [...this.reports.keys()].sort((a, b) => a - b);
  }

  report(iteration: number): EvaluationReport | null {
    return this.reports.get(iteration) ?? null;
  }

  latest(): EvaluationReport | null {
    const iters = this.iterations();
    const last = iters[iters.length - 1];
    return last === undefined ? null : this.reports.get(last) ?? null;
  }

  evolution(iteration: number): EvolutionSummary | null {
    return this.evolutions.get(iteration) ?? null;
  }

  latestEvolution(): EvolutionSummary | null {
    const iters = [...this.evolutions.keys()].sort((a, b) => a - b);
    const last = iters[iters.length - 1];
    return last === undefined ? null : this.evolutions.get(last) ?? null;
  }

  /** The row labelled `label` of one iteration's report, verbatim. */
  row(iteration: number, label: string): MetricsRow | null {
    const report = this.reports.get(iteration);
    if (!report) return null;
    return report.rows.find((r) => r.label === label) ?? null;
  }

  /** Per-iteration series of one labelled row, for the trends table. */
  series(label = "overall"): IterationPoint[] {
    const out: IterationPoint[] = [];
    for (const iteration of this.iterations()) {
      const row = this.row(iteration, label);
      if (row) out.push({ iteration, row });
    }
    return out;
  }

  /** Per-model rows ("model:<id>") of one iteration, verbatim. */
  modelRows(iteration: number): MetricsRow[] {
    const report = this.reports.get(iteration);
    if (!report) return [];
    return report.rows.filter((r) => r.label.startsWith("model:"));
  }

  /** Pull the current report and blocklist from the API into state. */
  async refreshFromApi(api: ReviewApi, runId: string): Promise<void> {
    this.record(await api.metrics(runId));
    this.setBlocklist(await api.blocklist(runId));
  }

  /**
   * Trigger an evolution round and absorb its report. A 409 from the
   * API means another evolve holds the run lock; that maps to the
   * in-progress outcome so the UI can show a wait state. Any other
   * failure propagates.
   */
  async evolveViaApi(api: ReviewApi, runId: string): Promise<EvolveOutcome> {
    let report: EvolveReport;
    try {
      report = await api.evolve(runId);
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        return { kind: "in_progress" };
      }
      throw err;
    }
    this.record(report);
    this.setBlocklist(await api.blocklist(runId));
    return { kind: "evolved", report };
  }
}
