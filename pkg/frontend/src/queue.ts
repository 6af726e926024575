// Review queue state: which candidates still need a verdict, and in
// what order to show them. Highest confidence first by default so the
// expert sees the model's strongest claims early; the toggle flips to
// ascending for hunting weak extractions.

import type { Candidate } from "./types.js";

export type SortOrder = "desc" | "asc";

export class ReviewQueue {
  private items: Candidate[] = [];
  private order: SortOrder = "desc";

  /** Replace the queue contents with a fresh candidates page. */
  load(items: Candidate[]): void {
    this.items = [...items];
  }

  get sortOrder(): SortOrder {
    return this.order;
  }

  toggleOrder(): SortOrder {
    this.order = this.order === "desc" ? "asc" : "desc";
    return this.order;
  }

  /** Unreviewed candidates, sorted by confidence with a stable id tiebreak. */
  pending(): Candidate[] {
    const sign = this.order === "desc" ? -1 : 1;
    return this.items
      .filter((c) => c.status === "pending")
      .sort((a, b) => {
        if (a.confidence !== b.confidence) {
          return sign * (a.confidence - b.confidence);
        }
        return a.quad_id < b.quad_id ? -1 : a.quad_id > b.quad_id ? 1 : 0;
      });
  }

  current(): Candidate | null {
    return this.pending()[0] ?? null;
  }

  /** Record a verdict locally; the card leaves the pending view at once. */
  markReviewed(quadId: string): boolean {
    const item = this.items.find((c) => c.quad_id === quadId);
    if (!item || item.status !== "pending") return false;
    item.status = "reviewed";
    return true;
  }

  get size(): number {
    return this.items.length;
  }

  get remaining(): number {
    return this.items.reduce((n, c) => n + (c.status === "pending" ? 1 : 0), 0);
  }

  get reviewedCount(): number {
    return this.size - this.remaining;
  }

  /** True once a loaded queue has no pending cards left. */
  get isDrained(): boolean {
    return this.size > 0 && this.remaining === 0;
  }
}
