import { describe, expect, it } from "vitest";

import { ReviewQueue } from "../src/queue.js";
import type { Candidate } from "../src/types.js";
import { makeCandidate } from "./mockServer.js";

function loaded(confidences: number[]): ReviewQueue {
  const queue = new ReviewQueue();
  queue.load(confidences.map((c, i) => ({ ...makeCandidate(i + 1, c), status: "pending" })));
  return queue;
}

describe("ReviewQueue", () => {
  it("orders pending cards by confidence, highest first by default", () => {
    const queue = loaded([0.3, 0.9, 0.6]);
    expect(queue.sortOrder).toBe("desc");
    expect(queue.pending().map((c) => c.confidence)).toEqual([0.9, 0.6, 0.3]);
    expect(queue.current()?.confidence).toBe(0.9);
  });

  it("toggles to lowest-first and back", () => {
    const queue = loaded([0.3, 0.9, 0.6]);
    expect(queue.toggleOrder()).toBe("asc");
    expect(queue.pending().map((c) => c.confidence)).toEqual([0.3, 0.6, 0.9]);
    expect(queue.toggleOrder()).toBe("desc");
    expect(queue.pending().map((c) => c.confidence)).toEqual([0.9, 0.6, 0.3]);
  });

  it("breaks confidence ties by quad id so the order is stable", () => {
    const queue = loaded([0.5, 0.5, 0.5]);
    expect(queue.pending().map((c) => c.quad_id)).toEqual(["quad0001", "quad0002", "quad0003"]);
    queue.toggleOrder();
    expect(queue.pending().map((c) => c.quad_id)).toEqual(["quad0001", "quad0002", "quad0003"]);
  });

  it("advances to the next card when the current one is reviewed", () => {
    const queue = loaded([0.3, 0.9, 0.6]);
    const first = queue.current();
    expect(queue.markReviewed(first!.quad_id)).toBe(true);
    expect(queue.current()?.confidence).toBe(0.6);
    expect(queue.remaining).toBe(2);
    expect(queue.reviewedCount).toBe(1);
  });

  it("ignores verdicts on unknown or already-reviewed cards", () => {
    const queue = loaded([0.9]);
    expect(queue.markReviewed("quad0001")).toBe(true);
    expect(queue.markReviewed("quad0001")).toBe(false);
    expect(queue.markReviewed("missing")).toBe(false);
    expect(queue.reviewedCount).toBe(1);
  });

  it("keeps server-reviewed cards out of the pending view", () => {
    const queue = new ReviewQueue();
    const items: Candidate[] = [
      { ...makeCandidate(1, 0.9), status: "reviewed" },
      { ...makeCandidate(2, 0.8), status: "pending" },
    ];
    queue.load(items);
    expect(queue.pending().map((c) => c.quad_id)).toEqual(["quad0002"]);
    expect(queue.reviewedCount).toBe(1);
  });

  it("signals ready-to-evolve only when a loaded queue is drained", () => {
    const empty = new ReviewQueue();
    expect(empty.isDrained).toBe(false);

    const queue = loaded([0.9, 0.8]);
    expect(queue.isDrained).toBe(false);
    queue.markReviewed("quad0001");
    queue.markReviewed("quad0002");
    expect(queue.remaining).toBe(0);
    expect(queue.isDrained).toBe(true);
  });
});
