// Verdict outbox: buffers expert verdicts and delivers each one to the
// API exactly once from the client's side. Every enqueued verdict gets
// an idempotency key (quad id + expert id + a fresh client nonce); a
// key that has been acknowledged is never sent again, re-enqueues of a
// known key are no-ops, and network failures park the entry for the
// next flush instead of dropping it.
//
// The one undeliverable corner is an ack lost in transit after the
// server persisted: the retry then writes a second record. That is
// harmless here because feedback is reduced to the latest verdict per
// quad, so an identical duplicate cannot change the effective outcome.

import { ApiError, ReviewApi } from "./api.js";
import type { FeedbackAck, FeedbackBody } from "./types.js";

export interface OutboxEntry {
  key: string;
  runId: string;
  body: FeedbackBody;
  attempts: number;
}

export interface FlushResult {
  sent: number;
  rejected: number;
  remaining: number;
}

// Subset of DOM Storage, so tests can pass a plain in-memory fake.
export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

export interface OutboxOptions {
  storage?: StorageLike;
  storageKey?: string;
  nonce?: () => string;
  onAccepted?: (entry: OutboxEntry, ack: FeedbackAck) => void;
  onRejected?: (entry: OutboxEntry, error: ApiError) => void;
}

interface PersistedState {
  entries: OutboxEntry[];
  acked: string[];
}

let nonceCounter = 0;

function defaultNonce(): string {
  const c = globalThis.crypto;
  if (c && typeof c.randomUUID === "function") return c.randomUUID();
  nonceCounter += 1;
  return `${Date.now().toString(36)}-${nonceCounter}-${Math.random().toString(36).slice(2, 10)}`;
}

export function verdictKey(quadId: string, expertId: string, nonce: string): string {
  return `${quadId}:${expertId}:${nonce}`;
}

export class VerdictOutbox {
  private entries: OutboxEntry[] = [];
  private acked = new Set<string>();
  private inFlight: Promise<FlushResult> | null = null;
  private readonly storage?: StorageLike;
  private readonly storageKey: string;
  private readonly nonce: () => string;
  private readonly onAccepted?: (entry: OutboxEntry, ack: FeedbackAck) => void;
  private readonly onRejected?: (entry: OutboxEntry, error: ApiError) => void;

  constructor(private readonly api: ReviewApi, options: OutboxOptions = {}) {
    this.storage = options.storage;
    this.storageKey = options.storageKey ?? "causemine.outbox";
    this.nonce = options.nonce ?? defaultNonce;
    this.onAccepted = options.onAccepted;
    this.onRejected = options.onRejected;
    this.restore();
  }

  /** Queue a verdict for delivery. Returns its idempotency key. */
  enqueue(runId: string, body: FeedbackBody, key?: string): string {
    const k = key ?? verdictKey(body.quad_id, body.expert_id, this.nonce());
    if (this.acked.has(k) || this.entries.some((e) => e.key === k)) {
      return k;
    }
    this.entries.push({ key: k, runId, body, attempts: 0 });
    this.persist();
    return k;
  }

  pending(): readonly OutboxEntry[] {
    return this.entries;
  }

  get size(): number {
    return this.entries.length;
  }

  isAcked(key: string): boolean {
    return this.acked.has(key);
  }

  /**
   * Deliver queued verdicts in FIFO order. A network failure stops the
   * pass and keeps the rest queued; an HTTP rejection drops the entry
   * (retrying a validation error cannot succeed) and reports it.
   * Concurrent calls share one pass, so nothing double-sends.
   */
  flush(): Promise<FlushResult> {
    if (this.inFlight) return this.inFlight;
    this.inFlight = this.drain().finally(() => {
      this.inFlight = null;
    });
    return this.inFlight;
  }

  private async drain(): Promise<FlushResult> {
    let sent = 0;
    let rejected = 0;
    while (this.entries.length > 0) {
      const entry = this.entries[0]!;
      entry.attempts += 1;
      try {
        const ack = await this.api.submitFeedback(entry.runId, entry.body);
        this.entries.shift();
        this.acked.add(entry.key);
        this.persist();
        sent += 1;
        this.onAccepted?.(entry, ack);
      } catch (err) {
        if (err instanceof ApiError) {
          this.entries.shift();
          this.persist();
          rejected += 1;
          this.onRejected?.(entry, err);
        } else {
          this.persist();
          break;
        }
      }
    }
    return { sent, rejected, remaining: this.entries.length };
  }

  private persist(): void {
    if (!this.storage) return;
    const state: PersistedState = { entries: this.entries, acked: [...this.acked] };
    this.storage.setItem(this.storageKey, JSON.stringify(state));
  }

  private restore(): void {
    if (!this.storage) return;
    const raw = this.storage.getItem(this.storageKey);
    if (!raw) return;
    try {
      const state = JSON.parse(raw) as PersistedState;
      this.entries = state.entries ?? [];
      this.acked = new Set(state.acked ?? []);
    } catch {
      this.storage.removeItem(this.storageKey);
    }
  }
}
