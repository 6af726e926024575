// Single-page review console. Wires the API client, verdict outbox,
// review queue and dashboard state to the DOM: render the pending
// candidate cards, take causal / non-causal verdicts (buttons or C / N
// keys), surface delivery state, and run evolution rounds whose
// results are shown exactly as the server reported them.

import { ApiError, ReviewApi } from "./api.js";
import { DashboardState } from "./dashboard.js";
import { VerdictOutbox } from "./outbox.js";
import { ReviewQueue } from "./queue.js";
import type { Candidate, RunSummary, Verdict } from "./types.js";

const PAGE_LIMIT = 200; // server caps limit at 500
const CONFIG_KEY = "causemine.config";
const REVIEWER_KEY = "causemine.reviewer";

interface StoredConfig {
  baseUrl: string;
  token: string;
}

type View = "settings" | "review" | "dashboard";

interface AppState {
  view: View;
  runs: RunSummary[];
  runId: string | null;
  loading: string | null;
  error: string | null;
  retry: (() => void) | null;
  evolveInProgress: boolean;
}

const state: AppState = {
  view: "settings",
  runs: [],
  runId: null,
  loading: null,
  error: null,
  retry: null,
  evolveInProgress: false,
};

let api: ReviewApi | null = null;
let outbox: VerdictOutbox | null = null;
const queue = new ReviewQueue();
const dashboard = new DashboardState();

function loadConfig(): StoredConfig | null {
  try {
    const raw = localStorage.getItem(CONFIG_KEY);
    if (!raw) return null;
    const cfg = JSON.parse(raw) as StoredConfig;
    return cfg.baseUrl ? cfg : null;
  } catch {
    return null;
  }
}

function saveConfig(cfg: StoredConfig): void {
  localStorage.setItem(CONFIG_KEY, JSON.stringify(cfg));
}

function reviewerId(): string {
  return localStorage.getItem(REVIEWER_KEY) || "expert";
}

function escapeHtml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

// Marks the first occurrence of each triple part inside an
// already-escaped sentence, so the reviewer can spot the claim fast.
function highlight(escapedSentence: string, parts: { text: string; cls: string }[]): string {
  let out = escapedSentence;
  for (const part of parts) {
    const needle = escapeHtml(part.text);
    if (!needle) continue;
    const idx = out.toLowerCase().indexOf(needle.toLowerCase());
    if (idx < 0) continue;
    out =
      out.slice(0, idx) +
      `<mark class="${part.cls}">` +
      out.slice(idx, idx + needle.length) +
      "</mark>" +
      out.slice(idx + needle.length);
  }
  return out;
}

function fmtMetric(value: number | null): string {
  return value === null ? "–" : value.toFixed(2);
}

function setError(message: string, retry: (() => void) | null): void {
  state.error = message;
  state.retry = retry;
  render();
}

function clearError(): void {
  state.error = null;
  state.retry = null;
}

async function guarded(label: string, action: () => Promise<void>): Promise<void> {
  state.loading = label;
  clearError();
  render();
  try {
    await action();
    state.loading = null;
    render();
  } catch (err) {
    state.loading = null;
    const detail = err instanceof ApiError ? err.message : "network error, is the API up?";
    setError(`${label} failed: ${detail}`, () => void guarded(label, action));
  }
}

async function fetchAllCandidates(client: ReviewApi, runId: string): Promise<Candidate[]> {
  const items: Candidate[] = [];
  let offset = 0;
  for (;;) {
    const page = await client.candidates(runId, { offset, limit: PAGE_LIMIT });
    items.push(...page.items);
    offset += page.items.length;
    if (offset >= page.total || page.items.length === 0) break;
  }
  return items;
}

async function loadRun(runId: string): Promise<void> {
  if (!api) return;
  state.runId = runId;
  queue.load(await fetchAllCandidates(api, runId));
  try {
    await dashboard.refreshFromApi(api, runId);
  } catch (err) {
    // a run that was trained but never evaluated has no report yet
    if (!(err instanceof ApiError && err.status === 404)) throw err;
  }
}

async function boot(cfg: StoredConfig): Promise<void> {
  api = new ReviewApi({ baseUrl: cfg.baseUrl, token: cfg.token });
  outbox = new VerdictOutbox(api, {
    storage: localStorage,
    onRejected: (entry, error) => {
      setError(`verdict on ${entry.body.quad_id} rejected: ${error.detail}`, null);
    },
  });
  await guarded("load runs", async () => {
    state.runs = await api!.listRuns();
    const first = state.runs[0];
    if (first) await loadRun(first.run_id);
    state.view = "review";
  });
  if (outbox.size > 0) void flushOutbox();
}

async function flushOutbox(): Promise<void> {
  if (!outbox) return;
  await outbox.flush();
  render();
}

function giveVerdict(verdict: Verdict): void {
  if (!outbox || !state.runId) return;
  const card = queue.current();
  if (!card) return;
  outbox.enqueue(state.runId, {
    quad_id: card.quad_id,
    verdict,
    expert_id: reviewerId(),
  });
  queue.markReviewed(card.quad_id);
  render();
  void flushOutbox();
}

async function runEvolution(): Promise<void> {
  if (!api || !state.runId) return;
  const runId = state.runId;
  state.evolveInProgress = false;
  await guarded("evolve", async () => {
    const outcome = await dashboard.evolveViaApi(api!, runId);
    if (outcome.kind === "in_progress") {
      state.evolveInProgress = true;
      state.view = "dashboard";
      return;
    }
    queue.load(await fetchAllCandidates(api!, runId));
    state.view = "dashboard";
  });
}

function switchRun(runId: string): void {
  void guarded("load run", () => loadRun(runId));
}

// ---------------------------------------------------------------- views

function settingsView(): string {
  const cfg = loadConfig();
  return `
  <section class="panel">
    <h2>Connect</h2>
    <p class="hint">Point the console at a causemine API server.</p>
    <form id="settings-form">
      <label>Base URL
        <input name="baseUrl" value="${escapeHtml(cfg?.baseUrl ?? "http://127.0.0.1:8000")}" required>
      </label>
      <label>API token
        <input name="token" value="${escapeHtml(cfg?.token ?? "")}" type="password">
      </label>
      <button type="submit" class="primary">Connect</button>
    </form>
  </section>`;
}

function headerView(): string {
  const runOptions = state.runs
    .map((r) => {
      const sel = r.run_id === state.runId ? " selected" : "";
      return `<option value="${escapeHtml(r.run_id)}"${sel}>${escapeHtml(r.run_id)} (${escapeHtml(r.stage)}, iter ${r.iteration})</option>`;
    })
    .join("");
  const tabs = (["review", "dashboard"] as const)
    .map((v) => `<button data-action="view" data-view="${v}" class="tab${state.view === v ? " active" : ""}">${v}</button>`)
    .join("");
  return `
  <header>
    <h1>causemine review</h1>
    <select id="run-select" ${state.runs.length === 0 ? "disabled" : ""}>${runOptions}</select>
    <nav>${tabs}</nav>
    <label class="reviewer">reviewer
      <input id="reviewer-input" value="${escapeHtml(reviewerId())}">
    </label>
    <button data-action="view" data-view="settings" class="tab">connection</button>
  </header>`;
}

function errorBanner(): string {
  if (!state.error) return "";
  const retryBtn = state.retry ? `<button data-action="retry">retry</button>` : "";
  return `<div class="banner error"><span>${escapeHtml(state.error)}</span>${retryBtn}</div>`;
}

function outboxBanner(): string {
  if (!outbox || outbox.size === 0) return "";
  return `
  <div class="banner warn">
    <span>${outbox.size} verdict${outbox.size === 1 ? "" : "s"} queued locally (API unreachable)</span>
    <button data-action="flush">retry delivery</button>
  </div>`;
}

function voteChips(card: Candidate): string {
  return card.per_model
    .map((v) => {
      const cls = v.flagged ? "chip on" : "chip";
      const score = v.score === null ? "–" : v.score.toFixed(3);
      return `<span class="${cls}" title="best similarity ${score}">${escapeHtml(v.model_id)}</span>`;
    })
    .join("");
}

function conceptList(card: Candidate): string {
  if (!card.subject_concepts && !card.object_concepts) return "";
  const fmt = (refs: Candidate["subject_concepts"]): string =>
    (refs ?? [])
      .map((c) => `<span class="chip concept" title="${escapeHtml(c.semtypes.join(", "))}">${escapeHtml(c.cui)} ${escapeHtml(c.name)}</span>`)
      .join("") || `<span class="dim">none</span>`;
  return `
    <div class="concepts">
      <div><span class="dim">subject concepts</span> ${fmt(card.subject_concepts)}</div>
      <div><span class="dim">object concepts</span> ${fmt(card.object_concepts)}</div>
    </div>`;
}

function cardView(card: Candidate): string {
  const sentences = card.sentence_texts
    .map((s) =>
      highlight(escapeHtml(s), [
        { text: card.subject, cls: "subj" },
        { text: card.object, cls: "obj" },
        { text: card.trigger, cls: "trig" },
      ]),
    )
    .map((s) => `<p class="sentence">${s}</p>`)
    .join("");
  return `
  <article class="card">
    <div class="triple">
      <span class="part subj">${escapeHtml(card.subject)}</span>
      <span class="arrow">→</span>
      <span class="part trig">${escapeHtml(card.trigger)}</span>
      <span class="arrow">→</span>
      <span class="part obj">${escapeHtml(card.object)}</span>
    </div>
    ${sentences}
    <div class="meta">
      <span>confidence <strong>${card.confidence.toFixed(3)}</strong></span>
      <span>degree <strong>${card.degree}</strong></span>
      <span class="chips">${voteChips(card)}</span>
    </div>
    ${conceptList(card)}
    <div class="actions">
      <button data-action="verdict" data-verdict="causal" class="primary">causal <kbd>C</kbd></button>
      <button data-action="verdict" data-verdict="non_causal" class="danger">non-causal <kbd>N</kbd></button>
    </div>
  </article>`;
}

function reviewView(): string {
  if (!state.runId) {
    return `<section class="panel"><p>No runs on this server yet. Train one with the CLI, then reload.</p></section>`;
  }
  const card = queue.current();
  const upNext = queue
    .pending()
    .slice(1, 6)
    .map((c) => `<li><span class="mono">${c.confidence.toFixed(3)}</span> ${escapeHtml(c.subject)} / ${escapeHtml(c.trigger)} / ${escapeHtml(c.object)}</li>`)
    .join("");
  const main = card
    ? cardView(card)
    : queue.isDrained
      ? `<section class="panel done">
           <h2>Queue clear</h2>
           <p>All ${queue.size} candidates reviewed. Ready to evolve the model set.</p>
           <button data-action="evolve" class="primary big">Evolve now</button>
         </section>`
      : `<section class="panel"><p>No candidates in this iteration.</p></section>`;
  return `
  <div class="review-grid">
    <div>${main}</div>
    <aside class="panel">
      <h3>Queue</h3>
      <p>${queue.remaining} pending / ${queue.reviewedCount} reviewed</p>
      <button data-action="sort">confidence ${queue.sortOrder === "desc" ? "↓ high first" : "↑ low first"}</button>
      <h4>Up next</h4>
      <ul class="upnext">${upNext || "<li class='dim'>nothing queued</li>"}</ul>
    </aside>
  </div>`;
}

function trendsTable(): string {
  const points = dashboard.series("overall");
  if (points.length === 0) return `<p class="dim">No evaluated iterations yet.</p>`;
  const rows = points
    .map(
      ({ iteration, row }) => `
      <tr>
        <td>${iteration}</td>
        <td>${row.tp}</td><td>${row.fp}</td><td>${row.fn}</td><td>${row.tn}</td>
        <td>${fmtMetric(row.accuracy)}</td>
        <td>${fmtMetric(row.precision)}</td>
        <td>${fmtMetric(row.recall)}</td>
      </tr>`,
    )
    .join("");
  return `
  <table>
    <thead><tr><th>iter</th><th>tp</th><th>fp</th><th>fn</th><th>tn</th><th>acc %</th><th>prec %</th><th>recall %</th></tr></thead>
    <tbody>${rows}</tbody>
  </table>`;
}

function modelTable(): string {
  const latest = dashboard.latest();
  if (!latest) return "";
  const rows = dashboard.modelRows(latest.iteration);
  if (rows.length === 0) return "";
  const body = rows
    .map(
      (r) => `
      <tr>
        <td>${escapeHtml(r.label.slice("model:".length))}</td>
        <td>${r.predicted_positive}</td>
        <td>${fmtMetric(r.accuracy)}</td>
        <td>${fmtMetric(r.precision)}</td>
        <td>${fmtMetric(r.recall)}</td>
      </tr>`,
    )
    .join("");
  return `
  <h3>Per model (iteration ${latest.iteration})</h3>
  <table>
    <thead><tr><th>model</th><th>flagged</th><th>acc %</th><th>prec %</th><th>recall %</th></tr></thead>
    <tbody>${body}</tbody>
  </table>`;
}

function evolutionPanel(): string {
  if (state.evolveInProgress) {
    return `<div class="banner warn"><span>An evolution round is already running on the server; try again when it finishes.</span></div>`;
  }
  const evo = dashboard.latestEvolution();
  if (!evo) return "";
  const removals = Object.entries(evo.removed_per_model)
    .map(([model, n]) => `<li><span class="mono">${escapeHtml(model)}</span> removed ${n}</li>`)
    .join("");
  return `
  <h3>Last evolution round</h3>
  <ul class="evo">
    <li>appended ${evo.appended} confirmed quads</li>
    <li>blocklisted ${evo.blocklisted} rejected quads</li>
    ${removals}
  </ul>`;
}

function dashboardView(): string {
  const blockTotal = dashboard.blocklistTotal;
  return `
  <div class="dash-grid">
    <section class="panel">
      <h3>Overall per iteration</h3>
      ${trendsTable()}
      ${modelTable()}
    </section>
    <aside class="panel">
      <h3>Blocklist</h3>
      <p class="big-number">${blockTotal === null ? "–" : blockTotal}</p>
      <p class="dim">phrases excluded from every store</p>
      ${evolutionPanel()}
      <button data-action="evolve" class="primary" ${queue.reviewedCount === 0 ? "disabled" : ""}>Evolve now</button>
    </aside>
  </div>`;
}

function render(): void {
  const root = document.getElementById("app");
  if (!root) return;
  let body: string;
  if (state.view === "settings") body = settingsView();
  else if (state.view === "dashboard") body = dashboardView();
  else body = reviewView();
  const loading = state.loading ? `<div class="banner info"><span>${escapeHtml(state.loading)}…</span></div>` : "";
  root.innerHTML = `${headerView()}${errorBanner()}${outboxBanner()}${loading}<main>${body}</main>`;
}

// --------------------------------------------------------------- wiring

function onClick(event: Event): void {
  const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
  if (!target) return;
  const action = target.dataset.action;
  if (action === "verdict") {
    giveVerdict(target.dataset.verdict as Verdict);
  } else if (action === "sort") {
    queue.toggleOrder();
    render();
  } else if (action === "evolve") {
    void runEvolution();
  } else if (action === "flush") {
    void flushOutbox();
  } else if (action === "retry") {
    const retry = state.retry;
    clearError();
    retry?.();
  } else if (action === "view") {
    state.view = target.dataset.view as View;
    render();
  }
}

function onKey(event: KeyboardEvent): void {
  const el = event.target as HTMLElement;
  if (el.tagName === "INPUT" || el.tagName === "TEXTAREA" || el.isContentEditable) return;
  if (state.view !== "review") return;
  if (event.key === "c" || event.key === "C") giveVerdict("causal");
  else if (event.key === "n" || event.key === "N") giveVerdict("non_causal");
  else if (event.key === "s" || event.key === "S") {
    queue.toggleOrder();
    render();
  }
}

function onSubmit(event: Event): void {
  const form = event.target as HTMLFormElement;
  if (form.id !== "settings-form") return;
  event.preventDefault();
  const data = new FormData(form);
  const cfg: StoredConfig = {
    baseUrl: String(data.get("baseUrl") ?? "").trim(),
    token: String(data.get("token") ?? "").trim(),
  };
  saveConfig(cfg);
  void boot(cfg);
}

function onChange(event: Event): void {
  const el = event.target as HTMLElement;
  if (el.id === "run-select") {
    switchRun((el as HTMLSelectElement).value);
  } else if (el.id === "reviewer-input") {
    localStorage.setItem(REVIEWER_KEY, (el as HTMLInputElement).value.trim() || "expert");
  }
}

export function start(): void {
  document.addEventListener("click", onClick);
  document.addEventListener("keydown", onKey);
  document.addEventListener("submit", onSubmit);
  document.addEventListener("change", onChange);
  const cfg = loadConfig();
  if (cfg) {
    void boot(cfg);
  } else {
    state.view = "settings";
    render();
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  start();
}
