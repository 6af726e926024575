// Wire types for the causemine HTTP API. Field names mirror the JSON
// payloads exactly; the UI renders these values verbatim and never
// recomputes a metric the server already reported.

export interface RunSummary {
  run_id: string;
  stage: string;
  status: string;
  iteration: number;
  model_ids: string[];
  created_at: string;
}

export interface ModelVote {
  model_id: string;
  flagged: boolean;
  score: number | null;
}

export interface ConceptRef {
  cui: string;
  name: string;
  semtypes: string[];
}

export type ReviewStatus = "pending" | "reviewed";

export interface Candidate {
  quad_id: string;
  subject: string;
  trigger: string;
  object: string;
  text: string;
  sentences: string[];
  sentence_texts: string[];
  degree: number;
  confidence: number;
  per_model: ModelVote[];
  status: ReviewStatus;
  subject_concepts?: ConceptRef[];
  object_concepts?: ConceptRef[];
}

export interface CandidatePage {
  items: Candidate[];
  total: number;
  offset: number;
  limit: number;
}

// Percentages arrive pre-rounded; null marks an undefined ratio.
export interface MetricsRow {
  label: string;
  tp: number;
  fp: number;
  fn: number;
  tn: number;
  predicted_positive: number;
  predicted_negative: number;
  accuracy: number | null;
  precision: number | null;
  recall: number | null;
}

export interface DegreeBlock {
  histogram: Record<string, number>;
  gold_per_degree: Record<string, number>;
  universe_size: number;
  gold_in_universe: number;
  groups: MetricsRow[];
}

export interface EvaluationReport {
  run_id: string;
  dataset: string;
  stage: string;
  iteration: number;
  universe: { kind: string; size: number };
  gold_size: number;
  rows: MetricsRow[];
  degree?: DegreeBlock;
}

export interface EvolutionSummary {
  appended: number;
  blocklisted: number;
  removed_per_model: Record<string, number>;
}

export interface EvolveReport extends EvaluationReport {
  evolution: EvolutionSummary;
}

export type Verdict = "causal" | "non_causal";

export interface FeedbackBody {
  quad_id: string;
  verdict: Verdict;
  expert_id: string;
  note?: string;
  confidence_override?: number;
}

export interface FeedbackAck {
  accepted: boolean;
  quad_id: string;
}

export interface BlocklistEntry {
  phrase: string;
  subject: string;
  trigger: string;
  object: string;
  added_at: string;
}

export interface BlocklistPage {
  entries: BlocklistEntry[];
  total: number;
}
