// JSON payload shapes of the /api/ contract, mirrored field for field.

export interface SnapshotInfo {
  snapshot_id: number;
  parent_snapshot_id: number | null;
  created_utc: string;
  config_hash: string;
  files: string[];
}

export interface TopTerm {
  term: string;
  probability: number;
}

export interface TopicEntry {
  topic: number;
  name: string | null;
  group_index: number;
  group: string;
  top_terms: TopTerm[];
}

export interface TopicsPayload {
  snapshot_id: number;
  groups: string[];
  topics: TopicEntry[];
}

export interface ReviewSample {
  post_id: string;
  theta_value: number;
  selection: "TopRanked" | "Random";
  text: string | null;
  month: string | null;
}

export interface SamplesPayload {
  snapshot_id: number;
  topic: number;
  seed: number;
  flagged: boolean;
  samples: ReviewSample[];
}

export interface FeatureLists {
  include_tokens: string[];
  exclude_tokens: string[];
}

export interface FeatureUpdate {
  add_include?: string[];
  add_exclude?: string[];
  remove?: string[];
}

export type TrendSource = "lda" | "lexicon";

export interface TrendsPayload {
  snapshot_id: number;
  source: TrendSource;
  normalize: boolean;
  months: string[];
  labels: string[];
  values: number[][];
}

export interface ExternalPayload {
  snapshot_id: number;
  months: string[];
  total_cases: number[];
  new_cases: number[];
  people_vaccinated: number[];
  carried_forward_months: string[];
}

export interface CorrelationEntry {
  lda_group: string;
  lexicon_topic: string;
  r?: number;
  error?: string;
}

export interface CorrelationsPayload {
  snapshot_id: number;
  correlations: CorrelationEntry[];
}

export interface PostDetail {
  post_id: string;
  month: string;
  text: string;
  flair_group: string;
  flair_source: string;
  lexicon_topics: string[];
}

export type JobState = "Queued" | "Running" | "Done" | "Failed";

export interface JobPayload {
  job_id: string;
  state: JobState;
  started_utc: string | null;
  finished_utc: string | null;
  snapshot_id: number | null;
  error: string | null;
}

export interface RetrainAccepted {
  job_id: string;
}

export interface GroupMapUpdate {
  groups: string[];
  assignment: Record<string, number>;
}
