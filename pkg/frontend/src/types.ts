// Payload shapes of the clause recommendation service. Field names mirror
// the JSON bodies exactly, so responses can be used without remapping.

export interface ClausePayload {
  label: string;
  text: string;
}

export interface SessionState {
  id: string;
  revision: number;
  clauses: ClausePayload[];
  config_fingerprint: string;
}

/** One relevance method's verdict for a (session, clause type) pair. */
export interface MethodDecision {
  target: string;
  method: string;
  score: number;
  relevant: boolean;
  threshold?: number;
  k?: number;
}

export interface TypeCandidate {
  type: string;
  rank_score: number;
  ranked_by: string;
  decisions: Record<string, MethodDecision>;
}

export interface RelevantTypesResponse {
  id: string;
  revision: number;
  candidates: TypeCandidate[];
  message: string | null;
  config_fingerprint: string;
}

export interface RetrievedClause {
  label: string;
  text: string;
  score: number;
  source_contract: string;
  rank: number;
}

export interface GeneratedClause {
  text: string;
  tokens: string[];
  truncated: boolean;
}

export interface RecommendationsResponse {
  id: string;
  revision: number;
  type: string;
  mode: string;
  variant: string;
  top_n: number;
  warning: string | null;
  retrieved: RetrievedClause[];
  generated: GeneratedClause | null;
  config_fingerprint: string;
}

export interface MutationLogEntry {
  op: 'add' | 'remove' | 'accept';
  label?: string;
  text?: string;
  index?: number;
  revision: number;
}

export interface SessionLogResponse {
  id: string;
  revision: number;
  log: MutationLogEntry[];
  config_fingerprint: string;
}

/** Error bodies arrive as the `detail` of the HTTP error response. */
export interface ErrorPayload {
  error: string;
  config_fingerprint: string;
  current_revision?: number;
}
