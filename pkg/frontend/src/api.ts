// Typed fetch client for the clause recommendation service.

import type {
  ClausePayload,
  RecommendationsResponse,
  RelevantTypesResponse,
  SessionLogResponse,
  SessionState,
} from './types.js';

export class ApiError extends Error {
  readonly status: number;
  readonly detail: string;
  readonly currentRevision: number | null;

  constructor(status: number, detail: string, currentRevision: number | null = null) {
    super(`${status}: ${detail}`);
    this.status = status;
    this.detail = detail;
    this.currentRevision = currentRevision;
  }

  get isConflict(): boolean {
    return this.status === 409;
  }
}

export interface RecommendationParams {
  type: string;
  mode?: 'retrieve' | 'generate';
  variant?: 'i' | 'ii';
  topN?: number;
}

export class ClausekitClient {
  constructor(readonly baseUrl: string) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      headers: { 'Content-Type': 'application/json' },
      ...init,
    });
    const body = await response.json();
    if (!response.ok) {
      // error payloads are wrapped: {"detail": {"error", "current_revision"?, ...}}
      const detail = body?.detail ?? {};
      throw new ApiError(
        response.status,
        typeof detail === 'string' ? detail : (detail.error ?? 'request failed'),
        typeof detail === 'object' && detail?.current_revision != null
          ? Number(detail.current_revision)
          : null,
      );
    }
    return body as T;
  }

  createSession(clauses: ClausePayload[] = []): Promise<SessionState> {
    return this.request<SessionState>('/sessions', {
      method: 'POST',
      body: JSON.stringify({ clauses }),
    });
  }

  getSession(sessionId: string): Promise<SessionState> {
    return this.request<SessionState>(`/sessions/${sessionId}`);
  }

  addClause(sessionId: string, clause: ClausePayload, revision: number): Promise<SessionState> {
    return this.request<SessionState>(`/sessions/${sessionId}/clauses`, {
      method: 'POST',
      body: JSON.stringify({ ...clause, revision }),
    });
  }

  removeClause(sessionId: string, index: number, revision: number): Promise<SessionState> {
    return this.request<SessionState>(
      `/sessions/${sessionId}/clauses/${index}?revision=${revision}`,
      { method: 'DELETE' },
    );
  }

  accept(sessionId: string, type: string, text: string, revision: number): Promise<SessionState> {
    return this.request<SessionState>(`/sessions/${sessionId}/accept`, {
      method: 'POST',
      body: JSON.stringify({ type, text, revision }),
    });
  }

  relevantTypes(sessionId: string, methods?: string[]): Promise<RelevantTypesResponse> {
    const query = methods && methods.length ? `?methods=${methods.join(',')}` : '';
    return this.request<RelevantTypesResponse>(`/sessions/${sessionId}/relevant-types${query}`);
  }

  recommendations(
    sessionId: string,
    params: RecommendationParams,
  ): Promise<RecommendationsResponse> {
    const search = new URLSearchParams({ type: params.type });
    if (params.mode) search.set('mode', params.mode);
    if (params.variant) search.set('variant', params.variant);
    if (params.topN != null) search.set('top_n', String(params.topN));
    return this.request<RecommendationsResponse>(
      `/sessions/${sessionId}/recommendations?${search.toString()}`,
    );
  }

  log(sessionId: string): Promise<SessionLogResponse> {
    return this.request<SessionLogResponse>(`/sessions/${sessionId}/log`);
  }
}
