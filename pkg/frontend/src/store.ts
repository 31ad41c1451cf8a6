// Observable drafting-session state with optimistic-concurrency handling.
//
// Every mutation sends the revision the UI last saw. When the service answers
// 409 (someone else changed the session first), the store refetches the
// authoritative state and surfaces a notice instead of failing.

import { ApiError, ClausekitClient } from './api.js';
import type {
  ClausePayload,
  RecommendationsResponse,
  SessionState,
  TypeCandidate,
} from './types.js';

export interface DraftState {
  session: SessionState | null;
  candidates: TypeCandidate[];
  /** Guidance from the service when it cannot suggest yet (e.g. empty draft). */
  message: string | null;
  selectedType: string | null;
  recommendations: RecommendationsResponse | null;
  busy: boolean;
  /** Transient banner: conflict explanations and request failures. */
  notice: string | null;
}

export type Listener = (state: DraftState) => void;

const CONFLICT_NOTICE = 'the draft changed elsewhere; showing the latest version';

export class DraftStore {
  private state: DraftState = {
    session: null,
    candidates: [],
    message: null,
    selectedType: null,
    recommendations: null,
    busy: false,
    notice: null,
  };
  private listeners: Listener[] = [];

  constructor(private readonly client: ClausekitClient) {}

  getState(): DraftState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    listener(this.state);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private set(patch: Partial<DraftState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  private get sessionId(): string {
    const session = this.state.session;
    if (!session) throw new Error('no active session');
    return session.id;
  }

  private get revision(): number {
    const session = this.state.session;
    if (!session) throw new Error('no active session');
    return session.revision;
  }

  async createSession(initial: ClausePayload[] = []): Promise<void> {
    this.set({ busy: true, notice: null });
    try {
      const session = await this.client.createSession(initial);
      this.set({ session, selectedType: null, recommendations: null });
      await this.refreshCandidates();
    } catch (err) {
      this.set({ notice: describe(err) });
    } finally {
      this.set({ busy: false });
    }
  }

  /** Refetch the authoritative session state and its type suggestions. */
  async refresh(): Promise<void> {
    const session = await this.client.getSession(this.sessionId);
    this.set({ session });
    await this.refreshCandidates();
  }

  private async refreshCandidates(): Promise<void> {
    const response = await this.client.relevantTypes(this.sessionId);
    const patch: Partial<DraftState> = {
      candidates: response.candidates,
      message: response.message,
    };
    // a selection that is no longer suggested (e.g. its clause was accepted)
    // would show stale recommendations, so drop it
    const selected = this.state.selectedType;
    if (selected && !response.candidates.some((c) => c.type === selected)) {
      patch.selectedType = null;
      patch.recommendations = null;
    }
    this.set(patch);
  }

  private async mutate(run: () => Promise<SessionState>): Promise<boolean> {
    this.set({ busy: true, notice: null });
    try {
      const session = await run();
      this.set({ session });
      await this.refreshCandidates();
      return true;
    } catch (err) {
      if (err instanceof ApiError && err.isConflict) {
        await this.refresh();
        this.set({ notice: CONFLICT_NOTICE });
      } else {
        this.set({ notice: describe(err) });
      }
      return false;
    } finally {
      this.set({ busy: false });
    }
  }

  addClause(label: string, text: string): Promise<boolean> {
    return this.mutate(() => this.client.addClause(this.sessionId, { label, text }, this.revision));
  }

  removeClause(index: number): Promise<boolean> {
    return this.mutate(() => this.client.removeClause(this.sessionId, index, this.revision));
  }

  /** Accept a recommended clause into the draft and clear the selection. */
  async acceptClause(type: string, text: string): Promise<boolean> {
    const ok = await this.mutate(() => this.client.accept(this.sessionId, type, text, this.revision));
    if (ok) this.set({ selectedType: null, recommendations: null });
    return ok;
  }

  /** Select a suggested type and fetch clause recommendations for it. */
  async selectType(type: string): Promise<void> {
    this.set({ busy: true, notice: null, selectedType: type, recommendations: null });
    try {
      const recommendations = await this.client.recommendations(this.sessionId, { type });
      this.set({ recommendations });
    } catch (err) {
      this.set({ notice: describe(err), selectedType: null });
    } finally {
      this.set({ busy: false });
    }
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return err.detail;
  return err instanceof Error ? err.message : String(err);
}
