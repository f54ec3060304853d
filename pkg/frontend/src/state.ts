/**
 * Session state: the server's summary plus a queue of pending edits.
 *
 * Nothing is applied locally without either a server acknowledgment or an
 * explicit pending marker.  Mutations send If-Match with the last known
 * revision; on a 409 the store refreshes itself from the server (one
 * refresh cycle converges to server state) and keeps the edit queued for
 * replay, exposed through `pendingEdits` so the UI can prompt.
 */

import { ApiClient, ApiError } from "./api";
import type { LayerCreatePayload, LayerUpdatePayload, SessionSummary } from "./types";

export type PendingEdit =
  | { op: "add"; payload: LayerCreatePayload; status: "unsynced" }
  | { op: "update"; layerId: string; payload: LayerUpdatePayload; status: "unsynced" }
  | { op: "delete"; layerId: string; status: "unsynced" };

export type Listener = (store: SessionStore) => void;

export class SessionStore {
  summary: SessionSummary | null = null;
  pendingEdits: PendingEdit[] = [];
  lastConflict: string | null = null;
  private listeners: Listener[] = [];

  constructor(private client: ApiClient) {}

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this);
  }

  get sessionId(): string {
    if (!this.summary) throw new Error("no active session");
    return this.summary.id;
  }

  get revision(): number {
    if (!this.summary) throw new Error("no active session");
    return this.summary.revision;
  }

  async open(imageB64: string): Promise<SessionSummary> {
    this.summary = await this.client.createSession(imageB64);
    this.pendingEdits = [];
    this.lastConflict = null;
    this.emit();
    return this.summary;
  }

  async adopt(summary: SessionSummary): Promise<void> {
    this.summary = summary;
    this.pendingEdits = [];
    this.lastConflict = null;
    this.emit();
  }

  async refresh(): Promise<SessionSummary> {
    this.summary = await this.client.getSession(this.sessionId);
    this.emit();
    return this.summary;
  }

  /**
   * Run one mutation with optimistic concurrency.  Returns true when the
   * edit is acknowledged; on a revision conflict the edit stays queued,
   * the store refreshes, and false is returned.
   */
  private async mutate(edit: PendingEdit): Promise<boolean> {
    this.pendingEdits.push(edit);
    this.emit();
    try {
      const revision = this.revision;
      if (edit.op === "add") {
        await this.client.addLayer(this.sessionId, edit.payload, revision);
      } else if (edit.op === "update") {
        await this.client.updateLayer(this.sessionId, edit.layerId, edit.payload, revision);
      } else {
        await this.client.deleteLayer(this.sessionId, edit.layerId, revision);
      }
      this.pendingEdits = this.pendingEdits.filter((e) => e !== edit);
      await this.refresh();
      return true;
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.lastConflict = err.detail;
        await this.refresh(); // one refresh converges to server state
        return false;
      }
      // Network failures keep the edit queued as unsynced and retryable.
      this.emit();
      throw err;
    }
  }

  addLayer(payload: LayerCreatePayload): Promise<boolean> {
    return this.mutate({ op: "add", payload, status: "unsynced" });
  }

  updateLayer(layerId: string, payload: LayerUpdatePayload): Promise<boolean> {
    return this.mutate({ op: "update", layerId, payload, status: "unsynced" });
  }

  deleteLayer(layerId: string): Promise<boolean> {
    return this.mutate({ op: "delete", layerId, status: "unsynced" });
  }

  /** Replay queued edits (after a conflict refresh or network recovery). */
  async replayPending(): Promise<number> {
    const queued = [...this.pendingEdits];
    this.pendingEdits = [];
    let applied = 0;
    for (const edit of queued) {
      if (await this.mutate(edit)) applied += 1;
    }
    return applied;
  }
}
