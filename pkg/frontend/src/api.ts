/**
 * Typed client for the edit-session HTTP API.
 *
 * Mutations carry If-Match with the expected revision; a 409 surfaces as
 * ApiError(status=409) so callers can refresh and replay.
 */

import type {
  CompositeResponse,
  ExportedSession,
  GenerateResponse,
  HealthResponse,
  LayerCreatePayload,
  LayerUpdatePayload,
  MutateResponse,
  SessionSummary,
} from "./types";

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = fetch,
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    ifMatch?: number,
  ): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["Content-Type"] = "application/json";
    if (ifMatch !== undefined) headers["If-Match"] = String(ifMatch);
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const parsed = (await response.json()) as { detail?: unknown };
        if (parsed.detail !== undefined) detail = JSON.stringify(parsed.detail);
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  health(): Promise<HealthResponse> {
    return this.request("GET", "/healthz");
  }

  createSession(imageB64: string): Promise<SessionSummary> {
    return this.request("POST", "/sessions", { image_b64: imageB64 });
  }

  getSession(id: string): Promise<SessionSummary> {
    return this.request("GET", `/sessions/${id}`);
  }

  addLayer(id: string, payload: LayerCreatePayload, ifMatch?: number): Promise<MutateResponse> {
    return this.request("POST", `/sessions/${id}/layers`, payload, ifMatch);
  }

  updateLayer(
    id: string,
    layerId: string,
    payload: LayerUpdatePayload,
    ifMatch?: number,
  ): Promise<MutateResponse> {
    return this.request("PATCH", `/sessions/${id}/layers/${layerId}`, payload, ifMatch);
  }

  deleteLayer(id: string, layerId: string, ifMatch?: number): Promise<MutateResponse> {
    return this.request("DELETE", `/sessions/${id}/layers/${layerId}`, undefined, ifMatch);
  }

  composite(id: string): Promise<CompositeResponse> {
    return this.request("POST", `/sessions/${id}/composite`);
  }

  generate(id: string, seed: number, steps?: number): Promise<GenerateResponse> {
    return this.request("POST", `/sessions/${id}/generate`, { seed, steps: steps ?? null });
  }

  exportSession(id: string): Promise<ExportedSession> {
    return this.request("GET", `/sessions/${id}/export`);
  }

  importSession(payload: ExportedSession): Promise<SessionSummary> {
    return this.request("POST", "/sessions/import", payload);
  }
}
