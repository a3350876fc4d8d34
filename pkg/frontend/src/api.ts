/** Thin typed client for the planner service. Every method is one
 * HTTP round-trip; no planning happens on this side of the wire. */

import type {
  ErrorBody,
  InstructionResult,
  OverlayCollection,
  OverlayLayer,
  SessionCreated,
  SessionDocument,
  StageOptionsBody,
  StageRequest,
  StageResult,
} from "./types.js";

/** The service answered with an error body ({error, kind}). */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly kind: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** The service could not be reached at all (connection refused, DNS,
 * aborted). Distinct from ApiError so the UI can offer a retry. */
export class NetworkError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "NetworkError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class PlannerClient {
  private readonly fetchImpl: FetchLike;

  constructor(
    readonly baseUrl: string,
    fetchImpl?: FetchLike,
  ) {
    this.fetchImpl = fetchImpl ?? ((input, init) => globalThis.fetch(input, init));
  }

  async createSession(): Promise<SessionCreated> {
    return this.requestJson<SessionCreated>("POST", "/sessions");
  }

  async session(sessionId: string): Promise<SessionDocument> {
    return this.requestJson<SessionDocument>("GET", `/sessions/${sessionId}`);
  }

  async sendInstruction(sessionId: string, text: string): Promise<InstructionResult> {
    return this.requestJson<InstructionResult>("POST", `/sessions/${sessionId}/instructions`, {
      text,
    });
  }

  async runStage(
    sessionId: string,
    stage: StageRequest,
    options: StageOptionsBody = {},
  ): Promise<StageResult> {
    return this.requestJson<StageResult>("POST", `/sessions/${sessionId}/stages`, {
      stage,
      options,
    });
  }

  async overlay(
    sessionId: string,
    layer: OverlayLayer,
    band?: string,
  ): Promise<OverlayCollection> {
    const query = band ? `?band=${encodeURIComponent(band)}` : "";
    return this.requestJson<OverlayCollection>(
      "GET",
      `/sessions/${sessionId}/overlays/${layer}${query}`,
    );
  }

  async exportMission(sessionId: string): Promise<string> {
    const response = await this.send("GET", `/sessions/${sessionId}/export`);
    const body = await response.text();
    if (!response.ok) {
      throw this.toApiError(response.status, body);
    }
    return body;
  }

  private async requestJson<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.send(method, path, body);
    const text = await response.text();
    if (!response.ok) {
      throw this.toApiError(response.status, text);
    }
    return JSON.parse(text) as T;
  }

  private async send(method: string, path: string, body?: unknown): Promise<Response> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    try {
      return await this.fetchImpl(this.baseUrl + path, init);
    } catch (cause) {
      throw new NetworkError(`planner service unreachable: ${String(cause)}`);
    }
  }

  private toApiError(status: number, text: string): ApiError {
    let parsed: Partial<ErrorBody> = {};
    try {
      parsed = JSON.parse(text) as ErrorBody;
    } catch {
      // non-JSON error body; fall through to the generic shape
    }
    return new ApiError(status, parsed.kind ?? "HTTPError", parsed.error ?? `HTTP ${status}`);
  }
}
