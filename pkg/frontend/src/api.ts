/** Typed fetch client for the session service. All numbers come from the server. */

import type {
  CostLevelsJson,
  HistoryJson,
  ObserveResponseJson,
  ProposalJson,
  SessionCreateBody,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`${status}: ${detail}`);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const res = await fetch(url, {
    headers: { "content-type": "application/json" },
    ...init,
  });
  const body = await res.json().catch(() => ({}));
  if (!res.ok) {
    const detail =
      typeof body?.detail === "string" ? body.detail : JSON.stringify(body?.detail ?? body);
    throw new ApiError(res.status, detail);
  }
  return body as T;
}

export class SessionApi {
  constructor(public baseUrl: string = "") {}

  health(): Promise<{ status: string }> {
    return request(`${this.baseUrl}/healthz`);
  }

  createSession(body: SessionCreateBody): Promise<{ session_id: string; state: string }> {
    return request(`${this.baseUrl}/sessions`, { method: "POST", body: JSON.stringify(body) });
  }

  propose(sessionId: string): Promise<ProposalJson> {
    return request(`${this.baseUrl}/sessions/${sessionId}/propose`, { method: "POST" });
  }

  observe(
    sessionId: string,
    performanceScore: number,
    preferenceScore: number,
  ): Promise<ObserveResponseJson> {
    return request(`${this.baseUrl}/sessions/${sessionId}/observe`, {
      method: "POST",
      body: JSON.stringify({
        performance_score: performanceScore,
        preference_score: preferenceScore,
      }),
    });
  }

  reweightCosts(sessionId: string, levels: CostLevelsJson): Promise<unknown> {
    return request(`${this.baseUrl}/sessions/${sessionId}/costs`, {
      method: "POST",
      body: JSON.stringify({ levels }),
    });
  }

  history(sessionId: string): Promise<HistoryJson> {
    return request(`${this.baseUrl}/sessions/${sessionId}/history`);
  }
}
