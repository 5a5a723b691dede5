// Thin fetch wrappers around the service API. No model logic here:
// the client displays what the server returns.

import type {
  DecisionsDoc,
  MatricesDoc,
  ReportDoc,
  ResolutionBody,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(path, init);
  if (!response.ok) {
    let code = `HTTP${response.status}`;
    let message = response.statusText;
    try {
      const body = await response.json();
      code = body.code ?? code;
      message = body.message ?? message;
    } catch {
      // non-JSON error body: keep the status text
    }
    throw new ApiError(response.status, code, message);
  }
  return (await response.json()) as T;
}

export function fetchProject(): Promise<Record<string, unknown>> {
  return request("/api/project");
}

export function fetchMatrices(): Promise<MatricesDoc> {
  return request("/api/matrices");
}

export function fetchDecisions(): Promise<DecisionsDoc> {
  return request("/api/decisions");
}

export function fetchVerify(): Promise<{
  synchronized: boolean;
  pending_decisions: number;
}> {
  return request("/api/verify");
}

export async function fetchRender(
  side: "alpha" | "beta",
  format: "dot" | "plantuml",
): Promise<string> {
  const response = await fetch(`/api/render/${side}?format=${format}`);
  if (!response.ok) {
    throw new ApiError(response.status, `HTTP${response.status}`, response.statusText);
  }
  return response.text();
}

export function postResolution(
  requestId: string,
  body: ResolutionBody,
): Promise<ReportDoc> {
  return request(`/api/decisions/${encodeURIComponent(requestId)}`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });
}
