// Typed client for the run API. This module is the only place the UI
// talks to the network, which keeps the endpoint audit in the e2e test
// honest.

export interface PendingReview {
  step: number;
  unit: string;
  action_name: string | null;
  artifact_text: string;
}

export interface Manifest {
  run_id: string;
  created: string;
  description: string;
  status: "running" | "awaiting-human-feedback" | "done" | "failed";
  current_step: number;
  error: string | null;
  degraded: boolean;
  files: Record<string, string>;
  config: { start_step: string; [key: string]: unknown };
  pending_review?: PendingReview;
}

export interface FeedbackInfo {
  source: string;
  status: string;
  rounds: number;
  text?: string;
}

export interface ConstructionEntry {
  name: string;
  validator_messages: number;
  accepted_flawed: boolean;
  feedback: FeedbackInfo | null;
  block: string;
}

export interface StepRecord {
  step: string;
  number: number;
  artifact: Record<string, unknown> | null;
  artifact_text: string;
  feedback: FeedbackInfo | null;
  validator_rounds: Array<{ checked_category: string }>;
  construction: { passes: Array<{ actions: ConstructionEntry[] }> } | null;
  warnings: string[];
  flags: Record<string, unknown>;
  pending: Record<string, unknown> | null;
  superseded: boolean;
  complete: boolean;
}

export interface StepResponse {
  step: StepRecord | null;
  superseded: StepRecord[];
}

export interface PlanResponse {
  outcome: "plan" | "unsolvable";
  plan?: string;
  message?: string;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  let response: Response;
  try {
    response = await fetch(url, init);
  } catch (err) {
    throw new ApiError(0, "network", `network error: ${String(err)}`);
  }
  const body = await response.json().catch(() => ({}));
  if (!response.ok) {
    throw new ApiError(
      response.status,
      (body as { code?: string }).code ?? "unknown",
      (body as { message?: string }).message ?? response.statusText,
    );
  }
  return body as T;
}

export class ApiClient {
  constructor(readonly base: string = "") {}

  listRuns(): Promise<{ runs: Manifest[] }> {
    return request(`${this.base}/runs`);
  }

  createRun(body: Record<string, unknown>): Promise<Manifest> {
    return request(`${this.base}/runs`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  getRun(runId: string): Promise<Manifest> {
    return request(`${this.base}/runs/${runId}`);
  }

  getStep(runId: string, step: number): Promise<StepResponse> {
    return request(`${this.base}/runs/${runId}/steps/${step}`);
  }

  submitFeedback(
    runId: string,
    step: number,
    body: { approve?: boolean; text?: string },
  ): Promise<Manifest> {
    return request(`${this.base}/runs/${runId}/steps/${step}/feedback`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  resume(runId: string, step: number, artifact: string): Promise<Manifest> {
    return request(`${this.base}/runs/${runId}/resume`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ step, artifact }),
    });
  }

  getPlan(runId: string): Promise<PlanResponse> {
    return request(`${this.base}/runs/${runId}/plan`);
  }

  getFile(runId: string, name: string): Promise<{ name: string; text: string }> {
    return request(`${this.base}/runs/${runId}/files/${name}`);
  }

  getUsage(runId: string): Promise<{ steps: Record<string, { total: number }>; grand_total: number }> {
    return request(`${this.base}/runs/${runId}/usage`);
  }
}
