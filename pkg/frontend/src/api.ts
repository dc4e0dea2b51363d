/**
 * Typed client for the session service HTTP API.
 *
 * The console talks to the service exclusively through these calls; it never
 * computes diagnoses or hypotheses itself.
 */

export interface ServiceConfig {
  baseUrl: string;
  apiToken?: string;
}

export interface HypothesisEntry {
  name: string;
  score: number;
}

export interface HypothesisPanel {
  diseases: HypothesisEntry[];
  shared_attributes: string[];
}

export interface ActionPayload {
  kind: 'question' | 'diagnosis';
  turn: number;
  status: string;
  question?: string;
  diagnoses?: string[];
  hypotheses?: HypothesisPanel;
}

export interface CreatedPayload {
  session_id: string;
  status: string;
  turn: number;
  greeting?: string;
  opening?: string;
  action?: ActionPayload;
}

export interface SessionPayload {
  session_id: string;
  status: string;
  turn: number;
  max_turns: number;
  history: [string, string][];
  show_hypotheses: boolean;
  profile_id: string | null;
  ratings: RatingSet | null;
  gold_diseases?: string[];
}

export interface RatingSet {
  essentiality: number;
  flow: number;
  authenticity: number;
  comments: string;
}

export interface CreateOptions {
  profile_id?: string;
  show_hypotheses?: boolean;
  n?: number;
  tau?: number;
  max_turns?: number;
  seed?: number;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

function headers(cfg: ServiceConfig, json: boolean): Record<string, string> {
  const out: Record<string, string> = {};
  if (json) out['Content-Type'] = 'application/json';
  if (cfg.apiToken) out['Authorization'] = `Bearer ${cfg.apiToken}`;
  return out;
}

async function request<T>(
  cfg: ServiceConfig,
  method: string,
  path: string,
  body?: unknown,
): Promise<T> {
  const response = await fetch(`${cfg.baseUrl}${path}`, {
    method,
    headers: headers(cfg, body !== undefined),
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

export function createSession(
  cfg: ServiceConfig,
  options: CreateOptions = {},
): Promise<CreatedPayload> {
  return request<CreatedPayload>(cfg, 'POST', '/sessions', options);
}

export function postMessage(
  cfg: ServiceConfig,
  sessionId: string,
  text: string,
): Promise<ActionPayload> {
  return request<ActionPayload>(cfg, 'POST', `/sessions/${sessionId}/messages`, { text });
}

export function getSession(cfg: ServiceConfig, sessionId: string): Promise<SessionPayload> {
  return request<SessionPayload>(cfg, 'GET', `/sessions/${sessionId}`);
}

export function submitRatings(
  cfg: ServiceConfig,
  sessionId: string,
  ratings: RatingSet,
): Promise<{ ok: boolean }> {
  return request<{ ok: boolean }>(cfg, 'POST', `/sessions/${sessionId}/ratings`, ratings);
}

/**
 * Raw transcript bytes, untouched: the export control writes exactly this
 * string to disk so the download is byte-identical to the service payload.
 */
export async function fetchTranscriptRaw(
  cfg: ServiceConfig,
  sessionId: string,
): Promise<string> {
  const response = await fetch(`${cfg.baseUrl}/sessions/${sessionId}/transcript`, {
    headers: headers(cfg, false),
  });
  if (!response.ok) {
    throw new ApiError(response.status, response.statusText);
  }
  return await response.text();
}
