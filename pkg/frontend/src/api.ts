import type { ChatResponse, HealthResponse, ModelInfo } from "./types.js";

declare global {
  interface Window {
    SABIA_BASE_URL?: string;
  }
}

/** Backend origin; set window.SABIA_BASE_URL before loading, or leave empty
 *  to call the page's own origin. */
export function baseUrl(): string {
  if (typeof window !== "undefined" && window.SABIA_BASE_URL) {
    return window.SABIA_BASE_URL.replace(/\/+$/, "");
  }
  return "";
}

export class ApiError extends Error {
  constructor(
    message: string,
    public readonly status: number,
    public readonly code: string
  ) {
    super(message);
  }
}

async function errorFrom(response: Response): Promise<ApiError> {
  let code = "http_error";
  let detail = response.statusText;
  try {
    const body = await response.json();
    if (typeof body.error === "string") code = body.error;
    if (typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep defaults
  }
  return new ApiError(`${code}: ${detail}`, response.status, code);
}

export async function fetchModels(): Promise<ModelInfo[]> {
  const response = await fetch(`${baseUrl()}/v1/models`);
  if (!response.ok) throw await errorFrom(response);
  return response.json();
}

export async function fetchHealth(): Promise<HealthResponse> {
  const response = await fetch(`${baseUrl()}/v1/health`);
  if (!response.ok) throw await errorFrom(response);
  return response.json();
}

export async function sendChat(
  modelId: string,
  message: string,
  sessionId: string | null
): Promise<ChatResponse> {
  const payload: Record<string, string> = { model_id: modelId, message };
  if (sessionId) payload.session_id = sessionId;
  const response = await fetch(`${baseUrl()}/v1/chat`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(payload),
  });
  if (!response.ok) throw await errorFrom(response);
  return response.json();
}
