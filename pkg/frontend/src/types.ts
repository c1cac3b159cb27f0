export interface ModelInfo {
  model_id: string;
  display_name: string;
  open_source: boolean;
}

export interface Source {
  doc_id: string;
  chunk_index: number;
  score: number;
}

export interface ChatResponse {
  session_id: string;
  answer: string;
  sources: Source[];
  latency_ms: number;
}

export interface HealthResponse {
  status: "ok" | "degraded";
  store_count: number;
  dim: number;
}

export interface Turn {
  question: string;
  answer: string;
  sources: Source[];
  latency_ms: number;
}

export interface ViewState {
  sessionId: string | null;
  selectedModel: string | null;
  models: ModelInfo[];
  turns: Turn[];
  pending: boolean;
  error: string | null;
}
