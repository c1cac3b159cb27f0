import type { ChatResponse, ModelInfo, Turn, ViewState } from "./types.js";

/** Pure view-state transitions. Turns are append-only; `pending` is true
 *  exactly between request dispatch and response/error. */

export function initialState(): ViewState {
  return {
    sessionId: null,
    selectedModel: null,
    models: [],
    turns: [],
    pending: false,
    error: null,
  };
}

export function modelsLoaded(state: ViewState, models: ModelInfo[]): ViewState {
  const stillValid = models.some((m) => m.model_id === state.selectedModel);
  return {
    ...state,
    models,
    selectedModel: stillValid ? state.selectedModel : models[0]?.model_id ?? null,
    error: models.length === 0 ? "nenhum modelo disponível no servidor" : null,
  };
}

export function modelsFailed(state: ViewState, message: string): ViewState {
  return { ...state, models: [], selectedModel: null, error: message };
}

export function selectModel(state: ViewState, modelId: string): ViewState {
  if (!state.models.some((m) => m.model_id === modelId)) return state;
  return { ...state, selectedModel: modelId };
}

export function sendStarted(state: ViewState): ViewState {
  if (state.pending || !state.selectedModel) return state;
  return { ...state, pending: true, error: null };
}

export function sendSucceeded(
  state: ViewState,
  question: string,
  response: ChatResponse
): ViewState {
  const turn: Turn = {
    question,
    answer: response.answer,
    sources: response.sources,
    latency_ms: response.latency_ms,
  };
  return {
    ...state,
    sessionId: response.session_id,
    turns: [...state.turns, turn],
    pending: false,
    error: null,
  };
}

export function sendFailed(state: ViewState, message: string): ViewState {
  return { ...state, pending: false, error: message };
}

export function newConversation(state: ViewState): ViewState {
  return { ...state, sessionId: null, turns: [], pending: false, error: null };
}
