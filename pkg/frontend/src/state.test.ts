import { describe, expect, it } from "vitest";

import {
  initialState,
  modelsFailed,
  modelsLoaded,
  newConversation,
  selectModel,
  sendFailed,
  sendStarted,
  sendSucceeded,
} from "./state.js";
import type { ChatResponse, ModelInfo } from "./types.js";

const MODELS: ModelInfo[] = [
  { model_id: "a/one", display_name: "One", open_source: true },
  { model_id: "b/two", display_name: "Two", open_source: false },
];

const RESPONSE: ChatResponse = {
  session_id: "sess-1",
  answer: "resposta",
  sources: [{ doc_id: "doc.md", chunk_index: 0, score: 0.9 }],
  latency_ms: 120,
};

describe("model loading", () => {
  it("selects the first model by default", () => {
    const state = modelsLoaded(initialState(), MODELS);
    expect(state.selectedModel).toBe("a/one");
    expect(state.models).toHaveLength(2);
  });

  it("keeps a still-valid selection on reload", () => {
    let state = modelsLoaded(initialState(), MODELS);
    state = selectModel(state, "b/two");
    state = modelsLoaded(state, MODELS);
    expect(state.selectedModel).toBe("b/two");
  });

  it("failure clears models and records the error", () => {
    const state = modelsFailed(initialState(), "rede fora");
    expect(state.models).toHaveLength(0);
    expect(state.error).toBe("rede fora");
  });

  it("an empty registry disables sending and carries a notice", () => {
    const state = modelsLoaded(initialState(), []);
    expect(state.selectedModel).toBeNull(); // send path requires a model
    expect(state.error).toContain("nenhum modelo");
  });

  it("ignores selection of unknown models", () => {
    const state = modelsLoaded(initialState(), MODELS);
    expect(selectModel(state, "nope").selectedModel).toBe("a/one");
  });
});

describe("send cycle", () => {
  function ready() {
    return modelsLoaded(initialState(), MODELS);
  }

  it("pending is true exactly between dispatch and response", () => {
    let state = ready();
    state = sendStarted(state);
    expect(state.pending).toBe(true);
    state = sendSucceeded(state, "pergunta", RESPONSE);
    expect(state.pending).toBe(false);
  });

  it("success appends exactly one turn and stores the session", () => {
    let state = sendStarted(ready());
    state = sendSucceeded(state, "pergunta", RESPONSE);
    expect(state.turns).toHaveLength(1);
    expect(state.turns[0].question).toBe("pergunta");
    expect(state.turns[0].sources).toHaveLength(1);
    expect(state.turns[0].latency_ms).toBe(120);
    expect(state.sessionId).toBe("sess-1");
  });

  it("turns are append-only across sends", () => {
    let state = ready();
    state = sendSucceeded(sendStarted(state), "primeira", RESPONSE);
    const firstTurns = state.turns;
    state = sendSucceeded(sendStarted(state), "segunda", {
      ...RESPONSE,
      answer: "outra",
    });
    expect(state.turns).toHaveLength(2);
    expect(state.turns[0]).toEqual(firstTurns[0]);
    expect(state.turns.map((t) => t.question)).toEqual(["primeira", "segunda"]);
  });

  it("failure re-enables input and leaves history unchanged", () => {
    let state = sendSucceeded(sendStarted(ready()), "primeira", RESPONSE);
    const before = state.turns;
    state = sendFailed(sendStarted(state), "502: provider_error");
    expect(state.pending).toBe(false);
    expect(state.turns).toEqual(before);
    expect(state.error).toContain("provider_error");
  });

  it("no overlapping requests: sendStarted is a no-op while pending", () => {
    const first = sendStarted(ready());
    expect(sendStarted(first)).toBe(first);
  });

  it("model switch mid-conversation applies to the next request only", () => {
    let state = sendSucceeded(sendStarted(ready()), "primeira", RESPONSE);
    state = selectModel(state, "b/two");
    expect(state.turns).toHaveLength(1); // history untouched
    expect(state.selectedModel).toBe("b/two");
    expect(state.sessionId).toBe("sess-1"); // same conversation
  });
});

describe("new conversation", () => {
  it("clears session and turns but keeps the selected model", () => {
    let state = modelsLoaded(initialState(), MODELS);
    state = selectModel(state, "b/two");
    state = sendSucceeded(sendStarted(state), "pergunta", RESPONSE);
    state = newConversation(state);
    expect(state.turns).toHaveLength(0);
    expect(state.sessionId).toBeNull();
    expect(state.selectedModel).toBe("b/two");
  });
});
