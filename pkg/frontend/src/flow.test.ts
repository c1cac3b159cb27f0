/** UI flow against a mock-backed service: the fetch stub answers with the
 *  exact /v1 wire shapes the backend produces. */

import { afterEach, describe, expect, it, vi } from "vitest";

import { fetchModels, sendChat } from "./api.js";
import { renderModelOptions, renderTurns } from "./render.js";
import {
  initialState,
  modelsLoaded,
  sendFailed,
  sendStarted,
  sendSucceeded,
} from "./state.js";
import type { ViewState } from "./types.js";

const SERVICE_MODELS = [
  { model_id: "openai/gpt-4o-mini", display_name: "GPT 4o", open_source: false },
  { model_id: "deepseek/deepseek-r1", display_name: "DeepSeek R1", open_source: true },
  { model_id: "meta-llama/llama-4-scout", display_name: "LLama 4 Scout", open_source: true },
  { model_id: "google/gemini-2.0-flash-001", display_name: "Gemini 2.0 Flash", open_source: false },
  { model_id: "google/gemma-3n-e4b-it", display_name: "Gemma 3n", open_source: true },
  { model_id: "microsoft/phi-4-reasoning", display_name: "Phi 4", open_source: true },
  { model_id: "qwen/qwen3-235b-a22b", display_name: "Qwen3-235b", open_source: true },
];

const CHAT_REPLY = {
  session_id: "6f3a2b",
  answer: "A renovação é feita pelo portal do aluno.",
  sources: [
    { doc_id: "matricula.md", chunk_index: 0, score: 0.91 },
    { doc_id: "matricula.md", chunk_index: 1, score: 0.63 },
  ],
  latency_ms: 412,
};

function mockService(failChat = false) {
  return vi.fn(async (url: RequestInfo | URL) => {
    const path = String(url);
    if (path.endsWith("/v1/models")) {
      return new Response(JSON.stringify(SERVICE_MODELS), { status: 200 });
    }
    if (path.endsWith("/v1/chat")) {
      if (failChat) {
        return new Response(
          JSON.stringify({ error: "provider_error", detail: "stage=generation" }),
          { status: 502 }
        );
      }
      return new Response(JSON.stringify(CHAT_REPLY), { status: 200 });
    }
    return new Response("{}", { status: 404 });
  });
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("UI flow against the mock-backed service", () => {
  it("model list renders 7 entries", async () => {
    vi.stubGlobal("fetch", mockService());
    const state = modelsLoaded(initialState(), await fetchModels());
    const html = renderModelOptions(state.models, state.selectedModel);
    expect(html.match(/<option/g)).toHaveLength(7);
    expect(html).toContain("GPT 4o");
    expect(html).toContain("Phi 4 [open source]");
  });

  it("a send/receive cycle appends exactly one turn with sources and latency badge", async () => {
    vi.stubGlobal("fetch", mockService());
    let state: ViewState = modelsLoaded(initialState(), await fetchModels());
    state = sendStarted(state);
    const reply = await sendChat(state.selectedModel!, "como renovo a matrícula?", null);
    state = sendSucceeded(state, "como renovo a matrícula?", reply);

    expect(state.turns).toHaveLength(1);
    expect(state.sessionId).toBe("6f3a2b");
    const html = renderTurns(state.turns);
    expect(html).toContain("[matricula.md#0]");
    expect(html).toContain("[matricula.md#1]");
    expect(html).toContain("412 ms");
    expect(html).toContain("portal do aluno");
  });

  it("error responses leave history unchanged", async () => {
    vi.stubGlobal("fetch", mockService());
    let state: ViewState = modelsLoaded(initialState(), await fetchModels());
    const reply = await sendChat(state.selectedModel!, "primeira", null);
    state = sendSucceeded(sendStarted(state), "primeira", reply);
    const historyBefore = renderTurns(state.turns);

    vi.stubGlobal("fetch", mockService(true));
    state = sendStarted(state);
    const failure = await sendChat(
      state.selectedModel!,
      "segunda",
      state.sessionId
    ).catch((e) => e);
    state = sendFailed(state, String(failure));

    expect(state.turns).toHaveLength(1);
    expect(renderTurns(state.turns)).toBe(historyBefore);
    expect(state.pending).toBe(false);
    expect(state.error).toContain("provider_error");
  });
});
