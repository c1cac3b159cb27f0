import { fetchHealth, fetchModels, sendChat } from "./api.js";
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
import { renderError, renderHealth, renderModelOptions, renderTurns } from "./render.js";
import type { ViewState } from "./types.js";

const modelSelect = document.getElementById("model-select") as HTMLSelectElement;
const historyEl = document.getElementById("history") as HTMLDivElement;
const bannerEl = document.getElementById("banner") as HTMLDivElement;
const healthEl = document.getElementById("health") as HTMLSpanElement;
const form = document.getElementById("chat-form") as HTMLFormElement;
const input = document.getElementById("message-input") as HTMLInputElement;
const sendButton = document.getElementById("send-button") as HTMLButtonElement;
const resetButton = document.getElementById("new-conversation") as HTMLButtonElement;
const retryButton = document.getElementById("retry-models") as HTMLButtonElement;

let state: ViewState = initialState();

function apply(next: ViewState): void {
  state = next;
  modelSelect.innerHTML = renderModelOptions(state.models, state.selectedModel);
  modelSelect.disabled = state.models.length === 0;
  historyEl.innerHTML =
    renderTurns(state.turns) + (state.error ? renderError(state.error) : "");
  bannerEl.hidden = !(state.error && state.models.length === 0);
  retryButton.hidden = bannerEl.hidden;
  if (!bannerEl.hidden) bannerEl.textContent = state.error ?? "";
  input.disabled = state.pending || state.models.length === 0;
  sendButton.disabled = input.disabled;
  historyEl.scrollTop = historyEl.scrollHeight;
}

async function loadModels(): Promise<void> {
  try {
    apply(modelsLoaded(state, await fetchModels()));
  } catch (error) {
    apply(modelsFailed(state, `falha ao carregar modelos: ${String(error)}`));
  }
  try {
    healthEl.innerHTML = renderHealth(await fetchHealth());
  } catch {
    healthEl.textContent = "";
  }
}

form.addEventListener("submit", (event) => {
  event.preventDefault();
  const message = input.value.trim();
  if (!message || state.pending || !state.selectedModel) return;
  const model = state.selectedModel;
  const session = state.sessionId;
  apply(sendStarted(state));
  sendChat(model, message, session)
    .then((response) => {
      input.value = "";
      apply(sendSucceeded(state, message, response));
    })
    .catch((error) => {
      apply(sendFailed(state, String(error)));
    });
});

modelSelect.addEventListener("change", () => {
  apply(selectModel(state, modelSelect.value));
});

resetButton.addEventListener("click", () => {
  apply(newConversation(state));
});

retryButton.addEventListener("click", () => {
  void loadModels();
});

void loadModels();
