import type { HealthResponse, ModelInfo, Turn } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export function renderModelOptions(models: ModelInfo[], selected: string | null): string {
  return models
    .map((model) => {
      const badge = model.open_source ? " [open source]" : "";
      const flag = model.model_id === selected ? " selected" : "";
      return `<option value="${escapeHtml(model.model_id)}"${flag}>${escapeHtml(
        model.display_name
      )}${badge}</option>`;
    })
    .join("");
}

function renderSources(turn: Turn): string {
  if (turn.sources.length === 0) return "";
  const chips = turn.sources
    .map(
      (source) =>
        `<span class="chip" title="score ${source.score.toFixed(3)}">[${escapeHtml(
          source.doc_id
        )}#${source.chunk_index}]</span>`
    )
    .join(" ");
  return `<details class="sources"><summary>fontes (${turn.sources.length})</summary>${chips}</details>`;
}

export function renderTurn(turn: Turn): string {
  return [
    `<div class="turn">`,
    `<div class="question">${escapeHtml(turn.question)}</div>`,
    `<div class="answer">${escapeHtml(turn.answer)}</div>`,
    renderSources(turn),
    `<span class="latency-badge">${turn.latency_ms} ms</span>`,
    `</div>`,
  ].join("");
}

export function renderTurns(turns: Turn[]): string {
  return turns.map(renderTurn).join("");
}

export function renderError(message: string): string {
  return `<div class="error-bubble">${escapeHtml(message)}</div>`;
}

export function renderHealth(health: HealthResponse): string {
  if (health.status !== "ok") {
    return `<span class="health degraded">serviço degradado (sem base de documentos)</span>`;
  }
  return `<span class="health ok">${health.store_count} trechos indexados (dim ${health.dim})</span>`;
}
