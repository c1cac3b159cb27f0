"""Chat-completions client for OpenAI-style LLM gateways.

One JSON protocol covers every upstream model; each call captures
wall-clock latency around the full HTTP exchange.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass
from typing import Sequence

import httpx

DEFAULT_GATEWAY_URL = "https://openrouter.ai/api/v1"
API_KEY_ENV = "SABIA_API_KEY"
GATEWAY_URL_ENV = "SABIA_GATEWAY_URL"
DEFAULT_TIMEOUT_S = 60.0
DEFAULT_BACKOFF_S = 0.5

EVAL_TEMPERATURE = 0.0
CHAT_TEMPERATURE = 0.7


class GenClientError(Exception):
    """Base error for gateway calls."""


class ProviderError(GenClientError):
    """Gateway answered with a non-2xx status (after any retry)."""

    def __init__(self, status: int, detail: str):
        super().__init__(f"provider returned {status}: {detail}")
        self.status = status


class ProviderTimeoutError(GenClientError):
    """No complete response within the model's timeout."""


class ProtocolError(GenClientError):
    """Response body does not follow the chat-completions schema."""


class RegistryError(Exception):
    """Model registry configuration is invalid."""


@dataclass(frozen=True)
class ModelSpec:
    model_id: str
    display_name: str
    open_source: bool
    timeout_s: float = DEFAULT_TIMEOUT_S

    def __post_init__(self) -> None:
        if self.timeout_s <= 0:
            raise ValueError("timeout_s must be positive")


@dataclass(frozen=True)
class ChatMessage:
    role: str  # system | user | assistant
    content: str

    def __post_init__(self) -> None:
        if self.role not in ("system", "user", "assistant"):
            raise ValueError(f"invalid role: {self.role!r}")
        if self.role in ("system", "user") and not self.content:
            raise ValueError(f"{self.role} message must have content")


@dataclass(frozen=True)
class CompletionResult:
    text: str
    model_id: str
    latency_s: float


def default_registry() -> list[ModelSpec]:
    """The seven stock models; wire ids are gateway routes and configurable."""
    return [
        ModelSpec("openai/gpt-4o-mini", "GPT 4o", open_source=False),
        ModelSpec("deepseek/deepseek-r1", "DeepSeek R1", open_source=True),
        ModelSpec("meta-llama/llama-4-scout", "LLama 4 Scout", open_source=True),
        ModelSpec("google/gemini-2.0-flash-001", "Gemini 2.0 Flash", open_source=False),
        ModelSpec("google/gemma-3n-e4b-it", "Gemma 3n", open_source=True),
        ModelSpec("microsoft/phi-4-reasoning", "Phi 4", open_source=True),
        ModelSpec("qwen/qwen3-235b-a22b", "Qwen3-235b", open_source=True),
    ]


def load_registry(overrides: Sequence[dict] | None = None) -> list[ModelSpec]:
    """Default registry with config entries applied.

    An override whose model_id matches an existing entry replaces it in
    place; new ids append. A model_id repeated within the overrides is a
    configuration error.
    """
    registry = default_registry()
    if not overrides:
        return registry
    index = {spec.model_id: i for i, spec in enumerate(registry)}
    seen: set[str] = set()
    for entry in overrides:
        try:
            spec = ModelSpec(
                model_id=str(entry["model_id"]),
                display_name=str(entry.get("display_name", entry["model_id"])),
                open_source=bool(entry.get("open_source", False)),
                timeout_s=float(entry.get("timeout_s", DEFAULT_TIMEOUT_S)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise RegistryError(f"bad model entry {entry!r}: {exc}") from exc
        if spec.model_id in seen:
            raise RegistryError(f"duplicate model_id in config: {spec.model_id}")
        seen.add(spec.model_id)
        if spec.model_id in index:
            registry[index[spec.model_id]] = spec
        else:
            index[spec.model_id] = len(registry)
            registry.append(spec)
    return registry


def request_body(
    spec: ModelSpec,
    messages: Sequence[ChatMessage],
    temperature: float,
    max_tokens: int | None,
) -> bytes:
    """Stable wire serialization: same inputs always yield identical bytes."""
    payload: dict = {
        "model": spec.model_id,
        "messages": [{"role": m.role, "content": m.content} for m in messages],
        "temperature": temperature,
    }
    if max_tokens is not None:
        payload["max_tokens"] = max_tokens
    return json.dumps(payload, ensure_ascii=False, separators=(",", ":")).encode("utf-8")


class ChatClient:
    """Blocking gateway client; shareable across threads, calls independent."""

    def __init__(
        self,
        gateway_url: str | None = None,
        api_key_env: str = API_KEY_ENV,
        backoff_s: float = DEFAULT_BACKOFF_S,
    ):
        self.gateway_url = (
            gateway_url or os.environ.get(GATEWAY_URL_ENV) or DEFAULT_GATEWAY_URL
        ).rstrip("/")
        self.api_key_env = api_key_env
        self.backoff_s = backoff_s
        self._http = httpx.Client()

    def chat_complete(
        self,
        spec: ModelSpec,
        messages: Sequence[ChatMessage],
        temperature: float = EVAL_TEMPERATURE,
        max_tokens: int | None = 1024,
    ) -> CompletionResult:
        """One completion; retries once on HTTP 429/5xx, then errors out."""
        if not messages or messages[-1].role != "user":
            raise ValueError("messages must be nonempty and end with a user message")
        body = request_body(spec, messages, temperature, max_tokens)
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        url = f"{self.gateway_url}/chat/completions"

        start = time.perf_counter()
        response: httpx.Response | None = None
        for attempt in (1, 2):
            if attempt == 2:
                time.sleep(self.backoff_s)
            try:
                response = self._http.post(
                    url, content=body, headers=headers, timeout=spec.timeout_s
                )
            except httpx.TimeoutException as exc:
                raise ProviderTimeoutError(
                    f"{spec.model_id}: no response within {spec.timeout_s}s"
                ) from exc
            if (response.status_code == 429 or response.status_code >= 500) and attempt == 1:
                continue
            break
        assert response is not None
        if not 200 <= response.status_code < 300:
            raise ProviderError(response.status_code, response.text[:200])
        latency_s = time.perf_counter() - start
        try:
            text = response.json()["choices"][0]["message"]["content"]
        except (json.JSONDecodeError, KeyError, IndexError, TypeError) as exc:
            raise ProtocolError(f"{spec.model_id}: malformed completion payload: {exc}") from exc
        if not isinstance(text, str):
            raise ProtocolError(f"{spec.model_id}: completion content is not text")
        return CompletionResult(text=text, model_id=spec.model_id, latency_s=latency_s)

    def close(self) -> None:
        self._http.close()
