"""The answer pipeline: embed the question, retrieve and rank context,
render the instruction template, and generate."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .embed import Embedder
from .genclient import ChatClient, ChatMessage, GenClientError, ModelSpec
from .templating import TemplateError, placeholder_count, substitute_once
from .vstore import SearchHit, StoreIntegrityError, VectorStore

DEFAULT_K = 4
EMPTY_CONTEXT_SENTINEL = "NENHUM CONTEXTO RECUPERADO"


class PipelineError(Exception):
    """A pipeline failure labeled with the stage that raised it."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass(frozen=True)
class PromptTemplate:
    """Instruction template with `{context}` and `{question}` placeholders,
    each present exactly once."""

    text: str
    language_hint: str = "pt-BR"

    def __post_init__(self) -> None:
        for name in ("context", "question"):
            count = placeholder_count(self.text, name)
            if count != 1:
                raise TemplateError(
                    f"template must contain {{{name}}} exactly once, found {count}"
                )

    @classmethod
    def from_file(cls, path: str | Path, language_hint: str = "pt-BR") -> "PromptTemplate":
        return cls(Path(path).read_text(encoding="utf-8"), language_hint)

    @classmethod
    def default(cls) -> "PromptTemplate":
        text = resources.files("sabia").joinpath("data/prompt_template.txt").read_text("utf-8")
        return cls(text)


@dataclass(frozen=True)
class RagAnswer:
    text: str
    model_id: str
    hits: tuple[SearchHit, ...]
    latency_s: float


def retrieve(store: VectorStore, embedder: Embedder, question: str, k: int) -> list[SearchHit]:
    """Embed the question with the store's embedder and return the top-k hits."""
    if not question.strip():
        raise ValueError("question must be nonempty")
    if k < 1:
        raise ValueError("k must be >= 1")
    if embedder.embedder_id != store.embedder_id:
        raise StoreIntegrityError(
            f"embedder {embedder.embedder_id!r} does not match store "
            f"embedder {store.embedder_id!r}"
        )
    return store.top_k(embedder.embed(question), k)


def render_prompt(template: PromptTemplate, hits: list[SearchHit], question: str) -> str:
    """Fill the template in a single pass; retrieved text is never rescanned
    for placeholders."""
    if hits:
        context = "\n\n".join(
            f"[{h.chunk.doc_id}#{h.chunk.chunk_index}]\n{h.chunk.text}" for h in hits
        )
    else:
        context = EMPTY_CONTEXT_SENTINEL
    return substitute_once(template.text, {"context": context, "question": question})


def answer(
    store: VectorStore,
    embedder: Embedder,
    client: ChatClient,
    spec: ModelSpec,
    template: PromptTemplate,
    question: str,
    k: int = DEFAULT_K,
    temperature: float = 0.0,
    max_tokens: int | None = 1024,
) -> RagAnswer:
    """retrieve -> render_prompt -> chat_complete, with stage-labeled errors."""
    try:
        hits = retrieve(store, embedder, question, k)
    except (StoreIntegrityError, ValueError) as exc:
        raise PipelineError("retrieval", str(exc)) from exc
    prompt = render_prompt(template, hits, question)
    try:
        result = client.chat_complete(
            spec,
            [ChatMessage("user", prompt)],
            temperature=temperature,
            max_tokens=max_tokens,
        )
    except GenClientError as exc:
        raise PipelineError("generation", str(exc)) from exc
    return RagAnswer(
        text=result.text,
        model_id=spec.model_id,
        hits=tuple(hits),
        latency_s=result.latency_s,
    )
