"""Corpus intake: load plain-text/markdown documents and split them into
overlapping retrieval chunks.

PDF layout extraction is deliberately out of scope: sources must be
pre-extracted to .txt/.md (tables already linearized) before ingestion.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

DEFAULT_MAX_CHARS = 1000
DEFAULT_OVERLAP_CHARS = 200

# Boundary preference when cutting a chunk, strongest first.
_SEPARATORS = ("\n\n", "\n", ". ", " ")


class CorpusError(Exception):
    """Raised when source files cannot be ingested."""


@dataclass(frozen=True)
class SourceDocument:
    """One loaded source file; `digest` is the sha256 of the raw bytes."""

    doc_id: str
    title: str
    text: str
    origin: str
    digest: str


@dataclass(frozen=True)
class DocumentChunk:
    """A contiguous span of a source document, the unit of retrieval.

    `span` holds (start, end) character offsets into the source text, with
    text == document.text[start:end].
    """

    doc_id: str
    chunk_index: int
    text: str
    span: tuple[int, int]


def load_corpus(root: str | Path, patterns: list[str]) -> list[SourceDocument]:
    """Load every file under `root` matching any glob pattern, in relative-path order.

    Files are decoded as UTF-8 with a leading byte-order mark stripped.
    Raises CorpusError listing every unreadable or empty file.
    """
    root = Path(root)
    if not root.is_dir():
        raise CorpusError(f"corpus root is not a readable directory: {root}")
    matched = {p for pattern in patterns for p in root.rglob(pattern) if p.is_file()}
    paths = sorted(matched, key=lambda p: p.relative_to(root).as_posix())

    documents: list[SourceDocument] = []
    problems: list[str] = []
    for path in paths:
        rel = path.relative_to(root).as_posix()
        try:
            raw = path.read_bytes()
        except OSError as exc:
            problems.append(f"{rel}: unreadable ({exc})")
            continue
        try:
            text = raw.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            problems.append(f"{rel}: not valid UTF-8 ({exc})")
            continue
        if not text.strip():
            problems.append(f"{rel}: empty after whitespace trim")
            continue
        documents.append(
            SourceDocument(
                doc_id=rel,
                title=path.stem,
                text=text,
                origin=str(path),
                digest=hashlib.sha256(raw).hexdigest(),
            )
        )
    if problems:
        raise CorpusError("corpus ingestion failed:\n" + "\n".join(problems))
    return documents


def chunk_text(
    doc: SourceDocument,
    max_chars: int = DEFAULT_MAX_CHARS,
    overlap_chars: int = DEFAULT_OVERLAP_CHARS,
) -> list[DocumentChunk]:
    """Split a document into overlapping chunks of at most `max_chars`.

    Cuts prefer a paragraph break, then a line break, then a sentence end,
    then a space, falling back to a hard cut; a boundary is only taken past
    the window midpoint so chunks stay usefully sized. Chunk spans cover
    every character of the document and consecutive spans overlap by at
    most `overlap_chars`.
    """
    if overlap_chars < 0 or max_chars <= overlap_chars:
        raise ValueError(
            f"max_chars ({max_chars}) must exceed overlap_chars ({overlap_chars}) >= 0"
        )
    text = doc.text
    if not text:
        raise ValueError(f"document {doc.doc_id} has empty text")

    chunks: list[DocumentChunk] = []
    length = len(text)
    start = 0
    index = 0
    while True:
        end = min(start + max_chars, length)
        if end < length:
            end = _boundary_cut(text, start, end)
        chunks.append(
            DocumentChunk(
                doc_id=doc.doc_id,
                chunk_index=index,
                text=text[start:end],
                span=(start, end),
            )
        )
        index += 1
        if end >= length:
            return chunks
        # Step back for overlap, but always make progress.
        start = max(end - overlap_chars, start + 1)


def _boundary_cut(text: str, start: int, hard_end: int) -> int:
    """Best cut position in (start, hard_end]: after a separator past the midpoint."""
    window = text[start:hard_end]
    midpoint = (hard_end - start) // 2
    for sep in _SEPARATORS:
        pos = window.rfind(sep)
        if pos >= 0:
            cut = pos + len(sep)
            if cut > midpoint:
                return start + cut
    return hard_end
