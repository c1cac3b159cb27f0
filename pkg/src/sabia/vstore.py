"""Exact top-k cosine vector store with JSON-lines persistence.

The index is a brute-force scan over normalized vectors: at institutional
corpus scale (thousands of chunks) exactness is cheap and keeps results
oracle-testable. Ties order by insertion sequence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import DocumentChunk
from .embed import Embedding

FORMAT_VERSION = 1


class StoreIntegrityError(Exception):
    """A record or query does not match the store's dim/embedder contract."""


class StoreVersionError(Exception):
    """The on-disk format version is not supported."""


class StoreCorruptError(Exception):
    """The on-disk file cannot be parsed into a complete store."""


@dataclass(frozen=True)
class StoreHeader:
    format_version: int
    dim: int
    embedder_id: str
    count: int


@dataclass(frozen=True)
class VectorRecord:
    """A chunk plus its embedding; `insert_seq` is assigned by the store."""

    chunk: DocumentChunk
    embedding: Embedding
    insert_seq: int = -1


@dataclass(frozen=True)
class SearchHit:
    chunk: DocumentChunk
    score: float


class VectorStore:
    """In-memory exact-cosine index over chunk embeddings.

    Concurrency contract: many readers or one writer; `upsert` validates
    its whole batch before mutating, so readers never see a partial batch.
    """

    def __init__(self, dim: int, embedder_id: str):
        if dim <= 0:
            raise ValueError("dim must be positive")
        self.dim = dim
        self.embedder_id = embedder_id
        self._records: list[VectorRecord] = []
        self._by_key: dict[tuple[str, int], int] = {}
        self._next_seq = 0
        self._cache: tuple[np.ndarray, np.ndarray] | None = None

    @property
    def header(self) -> StoreHeader:
        return StoreHeader(FORMAT_VERSION, self.dim, self.embedder_id, len(self._records))

    @property
    def count(self) -> int:
        return len(self._records)

    def records(self) -> list[VectorRecord]:
        return list(self._records)

    def upsert(self, records: Iterable[VectorRecord]) -> int:
        """Insert or replace records keyed by (doc_id, chunk_index).

        Replacements keep their original insert_seq; fresh records append
        with the next sequence number. Returns the updated record count.
        """
        batch = list(records)
        for rec in batch:
            if rec.embedding.dim != self.dim:
                raise StoreIntegrityError(
                    f"record {rec.chunk.doc_id}#{rec.chunk.chunk_index}: "
                    f"dim {rec.embedding.dim} != store dim {self.dim}"
                )
            if rec.embedding.embedder_id != self.embedder_id:
                raise StoreIntegrityError(
                    f"record {rec.chunk.doc_id}#{rec.chunk.chunk_index}: embedder "
                    f"{rec.embedding.embedder_id!r} != store embedder {self.embedder_id!r}"
                )
        for rec in batch:
            key = (rec.chunk.doc_id, rec.chunk.chunk_index)
            pos = self._by_key.get(key)
            if pos is None:
                self._by_key[key] = len(self._records)
                self._records.append(replace(rec, insert_seq=self._next_seq))
                self._next_seq += 1
            else:
                self._records[pos] = replace(rec, insert_seq=self._records[pos].insert_seq)
        self._cache = None
        return len(self._records)

    def top_k(self, query: Embedding, k: int) -> list[SearchHit]:
        """The k highest-cosine records, exact; ties order by insert_seq."""
        if query.dim != self.dim:
            raise StoreIntegrityError(f"query dim {query.dim} != store dim {self.dim}")
        if k < 0:
            raise ValueError("k must be >= 0")
        if k == 0 or not self._records:
            return []
        matrix, seqs = self._ensure_matrix()
        # Row-wise multiply+reduce, not BLAS matmul: identical vectors must
        # get bitwise-identical scores regardless of row position, or tie
        # ordering would depend on store layout.
        scores = (matrix * np.asarray(query.values, dtype=np.float64)).sum(axis=1)
        np.clip(scores, -1.0, 1.0, out=scores)
        # lexsort: primary key is the last array (negated score), ties fall
        # back to ascending insert_seq
        order = np.lexsort((seqs, -scores))[: min(k, len(self._records))]
        return [
            SearchHit(chunk=self._records[i].chunk, score=float(scores[i]))
            for i in order
        ]

    def save(self, path: str | Path) -> None:
        """Write the store as JSON lines: a header line, then one record per line."""
        lines = [_dump_json(_header_obj(self.header))]
        lines.extend(_dump_json(_record_obj(rec)) for rec in self._records)
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "VectorStore":
        """Parse a saved store; raises before returning any partial state."""
        raw = Path(path).read_text(encoding="utf-8")
        lines = raw.splitlines()
        if not lines:
            raise StoreCorruptError(f"{path}: empty store file")
        try:
            header = json.loads(lines[0])
            version = int(header["format_version"])
            dim = int(header["dim"])
            embedder_id = str(header["embedder_id"])
            count = int(header["count"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise StoreCorruptError(f"{path}: bad header ({exc})") from exc
        if version != FORMAT_VERSION:
            raise StoreVersionError(
                f"{path}: format_version {version} unsupported (expected {FORMAT_VERSION})"
            )
        record_lines = [line for line in lines[1:] if line.strip()]
        if len(record_lines) != count:
            raise StoreCorruptError(
                f"{path}: header count {count} but file has {len(record_lines)} records"
            )
        store = cls(dim=dim, embedder_id=embedder_id)
        for i, line in enumerate(record_lines):
            try:
                rec = _parse_record(line, dim, embedder_id)
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise StoreCorruptError(f"{path}: record {i} ({exc})") from exc
            key = (rec.chunk.doc_id, rec.chunk.chunk_index)
            if key in store._by_key:
                raise StoreCorruptError(f"{path}: record {i}: duplicate key {key}")
            store._by_key[key] = len(store._records)
            store._records.append(rec)
        seqs = [rec.insert_seq for rec in store._records]
        if len(set(seqs)) != len(seqs):
            raise StoreCorruptError(f"{path}: duplicate insert_seq values")
        store._next_seq = max(seqs, default=-1) + 1
        return store

    def _ensure_matrix(self) -> tuple[np.ndarray, np.ndarray]:
        # Built as a single tuple so concurrent readers on a cold cache
        # never observe the matrix without its seq array.
        cached = self._cache
        if cached is None:
            matrix = np.array(
                [rec.embedding.values for rec in self._records], dtype=np.float64
            )
            seqs = np.array([rec.insert_seq for rec in self._records], dtype=np.int64)
            cached = (matrix, seqs)
            self._cache = cached
        return cached


def _dump_json(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def _header_obj(header: StoreHeader) -> dict:
    return {
        "format_version": header.format_version,
        "dim": header.dim,
        "embedder_id": header.embedder_id,
        "count": header.count,
    }


def _record_obj(rec: VectorRecord) -> dict:
    return {
        "doc_id": rec.chunk.doc_id,
        "chunk_index": rec.chunk.chunk_index,
        "text": rec.chunk.text,
        "span": [rec.chunk.span[0], rec.chunk.span[1]],
        "embedding": list(rec.embedding.values),
        "insert_seq": rec.insert_seq,
    }


def _parse_record(line: str, dim: int, embedder_id: str) -> VectorRecord:
    obj = json.loads(line)
    chunk = DocumentChunk(
        doc_id=str(obj["doc_id"]),
        chunk_index=int(obj["chunk_index"]),
        text=str(obj["text"]),
        span=(int(obj["span"][0]), int(obj["span"][1])),
    )
    values = tuple(float(v) for v in obj["embedding"])
    embedding = Embedding(values=values, dim=dim, embedder_id=embedder_id)
    seq = int(obj["insert_seq"])
    if seq < 0:
        raise ValueError(f"negative insert_seq {seq}")
    return VectorRecord(chunk=chunk, embedding=embedding, insert_seq=seq)


def build_records(
    chunks: Sequence[DocumentChunk], embeddings: Sequence[Embedding]
) -> list[VectorRecord]:
    """Pair chunks with their embeddings, ready for upsert."""
    if len(chunks) != len(embeddings):
        raise ValueError(f"{len(chunks)} chunks vs {len(embeddings)} embeddings")
    return [VectorRecord(chunk=c, embedding=e) for c, e in zip(chunks, embeddings)]
