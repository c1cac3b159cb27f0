"""Evaluation harness: run the FAQ across models, aggregate mean ± std per
metric, and render medal-ranked comparison tables."""

from __future__ import annotations

import csv
import io
import logging
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import rag
from .embed import Embedder
from .evalkit import (
    JudgeFormatError,
    MetricScores,
    judge_evaluate,
    score_candidate,
    tokenize,
)
from .genclient import ChatClient, GenClientError, ModelSpec
from .vstore import VectorStore

logger = logging.getLogger(__name__)

# Fixed report column order: label -> MetricScores field ("latency" is special).
REPORT_COLUMNS: tuple[tuple[str, str], ...] = (
    ("ROUGE-1", "rouge1"),
    ("ROUGE-2", "rouge2"),
    ("ROUGE-L", "rougeL"),
    ("BLEU", "bleu"),
    ("SBERT", "sbert"),
    ("METEOR", "meteor"),
    ("LLM-as-a-Judge", "judge"),
    ("Tempo(s)", "latency"),
)

# Columns where smaller is better.
ASCENDING_COLUMNS = frozenset({"latency"})

RESULTS_FIELDS = (
    "pergunta",
    "referencia",
    "modelo",
    "resposta",
    "latencia_s",
    "rouge1",
    "rouge2",
    "rougeL",
    "bleu",
    "sbert",
    "meteor",
    "judge",
)

MEDAL_LABELS = ("gold", "silver", "bronze")

# A model whose failure fraction exceeds this aborts the whole run.
MAX_FAILURE_FRACTION = 0.5


class FaqSchemaError(Exception):
    """The FAQ CSV does not follow the pergunta/resposta schema."""


class EvalAbortedError(Exception):
    """Too many failures for one model; the run result would be meaningless."""


@dataclass(frozen=True)
class FaqEntry:
    question: str
    reference: str


@dataclass(frozen=True)
class RunRecord:
    """One (question, model) outcome; failures keep an empty answer and no scores."""

    question: str
    reference: str
    model_id: str
    answer: str
    latency_s: float | None
    scores: MetricScores | None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.scores is not None


@dataclass(frozen=True)
class AggregateCell:
    mean: float
    std: float
    n: int


@dataclass(frozen=True)
class Medal:
    model_id: str
    label: str  # gold | silver | bronze
    bold: bool


@dataclass(frozen=True)
class ReportTable:
    """Aggregated rows plus per-column medal assignments."""

    rows: dict[str, dict[str, AggregateCell]]  # model_id -> column field -> cell
    medals: dict[str, list[Medal]]  # column field -> top three
    display_names: dict[str, str]
    failures: dict[str, int] = field(default_factory=dict)


@dataclass
class RagComponents:
    """Everything rag.answer needs, bundled for the evaluation loop."""

    store: VectorStore
    embedder: Embedder
    client: ChatClient
    template: rag.PromptTemplate
    k: int = rag.DEFAULT_K
    max_tokens: int | None = 1024


def load_faq(path: str | Path) -> list[FaqEntry]:
    """Read a pergunta/resposta CSV (RFC-4180 quoting) into FAQ entries."""
    with open(path, newline="", encoding="utf-8-sig") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise FaqSchemaError(f"{path}: empty file")
        missing = {"pergunta", "resposta"} - set(reader.fieldnames)
        if missing:
            raise FaqSchemaError(f"{path}: missing column(s) {sorted(missing)}")
        entries = []
        for i, row in enumerate(reader, start=2):
            question = (row.get("pergunta") or "").strip()
            reference = (row.get("resposta") or "").strip()
            if not question or not reference:
                raise FaqSchemaError(f"{path}: line {i}: empty pergunta or resposta")
            entries.append(FaqEntry(question=question, reference=reference))
    if not entries:
        raise FaqSchemaError(f"{path}: no entries")
    return entries


def _evaluate_model(
    faq: Sequence[FaqEntry],
    spec: ModelSpec,
    components: RagComponents,
    judge_spec: ModelSpec,
    judge_client: ChatClient,
) -> list[RunRecord]:
    """All questions for one model, sequentially so latency is uncontended."""
    records: list[RunRecord] = []
    failures = 0
    for entry in faq:
        try:
            result = rag.answer(
                components.store,
                components.embedder,
                components.client,
                spec,
                components.template,
                entry.question,
                k=components.k,
                temperature=0.0,
                max_tokens=components.max_tokens,
            )
            if not tokenize(result.text):
                raise rag.PipelineError("generation", "model returned an empty answer")
            metrics = score_candidate(components.embedder, result.text, entry.reference)
            verdict = judge_evaluate(
                judge_client, judge_spec, entry.question, entry.reference, result.text
            )
            scores = MetricScores(judge=verdict.normalized, **metrics)
            records.append(
                RunRecord(
                    question=entry.question,
                    reference=entry.reference,
                    model_id=spec.model_id,
                    answer=result.text,
                    latency_s=result.latency_s,
                    scores=scores,
                )
            )
        except (rag.PipelineError, GenClientError, JudgeFormatError) as exc:
            failures += 1
            logger.warning("model %s failed on %r: %s", spec.model_id, entry.question, exc)
            records.append(
                RunRecord(
                    question=entry.question,
                    reference=entry.reference,
                    model_id=spec.model_id,
                    answer="",
                    latency_s=None,
                    scores=None,
                    error=str(exc),
                )
            )
    if failures / len(faq) > MAX_FAILURE_FRACTION:
        raise EvalAbortedError(
            f"model {spec.model_id}: {failures}/{len(faq)} questions failed"
        )
    return records


def run_eval(
    faq: Sequence[FaqEntry],
    models: Sequence[ModelSpec],
    components: RagComponents,
    judge_spec: ModelSpec,
    judge_client: ChatClient | None = None,
    parallel_models: bool = False,
) -> list[RunRecord]:
    """Evaluate every (question, model) pair at temperature 0.

    Records come back in (entry, model) order. Failed generations become
    error-marker records; a model failing more than half its questions
    aborts the run.
    """
    if not faq:
        raise ValueError("faq must be nonempty")
    if not models:
        raise ValueError("models must be nonempty")
    judge_client = judge_client or components.client
    if parallel_models and len(models) > 1:
        with ThreadPoolExecutor(max_workers=len(models)) as pool:
            futures = [
                pool.submit(_evaluate_model, faq, spec, components, judge_spec, judge_client)
                for spec in models
            ]
            per_model = [f.result() for f in futures]
    else:
        per_model = [
            _evaluate_model(faq, spec, components, judge_spec, judge_client)
            for spec in models
        ]
    return [
        per_model[m][q] for q in range(len(faq)) for m in range(len(models))
    ]


def write_records(path: str | Path, records: Sequence[RunRecord]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(RESULTS_FIELDS)
        for rec in records:
            if rec.ok:
                writer.writerow(
                    [
                        rec.question,
                        rec.reference,
                        rec.model_id,
                        rec.answer,
                        repr(rec.latency_s),
                        repr(rec.scores.rouge1),
                        repr(rec.scores.rouge2),
                        repr(rec.scores.rougeL),
                        repr(rec.scores.bleu),
                        repr(rec.scores.sbert),
                        repr(rec.scores.meteor),
                        repr(rec.scores.judge),
                    ]
                )
            else:
                writer.writerow([rec.question, rec.reference, rec.model_id, "", ""] + [""] * 7)


def read_records(path: str | Path) -> list[RunRecord]:
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or set(RESULTS_FIELDS) - set(reader.fieldnames):
            raise FaqSchemaError(f"{path}: not a results file (expected {RESULTS_FIELDS})")
        records = []
        for row in reader:
            if row["latencia_s"] == "":
                records.append(
                    RunRecord(
                        question=row["pergunta"],
                        reference=row["referencia"],
                        model_id=row["modelo"],
                        answer="",
                        latency_s=None,
                        scores=None,
                        error="recorded failure",
                    )
                )
                continue
            scores = MetricScores(
                rouge1=float(row["rouge1"]),
                rouge2=float(row["rouge2"]),
                rougeL=float(row["rougeL"]),
                bleu=float(row["bleu"]),
                sbert=float(row["sbert"]),
                meteor=float(row["meteor"]),
                judge=float(row["judge"]),
            )
            records.append(
                RunRecord(
                    question=row["pergunta"],
                    reference=row["referencia"],
                    model_id=row["modelo"],
                    answer=row["resposta"],
                    latency_s=float(row["latencia_s"]),
                    scores=scores,
                )
            )
    return records


def _cell(values: Sequence[float]) -> AggregateCell:
    mean = statistics.fmean(values)
    std = statistics.stdev(values) if len(values) > 1 else 0.0
    return AggregateCell(mean=mean, std=std, n=len(values))


def aggregate(records: Sequence[RunRecord]) -> dict[str, dict[str, AggregateCell]]:
    """Mean and sample standard deviation per model per column, successful
    records only; models with zero successes are dropped with a warning."""
    order: list[str] = []
    by_model: dict[str, list[RunRecord]] = {}
    for rec in records:
        if rec.model_id not in by_model:
            order.append(rec.model_id)
            by_model[rec.model_id] = []
        by_model[rec.model_id].append(rec)
    out: dict[str, dict[str, AggregateCell]] = {}
    for model_id in order:
        good = [rec for rec in by_model[model_id] if rec.ok]
        if not good:
            logger.warning("model %s has no successful records; excluded", model_id)
            continue
        cells = {
            fieldname: _cell([getattr(rec.scores, fieldname) for rec in good])
            for _, fieldname in REPORT_COLUMNS
            if fieldname != "latency"
        }
        cells["latency"] = _cell([rec.latency_s for rec in good])
        out[model_id] = cells
    return out


def count_failures(records: Sequence[RunRecord]) -> dict[str, int]:
    failures: dict[str, int] = {}
    for rec in records:
        if not rec.ok:
            failures[rec.model_id] = failures.get(rec.model_id, 0) + 1
    return failures


def medal_rank(
    column: dict[str, float],
    direction: str = "desc",
    display_names: dict[str, str] | None = None,
) -> list[Medal]:
    """Top three models of one column; ties order by display name ascending."""
    if direction not in ("desc", "asc"):
        raise ValueError(f"direction must be 'desc' or 'asc', got {direction!r}")
    if not column:
        raise ValueError("column must be nonempty")
    names = display_names or {}

    def sort_key(item: tuple[str, float]) -> tuple[float, str]:
        model_id, mean = item
        return (-mean if direction == "desc" else mean, names.get(model_id, model_id))

    ranked = sorted(column.items(), key=sort_key)
    return [
        Medal(model_id=model_id, label=MEDAL_LABELS[place], bold=place == 0)
        for place, (model_id, _) in enumerate(ranked[:3])
    ]


def build_report_table(
    aggregates: dict[str, dict[str, AggregateCell]],
    display_names: dict[str, str] | None = None,
    failures: dict[str, int] | None = None,
) -> ReportTable:
    if not aggregates:
        raise ValueError("aggregates must be nonempty")
    names = display_names or {m: m for m in aggregates}
    medals = {}
    for _, fieldname in REPORT_COLUMNS:
        column = {m: cells[fieldname].mean for m, cells in aggregates.items()}
        direction = "asc" if fieldname in ASCENDING_COLUMNS else "desc"
        medals[fieldname] = medal_rank(column, direction, names)
    return ReportTable(
        rows=aggregates,
        medals=medals,
        display_names={m: names.get(m, m) for m in aggregates},
        failures=failures or {},
    )


def render_report(table: ReportTable, fmt: str = "markdown") -> str:
    if fmt == "markdown":
        return _render_markdown(table)
    if fmt == "csv":
        return _render_csv(table)
    raise ValueError(f"unknown report format: {fmt!r}")


_MEDAL_EMOJI = {"gold": "\U0001f947", "silver": "\U0001f948", "bronze": "\U0001f949"}


def _render_markdown(table: ReportTable) -> str:
    header = "| Modelo | " + " | ".join(label for label, _ in REPORT_COLUMNS) + " |"
    divider = "|" + "---|" * (len(REPORT_COLUMNS) + 1)
    medal_of = {
        fieldname: {m.model_id: m for m in medals}
        for fieldname, medals in table.medals.items()
    }
    lines = [header, divider]
    for model_id, cells in table.rows.items():
        row = [table.display_names.get(model_id, model_id)]
        for _, fieldname in REPORT_COLUMNS:
            cell = cells[fieldname]
            text = f"{cell.mean:.3f} ± {cell.std:.2f}"
            medal = medal_of[fieldname].get(model_id)
            if medal is not None:
                if medal.bold:
                    text = f"**{text}**"
                text = f"{text} {_MEDAL_EMOJI[medal.label]}"
            row.append(text)
        lines.append("| " + " | ".join(row) + " |")
    lines.append("")
    lines.append(
        "Valores em média ± desvio padrão amostral (n−1); "
        "🥇/🥈/🥉 marcam os três melhores por coluna (menor tempo é melhor) "
        "e o melhor resultado está em negrito."
    )
    if table.failures:
        parts = ", ".join(
            f"{table.display_names.get(m, m)}: {n}" for m, n in sorted(table.failures.items())
        )
        lines.append(f"Gerações com falha (excluídas das médias): {parts}.")
    return "\n".join(lines) + "\n"


def _render_csv(table: ReportTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["modelo"]
    for _, fieldname in REPORT_COLUMNS:
        header.extend([f"{fieldname}_mean", f"{fieldname}_std"])
    writer.writerow(header)
    for model_id, cells in table.rows.items():
        row = [model_id]
        for _, fieldname in REPORT_COLUMNS:
            cell = cells[fieldname]
            row.extend([repr(cell.mean), repr(cell.std)])
        writer.writerow(row)
    writer.writerow([])
    writer.writerow(["column", "gold", "silver", "bronze"])
    for label, fieldname in REPORT_COLUMNS:
        medals = table.medals[fieldname]
        ids = [m.model_id for m in medals] + [""] * (3 - len(medals))
        writer.writerow([label] + ids)
    return buf.getvalue()
