"""End-to-end CLI flow: ingest -> eval -> report against a loopback gateway."""

import json

import pytest

from sabia.cli import main
from sabia.vstore import VectorStore

from gateway_stub import GatewayStub

VERDICT = (
    '{"relevancia": 4, "acuracia": 4, "completude": 4, "clareza": 4, '
    '"concisao": 4, "rationale": "ok"}'
)


@pytest.fixture()
def corpus_dir(tmp_path):
    root = tmp_path / "docs"
    root.mkdir()
    (root / "matricula.md").write_text(
        "A matrícula é renovada pelo portal do aluno dentro do prazo. " * 8,
        encoding="utf-8",
    )
    (root / "estagio.md").write_text(
        "O estágio obrigatório exige 360 horas e termo de compromisso. " * 8,
        encoding="utf-8",
    )
    return root


@pytest.fixture()
def config_path(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(
        json.dumps({"embedder": {"kind": "local_hash", "dim": 64}}), encoding="utf-8"
    )
    return path


def test_ingest_eval_report_round_trip(tmp_path, corpus_dir, config_path, capsys, monkeypatch):
    store_path = tmp_path / "store.jsonl"
    rc = main(
        [
            "ingest",
            "--root", str(corpus_dir),
            "--glob", "*.md",
            "--max-chars", "200",
            "--overlap", "40",
            "--out", str(store_path),
            "--config", str(config_path),
        ]
    )
    assert rc == 0
    store = VectorStore.load(store_path)
    assert store.count > 2
    assert store.dim == 64

    faq_path = tmp_path / "faq.csv"
    faq_path.write_text(
        "pergunta,resposta\n"
        "Como renovo a matrícula?,Pelo portal do aluno dentro do prazo.\n"
        "Quantas horas tem o estágio?,O estágio exige 360 horas.\n",
        encoding="utf-8",
    )

    def script(path, payload):
        if payload["model"] == "judge/mini":
            return {"choices": [{"message": {"content": VERDICT}}]}
        return {"choices": [{"message": {"content": "Pelo portal do aluno dentro do prazo."}}]}

    results_path = tmp_path / "results.csv"
    with GatewayStub(script) as stub:
        monkeypatch.setenv("SABIA_GATEWAY_URL", stub.url)
        rc = main(
            [
                "eval",
                "--faq", str(faq_path),
                "--store", str(store_path),
                "--models", "openai/gpt-4o-mini,deepseek/deepseek-r1",
                "--judge", "judge/mini",
                "--out", str(results_path),
                "--config", str(config_path),
            ]
        )
    assert rc == 0
    assert results_path.exists()

    report_path = tmp_path / "report.md"
    rc = main(
        [
            "report",
            "--in", str(results_path),
            "--format", "markdown",
            "--out", str(report_path),
        ]
    )
    assert rc == 0
    report = report_path.read_text(encoding="utf-8")
    assert "| Modelo |" in report
    assert "GPT 4o" in report
    assert "🥇" in report

    csv_report = main(["report", "--in", str(results_path), "--format", "csv"])
    assert csv_report == 0
    out = capsys.readouterr().out
    assert "column,gold,silver,bronze" in out


def test_eval_unknown_model_exits_nonzero(tmp_path, config_path):
    faq = tmp_path / "faq.csv"
    faq.write_text("pergunta,resposta\na?,b.\n", encoding="utf-8")
    store = tmp_path / "store.jsonl"
    store.write_text(
        '{"format_version":1,"dim":64,"embedder_id":"fnv1a64-bag-64","count":0}\n',
        encoding="utf-8",
    )
    rc = main(
        [
            "eval",
            "--faq", str(faq),
            "--store", str(store),
            "--models", "nao/existe",
            "--judge", "judge/mini",
            "--config", str(config_path),
        ]
    )
    assert rc == 2


def test_ingest_default_globs(tmp_path, corpus_dir, config_path):
    (corpus_dir / "extra.txt").write_text("regulamento complementar de TCC", encoding="utf-8")
    store_path = tmp_path / "store2.jsonl"
    rc = main(
        [
            "ingest",
            "--root", str(corpus_dir),
            "--out", str(store_path),
            "--config", str(config_path),
        ]
    )
    assert rc == 0
    store = VectorStore.load(store_path)
    doc_ids = {rec.chunk.doc_id for rec in store.records()}
    assert "extra.txt" in doc_ids
