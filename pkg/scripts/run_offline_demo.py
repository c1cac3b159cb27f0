#!/usr/bin/env python3
"""Offline end-to-end demo: ingest the sample corpus, benchmark three
scripted models against the sample FAQ through a loopback gateway, and
render the medal-ranked report.

Everything runs on 127.0.0.1; no real LLM or network access involved.

    python scripts/run_offline_demo.py --out-dir demo_out
"""

import argparse
import json
import sys
import threading
import unicodedata
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from sabia import corpus, harness, rag  # noqa: E402
from sabia.embed import LocalHashEmbedder  # noqa: E402
from sabia.genclient import ChatClient, ModelSpec  # noqa: E402
from sabia.vstore import VectorStore, build_records  # noqa: E402

VERDICT_GOOD = (
    '{"relevancia": 5, "acuracia": 5, "completude": 4, "clareza": 5, '
    '"concisao": 4, "rationale": "resposta fiel ao contexto"}'
)
VERDICT_WEAK = (
    '{"relevancia": 3, "acuracia": 2, "completude": 2, "clareza": 4, '
    '"concisao": 4, "rationale": "resposta vaga, pouco fundamentada"}'
)


def fold(text: str) -> str:
    return "".join(
        c for c in unicodedata.normalize("NFD", text.lower()) if not unicodedata.combining(c)
    )


def scripted_reply(model: str, prompt: str, faq_lookup: dict) -> str:
    """Three model personalities: grounded, terse, and evasive."""
    question = prompt.rsplit("Pergunta:", 1)[-1].split("\n")[0].strip()
    reference = None
    for known_question, known_reference in faq_lookup.items():
        if fold(known_question) == fold(question):
            reference = known_reference
            break
    if model == "demo/grounded":
        return reference or "Não encontrei essa informação no contexto."
    if model == "demo/terse":
        return " ".join((reference or "não sei").split()[:6])
    return "Recomendo procurar a coordenação do curso para essa dúvida."


class DemoGateway:
    def __init__(self, faq_lookup):
        gateway = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                payload = json.loads(self.rfile.read(length))
                model = payload["model"]
                if model == "demo/judge":
                    prompt = payload["messages"][-1]["content"]
                    content = (
                        VERDICT_WEAK if "coordenação do curso para essa" in prompt else VERDICT_GOOD
                    )
                else:
                    content = scripted_reply(
                        model, payload["messages"][-1]["content"], faq_lookup
                    )
                body = json.dumps(
                    {"choices": [{"message": {"content": content}}]}
                ).encode("utf-8")
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def log_message(self, *args):
                pass

        self.server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)

    def __enter__(self):
        self.thread.start()
        host, port = self.server.server_address
        return f"http://{host}:{port}"

    def __exit__(self, *exc):
        self.server.shutdown()
        self.server.server_close()


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out-dir", default="demo_out")
    parser.add_argument("--dim", type=int, default=256)
    parser.add_argument("--k", type=int, default=3)
    args = parser.parse_args()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    documents = corpus.load_corpus(REPO / "sample_data" / "docs", ["*.md"])
    embedder = LocalHashEmbedder(args.dim)
    store = VectorStore(dim=args.dim, embedder_id=embedder.embedder_id)
    for doc in documents:
        chunks = corpus.chunk_text(doc, max_chars=400, overlap_chars=80)
        store.upsert(build_records(chunks, embedder.embed_many([c.text for c in chunks])))
    store_path = out_dir / "store.jsonl"
    store.save(store_path)
    print(f"store: {store.count} chunks from {len(documents)} documents -> {store_path}")

    faq = harness.load_faq(REPO / "sample_data" / "faq.csv")
    faq_lookup = {entry.question: entry.reference for entry in faq}

    models = [
        ModelSpec("demo/grounded", "Demo Grounded", open_source=True, timeout_s=10.0),
        ModelSpec("demo/terse", "Demo Terse", open_source=True, timeout_s=10.0),
        ModelSpec("demo/evasive", "Demo Evasive", open_source=False, timeout_s=10.0),
    ]
    judge = ModelSpec("demo/judge", "Demo Judge", open_source=False, timeout_s=10.0)

    with DemoGateway(faq_lookup) as gateway_url:
        components = harness.RagComponents(
            store=store,
            embedder=embedder,
            client=ChatClient(gateway_url=gateway_url, backoff_s=0.05),
            template=rag.PromptTemplate.default(),
            k=args.k,
        )
        records = harness.run_eval(faq, models, components, judge)

    results_path = out_dir / "results.csv"
    harness.write_records(results_path, records)
    print(f"results: {len(records)} records -> {results_path}")

    aggregates = harness.aggregate(records)
    table = harness.build_report_table(
        aggregates,
        display_names={m.model_id: m.display_name for m in models},
        failures=harness.count_failures(records),
    )
    report_path = out_dir / "report.md"
    report_path.write_text(harness.render_report(table, "markdown"), encoding="utf-8")
    print(f"report -> {report_path}\n")
    print(harness.render_report(table, "markdown"))
    return 0


if __name__ == "__main__":
    sys.exit(main())
