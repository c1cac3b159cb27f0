"""Command-line entry points: ingest, serve, chat, eval, report."""

from __future__ import annotations

import argparse
import sys

from . import corpus, harness, rag
from .config import load_config
from .embed import make_embedder
from .genclient import ChatClient, ModelSpec, load_registry
from .vstore import VectorStore, build_records


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="sabia")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="load, chunk, embed and store a corpus")
    p_ingest.add_argument("--root", required=True)
    p_ingest.add_argument("--glob", action="append", default=None,
                          help="glob pattern, repeatable (default: *.md and *.txt)")
    p_ingest.add_argument("--max-chars", type=int, default=corpus.DEFAULT_MAX_CHARS)
    p_ingest.add_argument("--overlap", type=int, default=corpus.DEFAULT_OVERLAP_CHARS)
    p_ingest.add_argument("--out", required=True)
    p_ingest.add_argument("--config", default=None)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--config", default=None)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)

    p_chat = sub.add_parser("chat", help="terminal REPL over the answer pipeline")
    p_chat.add_argument("--config", default=None)
    p_chat.add_argument("--store", default=None, help="store path (overrides config)")
    p_chat.add_argument("--model", default=None, help="model_id (default: first in registry)")

    p_eval = sub.add_parser("eval", help="run the FAQ benchmark across models")
    p_eval.add_argument("--faq", required=True)
    p_eval.add_argument("--store", required=True)
    p_eval.add_argument("--models", default="all",
                        help="comma-separated model_ids, or 'all'")
    p_eval.add_argument("--judge", required=True, help="judge model_id")
    p_eval.add_argument("--out", default="results.csv")
    p_eval.add_argument("--config", default=None)
    p_eval.add_argument("--k", type=int, default=None)
    p_eval.add_argument("--parallel", action="store_true",
                        help="evaluate models concurrently (questions stay sequential)")

    p_report = sub.add_parser("report", help="aggregate results into a ranked table")
    p_report.add_argument("--in", dest="infile", required=True)
    p_report.add_argument("--format", choices=("csv", "markdown"), default="markdown")
    p_report.add_argument("--out", default=None)
    p_report.add_argument("--config", default=None)

    args = parser.parse_args(argv)
    handler = {
        "ingest": _cmd_ingest,
        "serve": _cmd_serve,
        "chat": _cmd_chat,
        "eval": _cmd_eval,
        "report": _cmd_report,
    }[args.command]
    return handler(args)


def _cmd_ingest(args) -> int:
    cfg = load_config(args.config)
    patterns = args.glob or ["*.md", "*.txt"]
    embedder = make_embedder(cfg.embedder)
    documents = corpus.load_corpus(args.root, patterns)
    store = VectorStore(dim=cfg.embedder.dim, embedder_id=embedder.embedder_id)
    total_chunks = 0
    for doc in documents:
        chunks = corpus.chunk_text(doc, max_chars=args.max_chars, overlap_chars=args.overlap)
        embeddings = embedder.embed_many([c.text for c in chunks])
        store.upsert(build_records(chunks, embeddings))
        total_chunks += len(chunks)
    store.save(args.out)
    print(f"ingested {len(documents)} documents into {total_chunks} chunks -> {args.out}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import build_state, create_app

    cfg = load_config(args.config)
    app = create_app(build_state(cfg))
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _cmd_chat(args) -> int:
    cfg = load_config(args.config)
    store_path = args.store or cfg.store_path
    if not store_path:
        print("no store configured; pass --store or set store_path", file=sys.stderr)
        return 2
    store = VectorStore.load(store_path)
    embedder = make_embedder(cfg.embedder)
    client = ChatClient(gateway_url=cfg.gateway_url, api_key_env=cfg.api_key_env)
    registry = load_registry(cfg.models)
    spec = registry[0]
    if args.model:
        matches = [s for s in registry if s.model_id == args.model]
        if not matches:
            print(f"unknown model {args.model}", file=sys.stderr)
            return 2
        spec = matches[0]
    template = (
        rag.PromptTemplate.from_file(cfg.template_path)
        if cfg.template_path
        else rag.PromptTemplate.default()
    )
    print(f"modelo: {spec.display_name} ({spec.model_id}); Ctrl-D para sair")
    while True:
        try:
            question = input("> ").strip()
        except EOFError:
            print()
            return 0
        if not question:
            continue
        try:
            result = rag.answer(
                store, embedder, client, spec, template, question,
                k=cfg.k, temperature=cfg.temperature,
            )
        except rag.PipelineError as exc:
            print(f"erro: {exc}", file=sys.stderr)
            continue
        print(result.text)
        for hit in result.hits:
            print(f"  [{hit.chunk.doc_id}#{hit.chunk.chunk_index}] score={hit.score:.3f}")


def _cmd_eval(args) -> int:
    cfg = load_config(args.config)
    registry = load_registry(cfg.models)
    by_id = {spec.model_id: spec for spec in registry}
    if args.models == "all":
        models = registry
    else:
        wanted = [m.strip() for m in args.models.split(",") if m.strip()]
        missing = [m for m in wanted if m not in by_id]
        if missing:
            print(f"unknown model_id(s): {', '.join(missing)}", file=sys.stderr)
            return 2
        models = [by_id[m] for m in wanted]
    judge_spec = by_id.get(args.judge) or ModelSpec(
        model_id=args.judge, display_name=args.judge, open_source=False
    )
    store = VectorStore.load(args.store)
    embedder = make_embedder(cfg.embedder)
    client = ChatClient(gateway_url=cfg.gateway_url, api_key_env=cfg.api_key_env)
    template = (
        rag.PromptTemplate.from_file(cfg.template_path)
        if cfg.template_path
        else rag.PromptTemplate.default()
    )
    components = harness.RagComponents(
        store=store, embedder=embedder, client=client, template=template,
        k=args.k or cfg.k,
    )
    faq = harness.load_faq(args.faq)
    records = harness.run_eval(
        faq, models, components, judge_spec, parallel_models=args.parallel
    )
    harness.write_records(args.out, records)
    ok = sum(1 for r in records if r.ok)
    print(f"wrote {len(records)} records ({ok} ok) -> {args.out}")
    return 0


def _cmd_report(args) -> int:
    cfg = load_config(args.config)
    registry = load_registry(cfg.models)
    display_names = {spec.model_id: spec.display_name for spec in registry}
    records = harness.read_records(args.infile)
    aggregates = harness.aggregate(records)
    table = harness.build_report_table(
        aggregates, display_names, harness.count_failures(records)
    )
    rendered = harness.render_report(table, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(rendered)
        print(f"wrote {args.format} report -> {args.out}")
    else:
        print(rendered, end="")
    return 0


if __name__ == "__main__":
    sys.exit(main())
