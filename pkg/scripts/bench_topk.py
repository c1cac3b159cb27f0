#!/usr/bin/env python3
"""Timing sweep for the exact top-k scan: store size x dimension.

Sanity-checks that brute-force search stays interactive at institutional
corpus scale (a few thousand chunks).

    python scripts/bench_topk.py --sizes 100,1000,5000 --dims 64,256,768
"""

import argparse
import random
import statistics
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from sabia.corpus import DocumentChunk  # noqa: E402
from sabia.embed import Embedding  # noqa: E402
from sabia.vstore import VectorRecord, VectorStore  # noqa: E402


def unit(rng, dim):
    values = [rng.gauss(0, 1) for _ in range(dim)]
    norm = sum(v * v for v in values) ** 0.5 or 1.0
    return tuple(v / norm for v in values)


def build_store(rng, count, dim):
    store = VectorStore(dim=dim, embedder_id="bench")
    records = []
    for i in range(count):
        chunk = DocumentChunk(doc_id=f"d{i}", chunk_index=0, text=f"t{i}", span=(0, 2))
        emb = Embedding(values=unit(rng, dim), dim=dim, embedder_id="bench")
        records.append(VectorRecord(chunk=chunk, embedding=emb))
    store.upsert(records)
    return store


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--sizes", default="100,1000,5000")
    parser.add_argument("--dims", default="64,256,768")
    parser.add_argument("--queries", type=int, default=50)
    parser.add_argument("--k", type=int, default=4)
    args = parser.parse_args()

    rng = random.Random(1)
    print(f"{'records':>8} {'dim':>5} {'median_ms':>10} {'p95_ms':>8}")
    for count in (int(s) for s in args.sizes.split(",")):
        for dim in (int(d) for d in args.dims.split(",")):
            store = build_store(rng, count, dim)
            query = Embedding(values=unit(rng, dim), dim=dim, embedder_id="bench")
            store.top_k(query, args.k)  # warm the matrix cache
            timings = []
            for _ in range(args.queries):
                query = Embedding(values=unit(rng, dim), dim=dim, embedder_id="bench")
                start = time.perf_counter()
                store.top_k(query, args.k)
                timings.append((time.perf_counter() - start) * 1000)
            timings.sort()
            median = statistics.median(timings)
            p95 = timings[int(len(timings) * 0.95) - 1]
            print(f"{count:>8} {dim:>5} {median:>10.3f} {p95:>8.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
