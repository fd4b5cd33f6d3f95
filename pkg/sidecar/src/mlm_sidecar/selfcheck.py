"""In-process health check: run probe texts through the full message loop
and assert the distribution and correlation invariants."""
from __future__ import annotations

import io
import json

from .protocol import DEFAULT_MAX_TOP_K, PROTOCOL_VERSION, encode
from .server import handle_message, serve_stream

PROBES = [
    "the capital of france is [SLOT]",
    "[SLOT] is a large technology company",
    "she sailed down the [SLOT] river",
    "[SLOT]",
]


def run_selfcheck(backend, max_top_k: int = DEFAULT_MAX_TOP_K,
                  soak_requests: int = 100) -> dict:
    checks = {}

    replies = [
        json.loads(encode(handle_message(
            json.dumps({"type": "score", "id": i, "text": text, "top_k": 10}),
            backend, max_top_k,
        )))
        for i, text in enumerate(PROBES)
    ]
    scored = [r for r in replies if r["type"] == "scores"]
    checks["probes_answered"] = len(scored) == len(PROBES)
    checks["sums_at_most_one"] = all(
        sum(p for _, p in r["tokens"]) <= 1.0 + 1e-9 for r in scored
    )
    checks["descending"] = all(
        all(a[1] >= b[1] for a, b in zip(r["tokens"], r["tokens"][1:]))
        for r in scored
    )
    checks["probabilities_in_range"] = all(
        0.0 < p <= 1.0 for r in scored for _, p in r["tokens"]
    )

    # pipelined soak: ids echo back one-to-one and in submission order for a
    # single-worker loop
    request_lines = "".join(
        encode({"type": "score", "id": 1000 + i,
                "text": f"probe number {i} says [SLOT] loudly", "top_k": 5})
        for i in range(soak_requests)
    )
    out = io.StringIO()
    serve_stream(io.StringIO(request_lines), out, backend, max_top_k)
    soak = [json.loads(line) for line in out.getvalue().splitlines()]
    checks["soak_ids_echoed"] = [r.get("id") for r in soak] == [
        1000 + i for i in range(soak_requests)
    ]
    checks["soak_all_scored"] = all(r["type"] == "scores" for r in soak)

    return {
        "model": backend.name,
        "protocol": PROTOCOL_VERSION,
        "max_top_k": max_top_k,
        "checks": checks,
        "ok": all(checks.values()),
    }
