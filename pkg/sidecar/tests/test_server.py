import io
import json
import socket
import threading

import pytest

from mlm_sidecar.backends import StubBackend
from mlm_sidecar.protocol import encode
from mlm_sidecar.selfcheck import run_selfcheck
from mlm_sidecar.server import handle_message, serve_stream, serve_tcp


BACKEND = StubBackend()


def roundtrip(message, max_top_k=200):
    return handle_message(json.dumps(message), BACKEND, max_top_k)


def test_hello_ready():
    reply = roundtrip({"type": "hello", "protocol": 1}, max_top_k=123)
    assert reply == {"type": "ready", "model": "stub", "max_top_k": 123}


def test_score_reply_shape():
    reply = roundtrip(
        {"type": "score", "id": 9, "text": "the [SLOT] runs", "top_k": 8}
    )
    assert reply["type"] == "scores" and reply["id"] == 9
    probs = [p for _, p in reply["tokens"]]
    assert len(probs) <= 8
    assert probs == sorted(probs, reverse=True)
    assert sum(probs) <= 1.0


def test_stub_deterministic_and_context_sensitive():
    a = roundtrip({"type": "score", "id": 1, "text": "x [SLOT] y", "top_k": 5})
    b = roundtrip({"type": "score", "id": 2, "text": "x [SLOT] y", "top_k": 5})
    c = roundtrip({"type": "score", "id": 3, "text": "q [SLOT] r", "top_k": 5})
    assert a["tokens"] == b["tokens"]
    assert a["tokens"] != c["tokens"]


def test_unknown_type_and_bad_requests_become_errors():
    assert roundtrip({"type": "dance", "id": 4})["type"] == "error"
    assert handle_message("garbage{", BACKEND, 200) == {
        "type": "error",
        "id": -1,
        "message": "invalid JSON",
    }
    two_slots = roundtrip(
        {"type": "score", "id": 5, "text": "[SLOT] a [SLOT]"}
    )
    assert two_slots["type"] == "error" and two_slots["id"] == 5


def test_backend_crash_becomes_error_reply():
    class Exploding:
        name = "boom"

        def score(self, query):
            raise RuntimeError("kaput")

    reply = handle_message(
        json.dumps({"type": "score", "id": 6, "text": "[SLOT]"}), Exploding(), 200
    )
    assert reply["type"] == "error" and "kaput" in reply["message"]


def test_serve_stream_survives_malformed_lines():
    lines = [
        encode({"type": "hello", "protocol": 1}),
        "not json at all\n",
        encode({"type": "score", "id": 1, "text": "a [SLOT] b", "top_k": 3}),
        "\n",  # blank lines are skipped silently
        encode({"type": "score", "id": 2, "text": "no slot"}),
        encode({"type": "score", "id": 3, "text": "c [SLOT] d", "top_k": 3}),
    ]
    out = io.StringIO()
    handled = serve_stream(io.StringIO("".join(lines)), out, BACKEND, 200)
    replies = [json.loads(line) for line in out.getvalue().splitlines()]
    assert handled == 5
    kinds = [r["type"] for r in replies]
    assert kinds == ["ready", "error", "scores", "error", "scores"]
    assert replies[1]["id"] == -1
    assert [r["id"] for r in replies[2:]] == [1, 2, 3]


def test_serve_tcp_round_trip():
    port_box = {}
    ready = threading.Event()

    def run():
        serve_tcp(
            BACKEND, 0,
            ready_callback=lambda p: (port_box.update(port=p), ready.set()),
        )

    thread = threading.Thread(target=run, daemon=True)
    thread.start()
    assert ready.wait(timeout=5)
    with socket.create_connection(("127.0.0.1", port_box["port"]), timeout=5) as sock:
        reader = sock.makefile("r", encoding="utf-8", newline="\n")
        writer = sock.makefile("w", encoding="utf-8", newline="\n")
        writer.write(encode({"type": "hello", "protocol": 1}))
        writer.write(encode({"type": "score", "id": 7, "text": "x [SLOT]", "top_k": 2}))
        writer.flush()
        ready_msg = json.loads(reader.readline())
        scores = json.loads(reader.readline())
    assert ready_msg["type"] == "ready"
    assert scores["id"] == 7 and len(scores["tokens"]) <= 2


def test_core_client_over_tcp():
    pytest.importorskip("facetexpand")
    from facetexpand.sidecar_client import SidecarClient

    port_box = {}
    ready = threading.Event()
    threading.Thread(
        target=lambda: serve_tcp(
            BACKEND, 0,
            ready_callback=lambda p: (port_box.update(port=p), ready.set()),
        ),
        daemon=True,
    ).start()
    assert ready.wait(timeout=5)
    with SidecarClient.from_tcp("127.0.0.1", port_box["port"]) as client:
        assert client.model_name == "stub"
        replies = client.score_batch(
            [f"context {i} [SLOT] here" for i in range(20)], top_k=4
        )
    assert len(replies) == 20
    assert all(len(tokens) <= 4 for tokens in replies)


def test_selfcheck_green_on_stub():
    report = run_selfcheck(BACKEND, soak_requests=20)
    assert report["ok"], report
    assert report["protocol"] == 1
