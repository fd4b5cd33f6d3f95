"""The request/reply loop and its stdio / TCP transports.

One inference worker handles requests in arrival order; replies are
correlated by id, so a pipelining client sees no reordering. Request-level
failures are answered with error replies and never terminate the loop.
"""
from __future__ import annotations

import socket
import sys

from .protocol import (
    DEFAULT_MAX_TOP_K,
    RequestError,
    encode,
    error_reply,
    parse_line,
    parse_score,
    ready_reply,
    scores_reply,
)


def handle_message(line: str, backend, max_top_k: int) -> dict:
    """One request in, one reply out; errors become error replies."""
    try:
        message = parse_line(line)
        kind = message["type"]
        if kind == "hello":
            return ready_reply(backend.name, max_top_k)
        if kind == "score":
            req_id, query = parse_score(message, max_top_k)
            try:
                tokens = backend.score(query)
            except Exception as exc:  # backend bugs must not kill the loop
                raise RequestError(req_id, f"scoring failed: {exc}") from exc
            return scores_reply(req_id, tokens)
        raise RequestError(
            message.get("id") if isinstance(message.get("id"), int) else -1,
            f"unknown request type {kind!r}",
        )
    except RequestError as exc:
        return error_reply(exc.req_id, str(exc))


def serve_stream(reader, writer, backend, max_top_k: int = DEFAULT_MAX_TOP_K) -> int:
    """Run the loop until EOF; returns the number of requests handled."""
    handled = 0
    for line in reader:
        if not line.strip():
            continue
        writer.write(encode(handle_message(line, backend, max_top_k)))
        writer.flush()
        handled += 1
    return handled


def serve_stdio(backend, max_top_k: int = DEFAULT_MAX_TOP_K) -> None:
    serve_stream(sys.stdin, sys.stdout, backend, max_top_k)


def serve_tcp(backend, port: int, max_top_k: int = DEFAULT_MAX_TOP_K,
              host: str = "127.0.0.1", ready_callback=None) -> None:
    """Accept connections one at a time, each with its own handshake."""
    with socket.create_server((host, port)) as server:
        if ready_callback is not None:
            ready_callback(server.getsockname()[1])
        while True:
            conn, _ = server.accept()
            with conn:
                # distinct reader/writer objects: a shared rw text wrapper
                # drops read-ahead data when written to
                reader = conn.makefile("r", encoding="utf-8", newline="\n")
                writer = conn.makefile("w", encoding="utf-8", newline="\n")
                try:
                    serve_stream(reader, writer, backend, max_top_k)
                except (BrokenPipeError, ConnectionResetError):
                    pass
