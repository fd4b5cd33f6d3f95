"""Client for the external slot-scoring sidecar.

Wire format: newline-delimited JSON over stdio (child process) or a local
TCP socket.

    -> {"type":"hello","protocol":1}
    <- {"type":"ready","model":"<name>","max_top_k":<int>}
    -> {"type":"score","id":<int>,"text":"<left> [SLOT] <right>","top_k":<int>}
    <- {"type":"scores","id":<int>,"tokens":[["<tok>",<prob>],...]}
    <- {"type":"error","id":<int>,"message":"..."}

Requests may be pipelined; replies are correlated by id.
"""
from __future__ import annotations

import json
import socket
import subprocess

from .errors import ProtocolError, ScorerUnavailableError

PROTOCOL_VERSION = 1
WIRE_SLOT = "[SLOT]"


class SidecarClient:
    def __init__(self, reader, writer, closer):
        self._reader = reader
        self._writer = writer
        self._closer = closer
        self.model_name: str | None = None
        self.max_top_k: int | None = None
        self._next_id = 0

    @classmethod
    def from_command(cls, argv: list[str]) -> "SidecarClient":
        try:
            proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise ScorerUnavailableError(f"cannot start sidecar: {exc}") from exc

        def closer():
            proc.stdin.close()
            proc.wait(timeout=10)

        client = cls(proc.stdout, proc.stdin, closer)
        client._proc = proc
        client.handshake()
        return client

    @classmethod
    def from_tcp(cls, host: str, port: int, timeout: float = 10.0) -> "SidecarClient":
        try:
            sock = socket.create_connection((host, port), timeout=timeout)
        except OSError as exc:
            raise ScorerUnavailableError(f"cannot reach sidecar: {exc}") from exc
        # separate reader/writer: a shared rw text wrapper loses buffered
        # input when written to
        reader = sock.makefile("r", encoding="utf-8", newline="\n")
        writer = sock.makefile("w", encoding="utf-8", newline="\n")
        client = cls(reader, writer, sock.close)
        client.handshake()
        return client

    def _send(self, message: dict) -> None:
        try:
            self._writer.write(json.dumps(message) + "\n")
            self._writer.flush()
        except (OSError, ValueError) as exc:
            raise ScorerUnavailableError(f"sidecar write failed: {exc}") from exc

    def _recv(self) -> dict:
        try:
            line = self._reader.readline()
        except OSError as exc:
            raise ScorerUnavailableError(f"sidecar read failed: {exc}") from exc
        if not line:
            raise ScorerUnavailableError("sidecar closed the connection")
        try:
            message = json.loads(line)
        except json.JSONDecodeError:
            raise ProtocolError("sidecar sent invalid JSON", line.strip()) from None
        if not isinstance(message, dict) or "type" not in message:
            raise ProtocolError("sidecar reply has no type", line.strip())
        return message

    def handshake(self) -> None:
        self._send({"type": "hello", "protocol": PROTOCOL_VERSION})
        reply = self._recv()
        if reply.get("type") != "ready":
            raise ProtocolError(f"expected ready, got {reply.get('type')!r}")
        self.model_name = reply.get("model")
        self.max_top_k = reply.get("max_top_k")

    def score_batch(
        self, texts: list[str], top_k: int
    ) -> list[list[tuple[str, float]]]:
        """Pipeline one score request per text; replies matched by id."""
        ids = []
        for text in texts:
            req_id = self._next_id
            self._next_id += 1
            ids.append(req_id)
            self._send(
                {"type": "score", "id": req_id, "text": text, "top_k": top_k}
            )
        pending = dict.fromkeys(ids)
        remaining = len(ids)
        while remaining:
            reply = self._recv()
            kind = reply.get("type")
            if kind == "error":
                raise ProtocolError(
                    f"sidecar error for request {reply.get('id')}: "
                    f"{reply.get('message')}"
                )
            if kind != "scores":
                raise ProtocolError(f"unexpected reply type {kind!r}")
            req_id = reply.get("id")
            if req_id not in pending or pending[req_id] is not None:
                raise ProtocolError(f"unmatched reply id {req_id!r}")
            tokens = reply.get("tokens")
            if not isinstance(tokens, list):
                raise ProtocolError("scores reply missing token list")
            parsed = []
            for item in tokens:
                if (
                    not isinstance(item, list)
                    or len(item) != 2
                    or not isinstance(item[0], str)
                ):
                    raise ProtocolError(f"malformed token entry {item!r}")
                parsed.append((item[0], float(item[1])))
            pending[req_id] = parsed
            remaining -= 1
        return [pending[i] for i in ids]

    def close(self) -> None:
        try:
            self._closer()
        except Exception:
            pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
