"""Wire protocol: newline-delimited JSON request/reply messages.

    -> {"type":"hello","protocol":1}
    <- {"type":"ready","model":"<name>","max_top_k":<int>}
    -> {"type":"score","id":<int>,"text":"<left> [SLOT] <right>","top_k":<int>}
    <- {"type":"scores","id":<int>,"tokens":[["<tok>",<prob>],...]}
    <- {"type":"error","id":<int>,"message":"..."}

A request that cannot be parsed at all is answered with an error carrying
id -1; anything else echoes the request id.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

PROTOCOL_VERSION = 1
SLOT = "[SLOT]"
DEFAULT_MAX_TOP_K = 200


class RequestError(Exception):
    """A malformed or unsatisfiable request; answered, never fatal."""

    def __init__(self, req_id: int, message: str):
        self.req_id = req_id
        super().__init__(message)


@dataclass(frozen=True)
class SlotQuery:
    text: str
    top_k: int

    @property
    def left(self) -> str:
        return self.text[: self.text.index(SLOT)].strip()

    @property
    def right(self) -> str:
        return self.text[self.text.index(SLOT) + len(SLOT) :].strip()


def parse_line(line: str) -> dict:
    try:
        message = json.loads(line)
    except json.JSONDecodeError:
        raise RequestError(-1, "invalid JSON") from None
    if not isinstance(message, dict):
        raise RequestError(-1, "request must be a JSON object")
    if not isinstance(message.get("type"), str):
        raise RequestError(_req_id(message), "request has no type")
    return message


def _req_id(message: dict) -> int:
    req_id = message.get("id")
    return req_id if isinstance(req_id, int) else -1


def parse_score(message: dict, max_top_k: int) -> tuple[int, SlotQuery]:
    req_id = message.get("id")
    if not isinstance(req_id, int):
        raise RequestError(-1, "score request needs an integer id")
    text = message.get("text")
    if not isinstance(text, str) or not text.strip():
        raise RequestError(req_id, "score request needs a non-empty text")
    slots = text.count(SLOT)
    if slots != 1:
        raise RequestError(req_id, f"text must contain exactly one {SLOT}, got {slots}")
    top_k = message.get("top_k", max_top_k)
    if not isinstance(top_k, int) or top_k < 1:
        raise RequestError(req_id, "top_k must be a positive integer")
    if top_k > max_top_k:
        raise RequestError(req_id, f"top_k {top_k} exceeds max_top_k {max_top_k}")
    return req_id, SlotQuery(text=text, top_k=top_k)


def ready_reply(model: str, max_top_k: int) -> dict:
    return {"type": "ready", "model": model, "max_top_k": max_top_k}


def scores_reply(req_id: int, tokens: list[tuple[str, float]]) -> dict:
    return {
        "type": "scores",
        "id": req_id,
        "tokens": [[tok, prob] for tok, prob in tokens],
    }


def error_reply(req_id: int, message: str) -> dict:
    return {"type": "error", "id": req_id, "message": message}


def encode(message: dict) -> str:
    return json.dumps(message, separators=(",", ":")) + "\n"
