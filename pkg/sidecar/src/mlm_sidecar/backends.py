"""Scoring backends: a real masked-language model and a deterministic stub.

Both return a descending-probability list of (surface token, probability)
pairs for the slot position; probabilities come from one softmax, so any
truncated subset sums to at most 1.
"""
from __future__ import annotations

import hashlib
import math

from .protocol import SlotQuery

STUB_MODEL = "stub"


class StubBackend:
    """Deterministic fake model for protocol tests and offline development.

    The distribution is a hash of the context text: same text, same reply;
    different texts disagree. Tokens are drawn from a small fixed
    vocabulary with geometrically decaying probabilities.
    """

    name = STUB_MODEL
    _VOCAB = [f"ent{i:02d}" for i in range(64)]

    def score(self, query: SlotQuery) -> list[tuple[str, float]]:
        digest = hashlib.sha256(
            (query.left + "\x00" + query.right).encode("utf-8")
        ).digest()
        order = sorted(
            range(len(self._VOCAB)),
            key=lambda i: hashlib.sha256(digest + bytes([i])).digest(),
        )
        mass = 0.6  # leave headroom so truncated sums stay clearly below 1
        tokens = []
        for rank, index in enumerate(order[: query.top_k]):
            prob = mass * (0.5 ** rank) * 0.5
            if prob < 1e-12:
                break
            tokens.append((self._VOCAB[index], prob))
        return tokens


class BertBackend:
    """Masked-token probabilities from a pre-trained transformer."""

    def __init__(self, model_name: str = "bert-base-uncased"):
        import torch
        from transformers import AutoModelForMaskedLM, AutoTokenizer

        self._torch = torch
        self.name = model_name
        self.tokenizer = AutoTokenizer.from_pretrained(model_name)
        self.model = AutoModelForMaskedLM.from_pretrained(model_name)
        self.model.eval()

    def _build_ids(self, query: SlotQuery) -> tuple[list[int], int]:
        """Token ids with specials and the mask position; long contexts are
        trimmed from the ends farthest from the slot."""
        tok = self.tokenizer
        left = tok.encode(query.left, add_special_tokens=False) if query.left else []
        right = tok.encode(query.right, add_special_tokens=False) if query.right else []
        budget = tok.model_max_length - 3  # [CLS], [MASK], [SEP]
        if len(left) + len(right) > budget:
            keep = budget // 2
            left = left[-keep:]
            right = right[: budget - len(left)]
        ids = [tok.cls_token_id] + left + [tok.mask_token_id] + right + [tok.sep_token_id]
        return ids, 1 + len(left)

    def score(self, query: SlotQuery) -> list[tuple[str, float]]:
        torch = self._torch
        ids, mask_pos = self._build_ids(query)
        with torch.no_grad():
            logits = self.model(input_ids=torch.tensor([ids])).logits[0, mask_pos]
            probs = torch.softmax(logits, dim=-1)
        ranked = torch.argsort(probs, descending=True)
        tokens = []
        for index in ranked.tolist():
            if len(tokens) >= query.top_k:
                break
            surface = self.tokenizer.convert_ids_to_tokens(index)
            # keep clean single-piece word tokens only: no subword
            # continuations, no specials like [unused7]
            if surface.startswith("##") or surface.startswith("["):
                continue
            tokens.append((surface, float(probs[index])))
        return tokens


def load_backend(model_name: str):
    if model_name == STUB_MODEL:
        return StubBackend()
    return BertBackend(model_name)
