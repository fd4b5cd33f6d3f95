import pytest

from mlm_sidecar.protocol import (
    RequestError,
    SlotQuery,
    encode,
    error_reply,
    parse_line,
    parse_score,
    ready_reply,
    scores_reply,
)


def test_parse_line_valid():
    assert parse_line('{"type":"hello","protocol":1}') == {
        "type": "hello",
        "protocol": 1,
    }


def test_parse_line_invalid_json_gets_id_minus_one():
    with pytest.raises(RequestError) as exc_info:
        parse_line("{not json")
    assert exc_info.value.req_id == -1


def test_parse_line_non_object():
    with pytest.raises(RequestError):
        parse_line("[1,2]")
    with pytest.raises(RequestError):
        parse_line('{"id": 7}')  # no type


def test_parse_score_happy_path():
    req_id, query = parse_score(
        {"type": "score", "id": 3, "text": "a b [SLOT] c", "top_k": 5},
        max_top_k=200,
    )
    assert req_id == 3
    assert query.left == "a b"
    assert query.right == "c"
    assert query.top_k == 5


def test_parse_score_defaults_top_k():
    _, query = parse_score(
        {"type": "score", "id": 1, "text": "[SLOT] x"}, max_top_k=50
    )
    assert query.top_k == 50


@pytest.mark.parametrize(
    "message",
    [
        {"type": "score", "text": "[SLOT]"},  # no id
        {"type": "score", "id": 1, "text": ""},
        {"type": "score", "id": 1, "text": "no slot here"},
        {"type": "score", "id": 1, "text": "[SLOT] and [SLOT]"},
        {"type": "score", "id": 1, "text": "[SLOT]", "top_k": 0},
        {"type": "score", "id": 1, "text": "[SLOT]", "top_k": 10_000},
    ],
)
def test_parse_score_rejects(message):
    with pytest.raises(RequestError):
        parse_score(message, max_top_k=200)


def test_slot_query_edges():
    query = SlotQuery(text="[SLOT] trailing words", top_k=1)
    assert query.left == ""
    assert query.right == "trailing words"


def test_reply_builders_and_encode():
    assert ready_reply("m", 7) == {"type": "ready", "model": "m", "max_top_k": 7}
    assert scores_reply(2, [("a", 0.5)]) == {
        "type": "scores",
        "id": 2,
        "tokens": [["a", 0.5]],
    }
    assert error_reply(-1, "boom")["id"] == -1
    assert encode({"a": 1}).endswith("\n")
