"""Line protocol shared by the bridge client and the reference server.

One JSON object per line in each direction. Requests carry an ``op``
field; replies are ``{"ok": true, "payload": ...}`` on success and
``{"ok": false, "error": "..."}`` on failure. Reply lines use
canonical JSON: sorted keys, tight separators, trailing newline.
"""

from __future__ import annotations

import json

from ..errors import DataError

OPS = ("train", "continue_train", "score", "save", "load", "shutdown")


def canonical_line(obj: object) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def ok_reply(payload: object) -> dict:
    return {"ok": True, "payload": payload}


def error_reply(message: str) -> dict:
    return {"ok": False, "error": message}


def parse_request(line: str) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise DataError(f"invalid JSON request ({exc.msg})") from None
    if not isinstance(obj, dict):
        raise DataError("request must be a JSON object")
    op = obj.get("op")
    if op not in OPS:
        raise DataError(f"unknown op {op!r} (known: {list(OPS)})")
    return obj


def require(obj: dict, field: str, kind: type) -> object:
    if field not in obj:
        raise DataError(f"op {obj.get('op')!r} requires field {field!r}")
    value = obj[field]
    if kind is int and isinstance(value, bool):
        raise DataError(f"field {field!r} must be {kind.__name__}")
    if not isinstance(value, kind):
        raise DataError(f"field {field!r} must be {kind.__name__}")
    return value
