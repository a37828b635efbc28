"""Canonical JSON document bytes.

One serialization for everything persisted or hashed: UTF-8, sorted keys,
compact separators, floats rendered with at most 12 significant digits.
Canonicalization is idempotent, so serialize(deserialize(doc)) is
byte-identical for documents that were canonical to begin with.
"""

from __future__ import annotations

import json
from typing import Any


def _round_floats(value: Any) -> Any:
    if isinstance(value, float):
        # 12 significant digits, re-parsed so json emits the short repr.
        return float(format(value, ".12g"))
    if isinstance(value, dict):
        return {k: _round_floats(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round_floats(v) for v in value]
    return value


def canonical_dumps(doc: Any) -> str:
    return json.dumps(_round_floats(doc), sort_keys=True, ensure_ascii=False,
                      separators=(",", ":"))


def canonical_bytes(doc: Any) -> bytes:
    return canonical_dumps(doc).encode("utf-8")


def canonical_loads(data: str | bytes) -> Any:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return json.loads(data)
