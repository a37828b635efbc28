"""Deterministic scripted agents for tests and simulation.

A fixture maps node ids or statement hashes to canned outputs. A canned
value may be raw response text, a structured payload (rendered as prose
plus a fenced json block), or ``{"sequence": [...]}`` consumed one entry
per call to script fail-then-succeed behavior. Lookup order: node id,
statement hash, default.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any

from ..canonical import canonical_loads
from ..errors import InvalidConfig
from .base import AgentRequest

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_WS_RE = re.compile(r"\s+")


def statement_hash(statement: str) -> str:
    """64-bit FNV-1a of the lowercased, whitespace-collapsed statement."""
    normalized = _WS_RE.sub(" ", statement.strip().lower())
    value = _FNV_OFFSET
    for byte in normalized.encode("utf-8"):
        value ^= byte
        value = (value * _FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return f"{value:016x}"


def render_canned(value: Any) -> str:
    """Turn a structured canned output into agent-shaped response text."""
    if isinstance(value, str):
        return value
    if isinstance(value, dict) and "report" in value:
        body = {k: v for k, v in value.items() if k != "report"}
        return f"{value['report']}\n\n```json\n{json.dumps(body)}\n```\n"
    return f"Scripted result.\n\n```json\n{json.dumps(value)}\n```\n"


@dataclass
class ScriptedAgent:
    role: str
    fixture: dict[str, Any] = field(default_factory=dict)
    default: Any = None
    calls: list[AgentRequest] = field(default_factory=list)
    _cursors: dict[str, int] = field(default_factory=dict)

    def reset(self) -> None:
        """Rewind scripted sequences; makes repeated runs identical."""
        self._cursors.clear()
        self.calls.clear()

    def _lookup(self, request: AgentRequest) -> tuple[str, Any]:
        if request.node_id is not None and request.node_id in self.fixture:
            return request.node_id, self.fixture[request.node_id]
        if request.statement is not None:
            key = statement_hash(request.statement)
            if key in self.fixture:
                return key, self.fixture[key]
        if self.default is None:
            raise InvalidConfig(
                f"scripted {self.role} has no answer for node={request.node_id!r} "
                f"statement={request.statement!r} and no default")
        return "__default__", self.default

    def respond(self, request: AgentRequest) -> str:
        self.calls.append(request)
        key, canned = self._lookup(request)
        if isinstance(canned, dict) and "sequence" in canned:
            entries = canned["sequence"]
            cursor = self._cursors.get(key, 0)
            entry = entries[min(cursor, len(entries) - 1)]
            self._cursors[key] = cursor + 1
            return render_canned(entry)
        return render_canned(canned)


def load_fixture_file(path: str) -> dict[str, ScriptedAgent]:
    """Load one fixture document holding all scripted roles.

    Shape: {"<role>": {"responses": {<node id or statement or hash>: ...},
                       "default": ...}}. Plain-statement keys are hashed at
    load so fixtures stay human-readable.
    """
    with open(path, "r", encoding="utf-8") as fh:
        doc = canonical_loads(fh.read())
    agents = {}
    for role, spec in doc.items():
        responses = {}
        for key, value in (spec.get("responses") or {}).items():
            if not re.match(r"^(P\d+(\.\d+)*|[0-9a-f]{16})$", key):
                key = statement_hash(key)
            responses[key] = value
        agents[role] = ScriptedAgent(role=role, fixture=responses,
                                     default=spec.get("default"))
    return agents
