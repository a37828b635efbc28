"""Programmatic agents for synthetic experiments.

They emit the same fenced-json response shape real backends do, so runs
through them exercise the full parsing and validation path. Latency is
simulated with a sleep, which is what the scalability measurements time.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Callable

from .base import AgentRequest
from .scripted import statement_hash


@dataclass
class SyntheticAnalyzer:
    """Expands any pending tree one level with a fixed branching factor.

    Each call emits children for every current leaf of the tree it is shown
    (ids are derived from the parent id), then signals completion on the
    next call for the same tree state.
    """

    branching: int = 3
    latency_s: float = 0.0
    levels: int = 1  # how many expansion rounds before signalling completion
    calls: int = 0

    def respond(self, request: AgentRequest) -> str:
        self.calls += 1
        if self.latency_s:
            time.sleep(self.latency_s)
        tree_state = request.metadata.get("tree_state", {})
        rounds = request.metadata.get("round", 1)
        if rounds > self.levels:
            return "Analysis complete.\n\n```json\n[]\n```\n"
        expansions = []
        for nid, info in sorted(tree_state.items()):
            if info.get("children"):
                continue
            children = {}
            for i in range(1, self.branching + 1):
                cid = f"P{i}" if nid == "P0" else f"{nid}.{i}"
                children[cid] = f"Synthetic driver {cid} of ({info['statement']})"
            expansions.append({"parent": nid, "children": children,
                               "causality": f"drivers of {nid}"})
        return f"Expanding.\n\n```json\n{json.dumps(expansions)}\n```\n"


def value_from_statement(statement: str) -> float:
    """Deterministic pseudo-value in [0, 1] derived from the statement text."""
    return int(statement_hash(statement), 16) / float(0xFFFFFFFFFFFFFFFF)


@dataclass
class SyntheticGrounder:
    latency_s: float = 0.0
    value_fn: Callable[[str], float] = value_from_statement
    calls: int = 0

    def respond(self, request: AgentRequest) -> str:
        self.calls += 1
        if self.latency_s:
            time.sleep(self.latency_s)
        p = self.value_fn(request.statement or "")
        body = {"p_true": round(p, 6), "key_factor": "synthetic evidence"}
        return f"Synthetic grounding report.\n\n```json\n{json.dumps(body)}\n```\n"


@dataclass
class SyntheticSynthesizer:
    """Equal-weight linear synthesizer with zero intercept."""

    latency_s: float = 0.0
    calls: int = 0

    def respond(self, request: AgentRequest) -> str:
        self.calls += 1
        if self.latency_s:
            time.sleep(self.latency_s)
        child_ids = request.metadata.get("child_ids", [])
        k = max(len(child_ids), 1)
        beta = {"beta_0": 0.0}
        beta.update({cid: 1.0 / k for cid in child_ids})
        body = {"beta": beta, "key_factor": "equal weighting"}
        return f"Synthetic synthesis.\n\n```json\n{json.dumps(body)}\n```\n"
