#!/usr/bin/env python3
"""Regenerate the scripted-agent fixture for the worked 26-node tree.

The fixture drives a full deterministic pipeline run: an analyzer that
expands the root into four drivers and then deepens each, a grounder
returning the fixed leaf values, and a linear synthesizer returning the
fixed coefficient sets. Output: tests/fixtures/golden_agents.json
"""

from __future__ import annotations

import json
from pathlib import Path

ROOT_STATEMENT = "Long stock NVDA and hold for one year is the best option"

BETAS: dict[str, tuple[float, dict[str, float]]] = {
    "P0": (0.05, {"P1": 0.2, "P2": 0.3, "P3": 0.3, "P4": 0.15}),
    "P1": (0.05, {"P1.1": 0.25, "P1.2": 0.25, "P1.3": 0.30, "P1.4": 0.15}),
    "P1.1": (-0.05, {"P1.1.1": 0.40, "P1.1.2": 0.35, "P1.1.3": 0.25}),
    "P1.2": (0.07, {"P1.2.1": 0.45, "P1.2.2": 0.45}),
    "P1.3": (0.05, {"P1.3.1": 0.45, "P1.3.2": 0.45}),
    "P1.4": (0.05, {"P1.4.1": 0.50, "P1.4.2": 0.30}),
    "P2": (0.10, {"P2.1": 0.25, "P2.2": 0.20, "P2.3": 0.40}),
    "P3": (0.02, {"P3.1": 0.38, "P3.2": 0.42, "P3.3": 0.20}),
    "P4": (0.05, {"P4.1": 0.60, "P4.2": 0.30}),
}

LEAF_VALUES: dict[str, float] = {
    "P1.1.1": 0.90, "P1.1.2": 0.90, "P1.1.3": 0.92,
    "P1.2.1": 0.85, "P1.2.2": 0.75,
    "P1.3.1": 0.85, "P1.3.2": 0.85,
    "P1.4.1": 0.80, "P1.4.2": 0.362,
    "P2.1": 1.00, "P2.2": 0.85, "P2.3": 0.96,
    "P3.1": 0.85, "P3.2": 0.95, "P3.3": 0.95,
    "P4.1": 0.80, "P4.2": 0.75,
}

# First-level node values when grounded directly (depth-1 runs with a
# leaf budget of 4 stop after the first expansion batch).
DEPTH1_VALUES: dict[str, float] = {
    "P1": 0.7895, "P2": 0.9040, "P3": 0.9320, "P4": 0.7550,
}


def expansion(parent: str) -> dict:
    children = {cid: f"Sub-proposition {cid} of {parent}"
                for cid in BETAS[parent][1]}
    return {"parent": parent, "children": children,
            "causality": f"children jointly support {parent}"}


def main() -> None:
    # First analyzer batch expands the root (4 leaves, still under the
    # budget); the second deepens every first-level driver (17 leaves).
    step1 = [expansion("P0")]
    step2 = [expansion(parent) for parent in sorted(BETAS) if parent != "P0"]

    grounder_responses = {
        nid: {"p_true": value,
              "key_factor": f"decisive synthetic evidence for {nid}",
              "report": f"Scripted grounding report for {nid}."}
        for nid, value in {**LEAF_VALUES, **DEPTH1_VALUES}.items()
    }

    synthesizer_responses = {}
    for nid, (beta0, betas) in BETAS.items():
        beta = {"beta_0": beta0}
        beta.update(betas)
        synthesizer_responses[nid] = {
            "beta": beta,
            "key_factor": f"weighted drivers of {nid}",
            "report": f"Scripted synthesis rationale for {nid}.",
        }

    fixture = {
        "analyzer": {
            "responses": {"P0": {"sequence": [step1, step2]}},
            "default": [],
        },
        "grounder": {"responses": grounder_responses},
        "synthesizer": {"responses": synthesizer_responses},
    }

    out = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
    out.mkdir(parents=True, exist_ok=True)
    path = out / "golden_agents.json"
    path.write_text(json.dumps(fixture, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
