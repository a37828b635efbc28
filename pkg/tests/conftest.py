from __future__ import annotations

import pytest

from softprop.records import LinearRecord
from softprop.tree import PropositionTree, add_children, create_tree

FIXED_CLOCK = "2024-06-01T00:00:00.000000Z"

# Worked depth-3 fixture: the published coefficient set with leaf values
# chosen so that bottom-up synthesis reproduces the published internal
# values at every level (root 0.8720, P1 0.7896, P1.1 0.855).
GOLDEN_BETAS: dict[str, tuple[float, dict[str, float]]] = {
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

GOLDEN_LEAF_VALUES: dict[str, float] = {
    "P1.1.1": 0.90, "P1.1.2": 0.90, "P1.1.3": 0.92,
    "P1.2.1": 0.85, "P1.2.2": 0.75,
    "P1.3.1": 0.85, "P1.3.2": 0.85,
    "P1.4.1": 0.80, "P1.4.2": 0.362,
    "P2.1": 1.00, "P2.2": 0.85, "P2.3": 0.96,
    "P3.1": 0.85, "P3.2": 0.95, "P3.3": 0.95,
    "P4.1": 0.80, "P4.2": 0.75,
}

GOLDEN_ROOT = 0.8720
GOLDEN_P1 = 0.7896
GOLDEN_P1_1 = 0.855

# Depth-1 slice of the same fixture: root over its four direct children at
# their published values.
DEPTH1_BETAS = GOLDEN_BETAS["P0"]
DEPTH1_VALUES = {"P1": 0.7895, "P2": 0.9040, "P3": 0.9320, "P4": 0.7550}


def build_golden_structure() -> PropositionTree:
    """The full 26-node structure (statements only, nothing grounded)."""
    tree = create_tree("Long stock NVDA and hold for one year is the best option",
                       created_at=FIXED_CLOCK)
    for parent, (_, betas) in sorted(GOLDEN_BETAS.items()):
        children = {cid: f"Sub-proposition {cid} of {parent}" for cid in betas}
        tree = add_children(tree, parent, children,
                            causality=f"children jointly support {parent}")
    return tree


def attach_golden_records(tree: PropositionTree) -> PropositionTree:
    for parent, (beta0, betas) in GOLDEN_BETAS.items():
        node = tree.node(parent)
        tree = tree.with_node(
            type(node)(**{**node.__dict__,
                          "synthesis": LinearRecord(beta0=beta0, betas=dict(betas))}))
    return tree


@pytest.fixture
def golden_structure() -> PropositionTree:
    return build_golden_structure()
