"""Soft propositional reasoning engine.

Decomposes a query proposition into a tree, grounds leaves through
pluggable agents, synthesizes soft truth values bottom-up under validated
rules, and supports incremental what-if resynthesis. Ships a simulation
lab for bias/variance, robustness, and scalability experiments plus an
evaluation harness for forecasting tasks.
"""

from .tree import (PropositionNode, PropositionTree, add_children, create_tree,
                   leaves, validate_tree)

__all__ = [
    "PropositionNode",
    "PropositionTree",
    "add_children",
    "create_tree",
    "leaves",
    "validate_tree",
]

__version__ = "0.1.0"
