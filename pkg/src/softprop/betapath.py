"""Flattening nested linear rules into a single root-as-function-of-leaves
form.

Algebraically expanding the per-node linear equations from the root down
gives root = b0' + sum_i b_i' * leaf_i where each leaf weight b_i' is the
product of the local weights along the unique root-to-leaf path, and b0'
accumulates every internal intercept scaled by the path weight of the node
carrying it. Bias of the root is then the b'-weighted sum of leaf biases,
and variance follows the usual quadratic form in the leaf covariance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .errors import InvalidInput, MixedRules, SchemaMismatch
from .records import LinearRecord
from .tree import PropositionTree, node_sort_key


@dataclass
class BetaPathSummary:
    aggregated_intercept: float
    leaf_weights: dict[str, float]

    def evaluate(self, leaf_values: Mapping[str, float]) -> float:
        if set(leaf_values) != set(self.leaf_weights):
            raise SchemaMismatch("leaf values do not match the flattened weights")
        total = self.aggregated_intercept
        for leaf, weight in self.leaf_weights.items():
            total += weight * leaf_values[leaf]
        return total


def compute_beta_paths(tree: PropositionTree) -> BetaPathSummary:
    """Flatten an all-linear tree. Every internal node must carry a
    LinearRecord covering exactly its children; anything else is MixedRules.
    """
    intercept = 0.0
    leaf_weights: dict[str, float] = {}
    # (node id, accumulated product of weights root -> node)
    stack = [(tree.root, 1.0)]
    while stack:
        nid, weight = stack.pop()
        node = tree.node(nid)
        if node.is_leaf():
            leaf_weights[nid] = weight
            continue
        record = node.synthesis
        if not isinstance(record, LinearRecord):
            raise MixedRules(
                f"internal node {nid} carries {type(record).__name__}, need LinearRecord")
        if set(record.betas) != set(node.children):
            raise SchemaMismatch(f"record at {nid} does not cover its children")
        intercept += weight * record.beta0
        for cid in node.children:
            stack.append((cid, weight * record.betas[cid]))
    return BetaPathSummary(
        aggregated_intercept=intercept,
        leaf_weights={k: leaf_weights[k]
                      for k in sorted(leaf_weights, key=node_sort_key)},
    )


def propagate_bias(summary: BetaPathSummary,
                   leaf_biases: Mapping[str, float]) -> float:
    """Root bias as the beta-path-weighted sum of leaf biases."""
    if set(leaf_biases) != set(summary.leaf_weights):
        raise SchemaMismatch("leaf biases do not match the flattened weights")
    return sum(summary.leaf_weights[leaf] * bias
               for leaf, bias in leaf_biases.items())


def propagate_variance(summary: BetaPathSummary,
                       leaf_cov: Mapping[str, Mapping[str, float] | float]) -> float:
    """Root variance: sum_i b_i'^2 Var_i + sum_{i != j} b_i' b_j' Cov_ij.

    Accepts either a flat mapping leaf -> variance (independent leaves,
    off-diagonals default to zero) or a nested mapping giving the full
    covariance matrix, which must be symmetric.
    """
    leaves = list(summary.leaf_weights)
    flat = all(not isinstance(v, Mapping) for v in leaf_cov.values())
    if flat:
        if set(leaf_cov) != set(leaves):
            raise SchemaMismatch("variances do not match the flattened weights")
        return sum(summary.leaf_weights[i] ** 2 * float(leaf_cov[i])
                   for i in leaves)

    def entry(i: str, j: str) -> float:
        row = leaf_cov.get(i)
        if row is None or not isinstance(row, Mapping):
            return 0.0
        return float(row.get(j, 0.0))

    for i in leaves:
        for j in leaves:
            if abs(entry(i, j) - entry(j, i)) > 1e-12:
                raise InvalidInput(f"covariance matrix asymmetric at ({i}, {j})")
    total = 0.0
    for i in leaves:
        for j in leaves:
            total += summary.leaf_weights[i] * summary.leaf_weights[j] * entry(i, j)
    return total
