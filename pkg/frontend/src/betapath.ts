// Beta-path flattening of an all-linear tree document: each leaf's weight
// on the root is the product of the local weights along its path, and the
// intercepts accumulate scaled by the path weight of the node carrying
// them. Used for the client-side closed-form leaf sweep; any displayed
// use must be spot-checked against a server resynthesis.

import type { TreeDoc } from './types.js';
import { isLinear } from './types.js';

export interface BetaPathSummary {
  aggregatedIntercept: number;
  leafWeights: Map<string, number>;
}

export function computeBetaPaths(doc: TreeDoc): BetaPathSummary {
  let intercept = 0;
  const leafWeights = new Map<string, number>();
  const stack: Array<{ id: string; weight: number }> = [
    { id: doc.root, weight: 1 },
  ];
  while (stack.length > 0) {
    const { id, weight } = stack.pop()!;
    const node = doc.nodes[id];
    if (!node) throw new Error(`node ${id} missing from document`);
    if (node.children.length === 0) {
      leafWeights.set(id, weight);
      continue;
    }
    if (!isLinear(node.synthesis)) {
      throw new Error(`node ${id} does not carry a linear record`);
    }
    const beta = node.synthesis.beta;
    intercept += weight * beta.beta_0;
    for (const childId of node.children) {
      const childBeta = beta[childId];
      if (childBeta === undefined) {
        throw new Error(`record at ${id} does not cover child ${childId}`);
      }
      stack.push({ id: childId, weight: weight * childBeta });
    }
  }
  return { aggregatedIntercept: intercept, leafWeights };
}

export function evaluateBetaPaths(summary: BetaPathSummary,
                                  leafValues: Map<string, number>): number {
  let total = summary.aggregatedIntercept;
  for (const [leaf, weight] of summary.leafWeights) {
    const value = leafValues.get(leaf);
    if (value === undefined) throw new Error(`no value for leaf ${leaf}`);
    total += weight * value;
  }
  return total;
}

export function isAllLinear(doc: TreeDoc): boolean {
  return Object.values(doc.nodes).every(
    (node) => node.children.length === 0 || isLinear(node.synthesis));
}
