// Leaf sweep: how the root responds as one leaf's value moves over a
// grid. All-linear trees use the beta-path closed form (a straight line
// of slope beta'_leaf) and must agree with a server resynthesis
// spot-check to 1e-9; other trees fall back to ephemeral session edits,
// one API round trip per grid point.

import type { TreeDoc } from './types.js';
import { computeBetaPaths, isAllLinear } from './betapath.js';
import type { ScenarioState } from './session.js';

export interface SweepPoint {
  leafValue: number;
  rootValue: number;
}

export interface SweepResult {
  leafId: string;
  slope: number | null;   // beta path of the leaf; null for non-linear trees
  points: SweepPoint[];
  source: 'closed-form' | 'server';
}

export function gridOf(count: number, lo = 0, hi = 1): number[] {
  if (count < 1) throw new Error('grid needs at least one point');
  if (count === 1) return [lo];
  const step = (hi - lo) / (count - 1);
  return Array.from({ length: count }, (_, i) => lo + i * step);
}

export function closedFormSweep(doc: TreeDoc, leafId: string,
                                grid: number[]): SweepResult {
  const summary = computeBetaPaths(doc);
  const slope = summary.leafWeights.get(leafId);
  if (slope === undefined) throw new Error(`${leafId} is not a leaf`);
  const baseValue = doc.nodes[leafId]?.p_true;
  const rootValue = doc.nodes[doc.root]?.p_true;
  if (baseValue === null || baseValue === undefined
      || rootValue === null || rootValue === undefined) {
    throw new Error('tree must be fully synthesized before sweeping');
  }
  const points = grid.map((leafValue) => ({
    leafValue,
    rootValue: rootValue + slope * (leafValue - baseValue),
  }));
  return { leafId, slope, points, source: 'closed-form' };
}

async function serverRoot(session: ScenarioState, leafId: string,
                          value: number): Promise<number> {
  const { doc } = await session.submit(leafId, { p_true: value });
  const root = doc.nodes[doc.root]?.p_true;
  if (root === null || root === undefined) {
    throw new Error('server returned an unsynthesized root');
  }
  return root;
}

/** Sweep through the server: one ephemeral edit per grid point, restoring
 * the leaf's original value afterwards. */
export async function serverSweep(session: ScenarioState, doc: TreeDoc,
                                  leafId: string,
                                  grid: number[]): Promise<SweepResult> {
  const original = doc.nodes[leafId]?.p_true;
  if (original === null || original === undefined) {
    throw new Error(`${leafId} has no value to restore`);
  }
  const points: SweepPoint[] = [];
  for (const leafValue of grid) {
    points.push({ leafValue, rootValue: await serverRoot(session, leafId, leafValue) });
  }
  await session.submit(leafId, { p_true: original });
  return { leafId, slope: null, points, source: 'server' };
}

/** Closed form when the tree is all-linear (with a server spot-check at
 * one interior grid point), server round trips otherwise. */
export async function leafSweep(session: ScenarioState, doc: TreeDoc,
                                leafId: string, grid: number[],
                                tolerance = 1e-9): Promise<SweepResult> {
  if (!isAllLinear(doc)) {
    return serverSweep(session, doc, leafId, grid);
  }
  const result = closedFormSweep(doc, leafId, grid);
  const probe = result.points[Math.floor(result.points.length / 2)]!;
  const serverValue = await serverRoot(session, leafId, probe.leafValue);
  const original = doc.nodes[leafId]!.p_true as number;
  await session.submit(leafId, { p_true: original });
  if (Math.abs(serverValue - probe.rootValue) > tolerance) {
    throw new Error(
      `closed-form sweep diverges from the server: `
      + `${probe.rootValue} vs ${serverValue}`);
  }
  return result;
}
