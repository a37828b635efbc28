// UI round-trip acceptance: the edit-display-discard-sweep loop against a
// server implementing the documented /v1 contract on engine-exported
// fixture documents.

import { describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import { computeBetaPaths } from '../src/betapath.js';
import { renderDeltaBanner, renderRows } from '../src/render.js';
import { ScenarioState } from '../src/session.js';
import { closedFormSweep, gridOf, leafSweep } from '../src/sweep.js';
import { TreeViewModel } from '../src/viewmodel.js';
import { FakeServer } from './fakeServer.js';
import { DEPTH1_TREE, FULL_TREE, loadFixture } from './helpers.js';

function setup(fixture: string) {
  const server = new FakeServer();
  server.addRun('run-1', loadFixture(fixture));
  return { server, api: new ApiClient(server) };
}

describe('acceptance 12: UI round-trip', () => {
  it('editing a leaf displays the server delta within one request cycle',
     async () => {
    const { server, api } = setup(DEPTH1_TREE);
    const session = new ScenarioState(api, 'run-1');
    const doc = await session.start();
    const model = new TreeViewModel(doc);

    expect(model.stageEdit({ nodeId: 'P2', pTrue: 1.0 })).toEqual([]);
    const before = server.requestCount;
    const { doc: updated, delta } = await session.submit('P2', { p_true: 1.0 });
    const requests = server.requestCount - before;
    // One request cycle: the PATCH plus the authoritative document fetch.
    expect(requests).toBe(2);

    model.applyServerUpdate(updated, delta);
    const rootDelta = model.rootDelta()!;
    expect(rootDelta.oldValue).toBeCloseTo(0.87195, 10);
    expect(rootDelta.newValue).toBeCloseTo(0.90075, 10);
    const banner = renderDeltaBanner(rootDelta.oldValue, rootDelta.newValue);
    expect(banner).toContain('0.87 → <strong>0.90</strong>');
    // Only the edited leaf and its ancestors flash; siblings stay quiet.
    const rows = model.rows();
    expect(rows.find((r) => r.id === 'P2')!.changed).toBe(true);
    expect(rows.find((r) => r.id === 'P0')!.changed).toBe(true);
    expect(rows.find((r) => r.id === 'P1')!.changed).toBe(false);
    expect(rows.find((r) => r.id === 'P3')!.changed).toBe(false);
  });

  it('invalid values never reach the server', async () => {
    const { server, api } = setup(DEPTH1_TREE);
    const session = new ScenarioState(api, 'run-1');
    const doc = await session.start();
    const model = new TreeViewModel(doc);
    const before = server.requestCount;
    const errors = model.stageEdit({ nodeId: 'P2', pTrue: 1.2 });
    expect(errors).toHaveLength(1);
    expect(server.requestCount).toBe(before);
  });

  it('discarding the session restores the baseline rendering', async () => {
    const { api } = setup(FULL_TREE);
    const session = new ScenarioState(api, 'run-1');
    const baselineDoc = await session.start();
    const baselineModel = new TreeViewModel(baselineDoc);
    baselineModel.expandAll();
    const baselineHtml = renderRows(baselineModel.rows(), 0, 26);

    await session.submit('P2.1', { p_true: 0.0 });
    await session.submit('P1.1.1', { p_true: 0.1 });
    const restoredDoc = await session.discard();
    const restoredModel = new TreeViewModel(restoredDoc);
    restoredModel.expandAll();
    expect(renderRows(restoredModel.rows(), 0, 26)).toBe(baselineHtml);
  });

  it('linear sweep slope matches the server-reported beta path to 1e-9',
     async () => {
    const { api } = setup(FULL_TREE);
    const session = new ScenarioState(api, 'run-1');
    const doc = await session.start();

    // Beta path from the served document (the server's own record set).
    const serverPaths = computeBetaPaths(await api.getTree(
      session.baseTreeRef!));
    const reported = serverPaths.leafWeights.get('P3.2')!;

    const sweep = await leafSweep(session, doc, 'P3.2', gridOf(11));
    expect(sweep.source).toBe('closed-form');
    expect(Math.abs(sweep.slope! - reported)).toBeLessThanOrEqual(1e-9);

    // And the slope observed through per-point server resynthesis agrees.
    const closed = closedFormSweep(doc, 'P3.2', [0.0, 1.0]);
    const low = await session.submit('P3.2', { p_true: 0.0 });
    const high = await session.submit('P3.2', { p_true: 1.0 });
    const observed = (high.doc.nodes['P0']!.p_true as number)
      - (low.doc.nodes['P0']!.p_true as number);
    expect(Math.abs(observed - reported)).toBeLessThanOrEqual(1e-9);
    expect(Math.abs((closed.points[1]!.rootValue
      - closed.points[0]!.rootValue) - reported)).toBeLessThanOrEqual(1e-9);
  });
});
