// Browser bootstrap: wires the pure modules to the DOM. Kept as thin as
// possible; all logic lives in the testable modules.

import { ApiClient, FetchTransport, HttpError } from './api.js';
import { ScenarioState } from './session.js';
import { TreeViewModel } from './viewmodel.js';
import { leafSweep, gridOf } from './sweep.js';
import {
  renderDeltaBanner, renderDeltaList, renderDetailPanel, renderErrorToast,
  renderProgress, renderRows, renderSweepChart,
} from './render.js';

const ROW_HEIGHT = 28;

function el(id: string): HTMLElement {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found;
}

async function loadRun(api: ApiClient, runId: string): Promise<void> {
  const treeEl = el('tree');
  const sideEl = el('side');
  const bannerEl = el('banner');
  if (!runId) {
    bannerEl.innerHTML = renderErrorToast('enter a run id');
    return;
  }
  let record;
  try {
    record = await api.getRun(runId);
  } catch (error) {
    const message = error instanceof HttpError
      ? `run lookup failed: ${error.message}` : String(error);
    bannerEl.innerHTML = renderErrorToast(message);
    return;
  }
  if (record.status !== 'done' || !record.tree_ref) {
    bannerEl.innerHTML = renderProgress(record.status);
    return;
  }

  const session = new ScenarioState(api, runId);
  const doc = await session.start();
  const model = new TreeViewModel(doc);

  const redraw = () => {
    const scroller = el('tree-scroll');
    const view = model.visibleRows(scroller.scrollTop,
                                   scroller.clientHeight || 480, ROW_HEIGHT);
    treeEl.innerHTML = renderRows(view.rows, view.offset, view.total,
                                  ROW_HEIGHT);
    const detail = model.detail();
    sideEl.innerHTML = detail
      ? renderDetailPanel(detail.id, detail.node) : '';
    const rootDelta = model.rootDelta();
    bannerEl.innerHTML = rootDelta
      ? renderDeltaBanner(rootDelta.oldValue, rootDelta.newValue)
      : '';
  };

  el('tree-scroll').addEventListener('scroll', redraw);
  treeEl.addEventListener('click', (event) => {
    const row = (event.target as HTMLElement).closest('.row');
    if (!row) return;
    const id = row.getAttribute('data-id')!;
    model.toggle(id);
    model.select(id);
    redraw();
  });

  el('apply').addEventListener('click', async () => {
    const nodeId = (el('edit-node') as HTMLInputElement).value.trim();
    const raw = (el('edit-value') as HTMLInputElement).value.trim();
    const errors = model.stageEdit({ nodeId, pTrue: Number(raw) });
    if (errors.length > 0) {
      bannerEl.innerHTML = renderErrorToast(errors.join('; '));
      return;
    }
    try {
      const { doc: updated, delta } = await session.submit(
        nodeId, { p_true: Number(raw) });
      model.applyServerUpdate(updated, delta);
      el('delta').innerHTML = renderDeltaList(delta);
      redraw();
    } catch (error) {
      bannerEl.innerHTML = renderErrorToast(String(error));
    }
  });

  el('discard').addEventListener('click', async () => {
    const baseline = await session.discard();
    model.applyServerUpdate(baseline, []);
    model.clearHighlights();
    await session.start();
    el('delta').innerHTML = '';
    redraw();
  });

  el('commit').addEventListener('click', async () => {
    const snapshot = await session.commit();
    bannerEl.innerHTML = `<div class="notice">committed `
      + `${snapshot.name} (${snapshot.tree_ref.slice(0, 12)}…)</div>`;
  });

  el('sweep').addEventListener('click', async () => {
    const leafId = (el('edit-node') as HTMLInputElement).value.trim();
    try {
      const result = await leafSweep(session, model.doc, leafId, gridOf(21));
      el('chart').innerHTML = renderSweepChart(result);
    } catch (error) {
      bannerEl.innerHTML = renderErrorToast(String(error));
    }
  });

  redraw();
}

export function boot(baseUrl = ''): void {
  const api = new ApiClient(new FetchTransport(baseUrl));
  el('load').addEventListener('click', () => {
    void loadRun(api, (el('run-id') as HTMLInputElement).value.trim());
  });
}

if (typeof document !== 'undefined' && document.getElementById('load')) {
  boot();
}
