import { describe, expect, it } from 'vitest';

import {
  escapeHtml, renderDeltaBanner, renderDeltaList, renderDetailPanel,
  renderErrorToast, renderNoChangeNotice, renderProgress, renderRow,
  renderRows, renderSweepChart,
} from '../src/render.js';
import { TreeViewModel } from '../src/viewmodel.js';
import { DEPTH1_TREE, loadFixture } from './helpers.js';

describe('row rendering', () => {
  it('shows badge, id, statement, and status class', () => {
    const model = new TreeViewModel(loadFixture(DEPTH1_TREE));
    const html = renderRow(model.rows()[0]!);
    expect(html).toContain('data-id="P0"');
    expect(html).toContain('status-purple');
    expect(html).toContain('0.87');
  });

  it('flashes changed rows with old and new values', () => {
    const model = new TreeViewModel(loadFixture(DEPTH1_TREE));
    model.applyServerUpdate(model.doc, [
      { node_id: 'P0', old_p_true: 0.87, new_p_true: 0.9 }]);
    const html = renderRow(model.rows()[0]!);
    expect(html).toContain('changed');
    expect(html).toContain('0.87 → 0.87'); // old -> current badge
  });

  it('escapes statements', () => {
    expect(escapeHtml('<b>&"')).toBe('&lt;b&gt;&amp;&quot;');
    const model = new TreeViewModel(loadFixture(DEPTH1_TREE));
    const row = { ...model.rows()[0]!, statement: '<script>x</script>' };
    expect(renderRow(row)).not.toContain('<script>');
  });

  it('windows rows with a translated offset', () => {
    const model = new TreeViewModel(loadFixture(DEPTH1_TREE));
    const html = renderRows(model.rows().slice(1), 1, 5, 28);
    expect(html).toContain('height:140px');
    expect(html).toContain('translateY(28px)');
  });
});

describe('banners and notices', () => {
  it('delta banner pins the root movement', () => {
    const html = renderDeltaBanner(0.58, 0.48);
    expect(html).toContain('0.58 → <strong>0.48</strong>');
  });

  it('no-op edits produce a no-change notice', () => {
    expect(renderDeltaList([])).toBe(renderNoChangeNotice());
  });

  it('delta list spells out each changed node', () => {
    const html = renderDeltaList([
      { node_id: 'P2', old_p_true: 0.9, new_p_true: 1.0 },
      { node_id: 'P0', old_p_true: 0.87, new_p_true: 0.9 },
    ]);
    expect(html).toContain('P2: 0.90 → 1.00');
    expect(html).toContain('P0: 0.87 → 0.90');
  });

  it('error toast escapes the message', () => {
    expect(renderErrorToast('<bad>')).toContain('&lt;bad&gt;');
  });

  it('progress view highlights the reached stage', () => {
    const html = renderProgress('grounding');
    expect(html).toContain('<span class="stage active">grounding</span>');
    expect(html).toContain('<span class="stage">synthesizing</span>');
  });
});

describe('detail panel', () => {
  it('shows report and key factor', () => {
    const doc = loadFixture(DEPTH1_TREE);
    const html = renderDetailPanel('P2', doc.nodes['P2']!);
    expect(html).toContain('P2');
    expect(html).toContain('Key factor');
    expect(html).toContain('Scripted grounding report');
  });
});

describe('sweep chart', () => {
  it('draws a polyline for a line and a circle for one point', () => {
    const line = renderSweepChart({
      leafId: 'P2', slope: 0.3, source: 'closed-form',
      points: [{ leafValue: 0, rootValue: 0.6 },
               { leafValue: 1, rootValue: 0.9 }],
    });
    expect(line).toContain('<polyline');
    expect(line).toContain('slope 0.300000');
    const dot = renderSweepChart({
      leafId: 'P2', slope: 0.3, source: 'closed-form',
      points: [{ leafValue: 0.5, rootValue: 0.75 }],
    });
    expect(dot).toContain('<circle');
  });
});
