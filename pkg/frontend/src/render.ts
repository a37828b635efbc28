// Pure renderers: view state in, HTML strings out. No DOM access here, so
// the whole presentation layer is testable without a browser.

import type { TreeRow } from './viewmodel.js';
import type { NodeDoc } from './types.js';
import type { DeltaEntry } from './types.js';
import type { SweepResult } from './sweep.js';

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

export function renderRow(row: TreeRow): string {
  const caret = row.hasChildren ? (row.expanded ? '▾' : '▸') : '•';
  const flash = row.changed
    ? ` <span class="flash">${fmt(row.oldPTrue)} → ${row.badge}</span>`
    : '';
  const edge = row.edgeLabel
    ? ` <span class="edge">${escapeHtml(row.edgeLabel)}</span>` : '';
  return `<div class="row status-${row.statusColor}${row.changed ? ' changed' : ''}"`
    + ` data-id="${row.id}" style="padding-left:${row.depth * 18}px">`
    + `<span class="caret">${caret}</span>`
    + `<span class="badge">${row.badge}</span>`
    + `<span class="id">${row.id}</span>`
    + `<span class="statement">${escapeHtml(row.statement)}</span>`
    + edge + flash
    + `</div>`;
}

export function renderRows(rows: TreeRow[], offset: number,
                           total: number, rowHeight = 28): string {
  const inner = rows.map(renderRow).join('');
  return `<div class="viewport" style="height:${total * rowHeight}px">`
    + `<div class="window" style="transform:translateY(${offset * rowHeight}px)">`
    + inner + `</div></div>`;
}

function fmt(value: number | null): string {
  return value === null ? '--' : value.toFixed(2);
}

export function renderDeltaBanner(oldValue: number | null,
                                  newValue: number | null): string {
  return `<div class="delta-banner">root ${fmt(oldValue)} → `
    + `<strong>${fmt(newValue)}</strong></div>`;
}

export function renderNoChangeNotice(): string {
  return `<div class="notice">no change</div>`;
}

export function renderErrorToast(message: string): string {
  return `<div class="toast error">${escapeHtml(message)}</div>`;
}

export function renderProgress(status: string): string {
  const stages = ['queued', 'analyzing', 'grounding', 'synthesizing', 'done'];
  const index = Math.max(stages.indexOf(status), 0);
  const bars = stages.map((stage, i) =>
    `<span class="stage${i <= index ? ' active' : ''}">${stage}</span>`);
  return `<div class="progress">${bars.join(' › ')}</div>`;
}

export function renderDetailPanel(id: string, node: NodeDoc): string {
  const lines = [
    `<h3>${id} <span class="badge">${fmt(node.p_true)}</span></h3>`,
    `<p class="statement">${escapeHtml(node.statement)}</p>`,
  ];
  if (node.key_factor) {
    lines.push(`<p class="key-factor"><strong>Key factor:</strong> `
      + `${escapeHtml(node.key_factor)}</p>`);
  }
  if (node.causality) {
    lines.push(`<p class="causality"><strong>Causality:</strong> `
      + `${escapeHtml(node.causality)}</p>`);
  }
  if (node.report) {
    lines.push(`<pre class="report">${escapeHtml(node.report)}</pre>`);
  }
  return `<div class="detail">${lines.join('')}</div>`;
}

export function renderDeltaList(delta: DeltaEntry[]): string {
  if (delta.length === 0) return renderNoChangeNotice();
  const items = delta.map((d) =>
    `<li>${d.node_id}: ${fmt(d.old_p_true)} → ${fmt(d.new_p_true)}</li>`);
  return `<ul class="delta-list">${items.join('')}</ul>`;
}

/** Root-response curve as an inline SVG polyline; a single point renders
 * as a dot. */
export function renderSweepChart(result: SweepResult, width = 320,
                                 height = 160): string {
  const pad = 24;
  const x = (v: number) => pad + v * (width - 2 * pad);
  const y = (v: number) => height - pad - v * (height - 2 * pad);
  const label = result.slope !== null
    ? `slope ${result.slope.toPrecision(6)}` : 'server-evaluated';
  let body: string;
  if (result.points.length === 1) {
    const p = result.points[0]!;
    body = `<circle cx="${x(p.leafValue)}" cy="${y(p.rootValue)}" r="3"/>`;
  } else {
    const pts = result.points
      .map((p) => `${x(p.leafValue)},${y(p.rootValue)}`).join(' ');
    body = `<polyline fill="none" points="${pts}"/>`;
  }
  return `<svg class="sweep" viewBox="0 0 ${width} ${height}">`
    + body
    + `<text x="${pad}" y="${pad - 8}">${result.leafId} (${label})</text>`
    + `</svg>`;
}
