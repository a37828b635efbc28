// View model over a tree document: a flattened, collapse-aware row list
// with a virtualization window, a selection, and a locally staged edit
// buffer. Every rendered number comes from the latest document the
// service returned; edits live in the buffer until submitted.

import type { DeltaEntry, NodeDoc, TreeDoc } from './types.js';
import { isLinear, isLogic } from './types.js';

export type StatusColor = 'gray' | 'blue' | 'green' | 'purple';

const STATUS_COLORS: Record<string, StatusColor> = {
  pending: 'gray',
  expanded: 'blue',
  grounded: 'green',
  synthesized: 'purple',
};

export interface TreeRow {
  id: string;
  statement: string;
  depth: number;
  pTrue: number | null;
  badge: string;          // rendered p_true badge, e.g. "0.87"
  statusColor: StatusColor;
  hasChildren: boolean;
  expanded: boolean;
  edgeLabel: string;      // annotation on the edge from the parent
  changed: boolean;       // part of the latest delta (flash highlight)
  oldPTrue: number | null; // previous value when changed
}

export interface PendingEdit {
  nodeId: string;
  pTrue?: number;
  statement?: string;
}

export function nodeSortKey(id: string): number[] {
  return id.slice(1).split('.').map((part) => Number(part));
}

export function compareIds(a: string, b: string): number {
  const ka = nodeSortKey(a);
  const kb = nodeSortKey(b);
  for (let i = 0; i < Math.max(ka.length, kb.length); i += 1) {
    const da = ka[i] ?? -1;
    const db = kb[i] ?? -1;
    if (da !== db) return da - db;
  }
  return 0;
}

export function formatBadge(pTrue: number | null): string {
  return pTrue === null ? '--' : pTrue.toFixed(2);
}

function edgeLabel(parent: NodeDoc, childId: string): string {
  if (isLinear(parent.synthesis)) {
    const beta = parent.synthesis.beta[childId];
    return beta === undefined ? '' : `β=${beta}`;
  }
  if (isLogic(parent.synthesis)) {
    return parent.synthesis.formula;
  }
  return '';
}

export class TreeViewModel {
  doc: TreeDoc;
  selection: string | null = null;
  pendingEdit: PendingEdit | null = null;
  private expandedSet: Set<string>;
  private changedNodes = new Map<string, number | null>();

  constructor(doc: TreeDoc, collapseBelowDepth = 2) {
    this.doc = doc;
    this.expandedSet = new Set();
    this.collapseByDepth(collapseBelowDepth);
  }

  // -- structure ----------------------------------------------------------

  private depths(): Map<string, number> {
    const depths = new Map<string, number>([[this.doc.root, 0]]);
    const stack = [this.doc.root];
    while (stack.length > 0) {
      const id = stack.pop()!;
      for (const child of this.doc.nodes[id]?.children ?? []) {
        depths.set(child, (depths.get(id) ?? 0) + 1);
        stack.push(child);
      }
    }
    return depths;
  }

  collapseByDepth(maxDepth: number): void {
    this.expandedSet = new Set();
    for (const [id, depth] of this.depths()) {
      const node = this.doc.nodes[id];
      if (node && node.children.length > 0 && depth < maxDepth) {
        this.expandedSet.add(id);
      }
    }
  }

  isExpanded(id: string): boolean {
    return this.expandedSet.has(id);
  }

  toggle(id: string): void {
    if (this.expandedSet.has(id)) this.expandedSet.delete(id);
    else if ((this.doc.nodes[id]?.children.length ?? 0) > 0) {
      this.expandedSet.add(id);
    }
  }

  expandAll(): void {
    for (const [id, node] of Object.entries(this.doc.nodes)) {
      if (node.children.length > 0) this.expandedSet.add(id);
    }
  }

  // -- document refresh ----------------------------------------------------

  /** Swap in the latest server document and record which nodes changed so
   * the renderer can flash them (old -> new). */
  applyServerUpdate(doc: TreeDoc, delta: DeltaEntry[]): void {
    this.doc = doc;
    this.changedNodes = new Map(
      delta.map((entry) => [entry.node_id, entry.old_p_true]));
    this.pendingEdit = null;
  }

  clearHighlights(): void {
    this.changedNodes.clear();
  }

  rootDelta(): { oldValue: number | null; newValue: number | null } | null {
    if (!this.changedNodes.has(this.doc.root)) return null;
    return {
      oldValue: this.changedNodes.get(this.doc.root) ?? null,
      newValue: this.doc.nodes[this.doc.root]?.p_true ?? null,
    };
  }

  // -- rows ----------------------------------------------------------------

  rows(): TreeRow[] {
    const out: TreeRow[] = [];
    const walk = (id: string, depth: number, parent: NodeDoc | null) => {
      const node = this.doc.nodes[id];
      if (!node) return;
      out.push({
        id,
        statement: node.statement,
        depth,
        pTrue: node.p_true,
        badge: formatBadge(node.p_true),
        statusColor: STATUS_COLORS[node.status] ?? 'gray',
        hasChildren: node.children.length > 0,
        expanded: this.expandedSet.has(id),
        edgeLabel: parent ? edgeLabel(parent, id) : '',
        changed: this.changedNodes.has(id),
        oldPTrue: this.changedNodes.get(id) ?? null,
      });
      if (this.expandedSet.has(id)) {
        for (const child of [...node.children].sort(compareIds)) {
          walk(child, depth + 1, node);
        }
      }
    };
    walk(this.doc.root, 0, null);
    return out;
  }

  /** Virtualization window: only the rows intersecting the viewport plus a
   * small buffer are materialized (trees can reach thousands of nodes). */
  visibleRows(scrollTop: number, viewportHeight: number, rowHeight = 28,
              buffer = 5): { offset: number; total: number; rows: TreeRow[] } {
    const all = this.rows();
    const first = Math.max(0, Math.floor(scrollTop / rowHeight) - buffer);
    const count = Math.ceil(viewportHeight / rowHeight) + 2 * buffer;
    return {
      offset: first,
      total: all.length,
      rows: all.slice(first, first + count),
    };
  }

  // -- selection and staged edits -------------------------------------------

  select(id: string | null): void {
    if (id !== null && !(id in this.doc.nodes)) {
      throw new Error(`no node ${id}`);
    }
    this.selection = id;
  }

  detail(): { id: string; node: NodeDoc } | null {
    if (this.selection === null) return null;
    const node = this.doc.nodes[this.selection];
    return node ? { id: this.selection, node } : null;
  }

  /** Stage an edit locally; returns validation errors instead of applying
   * anything. The document only changes when the server replies. */
  stageEdit(edit: PendingEdit): string[] {
    const errors: string[] = [];
    if (!(edit.nodeId in this.doc.nodes)) {
      errors.push(`unknown node ${edit.nodeId}`);
    }
    if (edit.pTrue !== undefined && (Number.isNaN(edit.pTrue)
        || edit.pTrue < 0 || edit.pTrue > 1)) {
      errors.push(`p_true must be within [0, 1], got ${edit.pTrue}`);
    }
    if (edit.statement !== undefined && edit.statement.trim() === '') {
      errors.push('statement must be non-empty');
    }
    if (edit.pTrue === undefined && edit.statement === undefined) {
      errors.push('edit changes nothing');
    }
    if (errors.length === 0) this.pendingEdit = edit;
    return errors;
  }

  discardEdit(): void {
    this.pendingEdit = null;
  }
}
