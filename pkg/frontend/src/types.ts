// Wire types mirroring the /v1 API and the canonical tree document.

export type NodeStatus = 'pending' | 'expanded' | 'grounded' | 'synthesized';

export interface BetaMap {
  beta_0: number;
  [childId: string]: number;
}

export interface LinearSynthesis {
  rule: 'linear' | 'noisy_or';
  beta: BetaMap;
  key_factor: string;
}

export interface LogicSynthesis {
  rule: 'simple_logic';
  formula: string;
  assumption: { detail: string; probability: number };
  key_factor: string;
}

export interface PlainSynthesis {
  rule: 'vanilla' | 'average';
  key_factor: string;
}

export type Synthesis = LinearSynthesis | LogicSynthesis | PlainSynthesis;

export interface NodeDoc {
  statement: string;
  p_true: number | null;
  report: string | null;
  key_factor: string | null;
  children: string[];
  causality: string | null;
  status: NodeStatus;
  synthesis: Synthesis | null;
}

export interface TreeDoc {
  root: string;
  nodes: Record<string, NodeDoc>;
  created_at: string;
  config_snapshot: Record<string, unknown>;
}

export interface RunRecord {
  run_id: string;
  query: string;
  status: 'queued' | 'analyzing' | 'grounding' | 'synthesizing' | 'done' | 'failed';
  tree_ref: string | null;
  manifest: Record<string, unknown> | null;
  error: string | null;
  sessions: string[];
  snapshots: Record<string, string>;
}

export interface DeltaEntry {
  node_id: string;
  old_p_true: number | null;
  new_p_true: number | null;
}

export interface PatchBody {
  p_true?: number;
  statement?: string;
  add_children?: Record<string, { statement: string; p_true: number }>;
  remove?: boolean;
}

export interface PatchResponse {
  tree_ref: string;
  delta: DeltaEntry[];
}

export interface SessionStart {
  session_id: string;
  base_tree_ref: string;
}

export function isLinear(s: Synthesis | null): s is LinearSynthesis {
  return s !== null && s.rule === 'linear';
}

export function isLogic(s: Synthesis | null): s is LogicSynthesis {
  return s !== null && s.rule === 'simple_logic';
}

export function assertTreeDoc(value: unknown): TreeDoc {
  const doc = value as TreeDoc;
  if (!doc || typeof doc !== 'object' || typeof doc.root !== 'string'
      || !doc.nodes || typeof doc.nodes !== 'object') {
    throw new Error('malformed tree document');
  }
  if (!(doc.root in doc.nodes)) {
    throw new Error(`tree document root ${doc.root} missing from nodes`);
  }
  return doc;
}
