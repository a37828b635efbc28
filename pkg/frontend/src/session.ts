// Scenario-session state: one active session against a finished run.
// Patches are queued client-side so concurrent submissions serialize in
// order; the view only updates from server responses (no optimistic UI),
// and discarding restores the exact baseline document.

import type { ApiClient } from './api.js';
import type { DeltaEntry, PatchBody, TreeDoc } from './types.js';

export interface EditLogEntry {
  nodeId: string;
  patch: PatchBody;
  delta: DeltaEntry[];
}

export class ScenarioState {
  readonly runId: string;
  sessionId: string | null = null;
  baseTreeRef: string | null = null;
  currentTreeRef: string | null = null;
  editLog: EditLogEntry[] = [];
  latestDelta: DeltaEntry[] = [];
  private queue: Promise<unknown> = Promise.resolve();

  constructor(private api: ApiClient, runId: string) {
    this.runId = runId;
  }

  async start(): Promise<TreeDoc> {
    const session = await this.api.createSession(this.runId);
    this.sessionId = session.session_id;
    this.baseTreeRef = session.base_tree_ref;
    this.currentTreeRef = session.base_tree_ref;
    this.editLog = [];
    this.latestDelta = [];
    return this.api.getTree(session.base_tree_ref);
  }

  /** Submit one edit; resolves with the server's authoritative document and
   * delta for this edit. Calls made while another edit is in flight are
   * queued and applied in submission order. */
  submit(nodeId: string,
         patch: PatchBody): Promise<{ doc: TreeDoc; delta: DeltaEntry[] }> {
    const task = this.queue.then(async () => {
      if (this.sessionId === null) throw new Error('session not started');
      const response = await this.api.patchNode(this.sessionId, nodeId, patch);
      this.currentTreeRef = response.tree_ref;
      this.latestDelta = response.delta;
      this.editLog.push({ nodeId, patch, delta: response.delta });
      const doc = await this.api.getTree(response.tree_ref);
      return { doc, delta: response.delta };
    });
    // Keep the queue alive after failures; the caller still sees them.
    this.queue = task.catch(() => undefined);
    return task;
  }

  /** Drop the session state and return the untouched baseline document. */
  async discard(): Promise<TreeDoc> {
    if (this.baseTreeRef === null) throw new Error('session not started');
    const doc = await this.api.getTree(this.baseTreeRef);
    this.sessionId = null;
    this.currentTreeRef = this.baseTreeRef;
    this.editLog = [];
    this.latestDelta = [];
    return doc;
  }

  async commit(name?: string): Promise<{ name: string; tree_ref: string }> {
    if (this.sessionId === null) throw new Error('session not started');
    return this.api.commitSession(this.sessionId, name);
  }
}
