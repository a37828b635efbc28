// Thin client for the /v1 API. The transport is injectable so tests can
// swap in an in-memory server; the view layer performs no probability
// arithmetic of its own (the linear sweep closed form is the one
// documented exception, and it is spot-checked against the server).

import type {
  PatchBody, PatchResponse, RunRecord, SessionStart, TreeDoc,
} from './types.js';
import { assertTreeDoc } from './types.js';

export interface Transport {
  request(method: string, path: string, body?: unknown): Promise<unknown>;
}

export class HttpError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class FetchTransport implements Transport {
  constructor(private baseUrl: string,
              private fetchFn: typeof fetch = fetch) {}

  async request(method: string, path: string, body?: unknown): Promise<unknown> {
    const response = await this.fetchFn(this.baseUrl + path, {
      method,
      headers: body !== undefined ? { 'content-type': 'application/json' } : {},
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    const payload = await response.json().catch(() => ({}));
    if (!response.ok) {
      const detail = (payload as { error?: string }).error ?? response.statusText;
      throw new HttpError(response.status, detail);
    }
    return payload;
  }
}

export class ApiClient {
  constructor(private transport: Transport) {}

  async getRun(runId: string): Promise<RunRecord> {
    return await this.transport.request('GET', `/v1/runs/${runId}`) as RunRecord;
  }

  async getTree(ref: string): Promise<TreeDoc> {
    return assertTreeDoc(await this.transport.request('GET', `/v1/trees/${ref}`));
  }

  async createSession(runId: string): Promise<SessionStart> {
    return await this.transport.request(
      'POST', `/v1/runs/${runId}/sessions`) as SessionStart;
  }

  async patchNode(sessionId: string, nodeId: string,
                  patch: PatchBody): Promise<PatchResponse> {
    return await this.transport.request(
      'PATCH', `/v1/sessions/${sessionId}/nodes/${nodeId}`,
      patch) as PatchResponse;
  }

  async commitSession(sessionId: string,
                      name?: string): Promise<{ name: string; tree_ref: string }> {
    return await this.transport.request(
      'POST', `/v1/sessions/${sessionId}/commit`,
      { name }) as { name: string; tree_ref: string };
  }
}
