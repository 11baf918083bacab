/** Thin wrappers over the engine's scaffold endpoints. */

import {
  ScaffoldInteractionBody,
  ScaffoldResponseWire,
} from "./contract.js";
import { FetchLike } from "./recorder.js";

export interface ScaffoldClientOptions {
  baseUrl: string;
  sessionId: string;
  userId: string;
  condition: "generalised" | "personalised";
  fetchFn?: FetchLike;
}

export class ScaffoldClient {
  constructor(private readonly opts: ScaffoldClientOptions) {}

  async request(elapsedMs: number): Promise<ScaffoldResponseWire | null> {
    const fetchFn = this.opts.fetchFn ?? fetch;
    const query = new URLSearchParams({
      user: this.opts.userId,
      session: this.opts.sessionId,
      condition: this.opts.condition,
      elapsed_ms: String(Math.round(elapsedMs)),
    });
    const response = await fetchFn(
      `${this.opts.baseUrl}/api/scaffold?${query.toString()}`,
      { method: "GET" },
    );
    if (!response.ok) {
      throw new Error(`scaffold request failed: ${response.status}`);
    }
    const body = (await response.json()) as { scaffold: ScaffoldResponseWire | null };
    return body.scaffold;
  }

  async interact(body: Omit<ScaffoldInteractionBody, "session_id" | "user_id">): Promise<void> {
    const fetchFn = this.opts.fetchFn ?? fetch;
    const response = await fetchFn(`${this.opts.baseUrl}/api/scaffold/interaction`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        session_id: this.opts.sessionId,
        user_id: this.opts.userId,
        ...body,
      }),
    });
    if (!response.ok) {
      throw new Error(`scaffold interaction failed: ${response.status}`);
    }
  }
}
