/**
 * Event capture and delivery. Every tool funnels its events through one
 * recorder, which assigns ids and session-relative timestamps, batches by
 * size or age, and ships batches with a per-session client_sequence. A batch
 * keeps its sequence number across retries and batches are sent strictly one
 * at a time, so retries can never reorder the stream; the engine deduplicates
 * on (session_id, client_sequence).
 */

import {
  EventKind,
  IngestAck,
  IngestBatch,
  ToolEventEnvelope,
  validateEnvelope,
} from "./contract.js";

export type FetchLike = (url: string, init: RequestInit) => Promise<Response>;

export interface RecorderOptions {
  baseUrl: string;
  sessionId: string;
  userId: string;
  /** ms since session start */
  clock: () => number;
  fetchFn?: FetchLike;
  batchSize?: number;
  flushIntervalMs?: number;
  /** buffered-event ceiling before onOverflow fires */
  maxBuffered?: number;
  retryBaseMs?: number;
  onOverflow?: (dropped: number) => void;
  onError?: (message: string) => void;
}

export class EventRecorder {
  private readonly opts: Required<Pick<RecorderOptions, "batchSize" | "flushIntervalMs" | "maxBuffered" | "retryBaseMs">> & RecorderOptions;
  private buffer: ToolEventEnvelope[] = [];
  private queue: IngestBatch[] = [];
  private sequence = 0;
  private eventCounter = 0;
  private sending = false;
  private flushTimer: ReturnType<typeof setTimeout> | null = null;
  private lastTimestamp = 0;

  /** events acknowledged by the engine */
  acknowledged = 0;
  /** events rejected by the engine (schema violations) */
  rejected = 0;

  constructor(options: RecorderOptions) {
    this.opts = {
      batchSize: 50,
      flushIntervalMs: 2000,
      maxBuffered: 5000,
      retryBaseMs: 500,
      ...options,
    };
  }

  /** Record one interaction; returns the envelope that will be shipped. */
  record(kind: EventKind, pageUrl: string, payload: Record<string, unknown> = {}): ToolEventEnvelope {
    this.eventCounter += 1;
    // the engine rejects time going backwards, so clamp to monotone
    const now = Math.max(Math.round(this.opts.clock()), this.lastTimestamp);
    this.lastTimestamp = now;
    const envelope: ToolEventEnvelope = {
      event_id: `${this.opts.sessionId}-c${this.eventCounter}`,
      session_id: this.opts.sessionId,
      user_id: this.opts.userId,
      timestamp: now,
      event_kind: kind,
      page_url: pageUrl,
      payload,
    };
    const problems = validateEnvelope(envelope);
    if (problems.length > 0) {
      this.opts.onError?.(`dropping invalid event: ${problems.join("; ")}`);
      return envelope;
    }
    if (this.buffered() >= this.opts.maxBuffered) {
      this.opts.onOverflow?.(1);
      return envelope;
    }
    this.buffer.push(envelope);
    if (this.buffer.length >= this.opts.batchSize) {
      this.sealBatch();
      void this.pump();
    } else {
      this.armFlushTimer();
    }
    return envelope;
  }

  /** Events recorded but not yet acknowledged. */
  buffered(): number {
    return (
      this.buffer.length + this.queue.reduce((n, batch) => n + batch.events.length, 0)
    );
  }

  /** Seal and ship everything; resolves when the engine has acknowledged it. */
  async flush(): Promise<void> {
    this.sealBatch();
    await this.pump();
    while (this.queue.length > 0 || this.buffer.length > 0) {
      this.sealBatch();
      await this.pump();
      if (this.queue.length > 0) {
        await sleep(10); // another pump owns the queue; let it finish
      }
    }
  }

  private armFlushTimer(): void {
    if (this.flushTimer !== null) return;
    this.flushTimer = setTimeout(() => {
      this.flushTimer = null;
      this.sealBatch();
      void this.pump();
    }, this.opts.flushIntervalMs);
  }

  private sealBatch(): void {
    if (this.flushTimer !== null) {
      clearTimeout(this.flushTimer);
      this.flushTimer = null;
    }
    if (this.buffer.length === 0) return;
    this.sequence += 1;
    this.queue.push({
      session_id: this.opts.sessionId,
      client_sequence: this.sequence,
      events: this.buffer,
    });
    this.buffer = [];
  }

  private async pump(): Promise<void> {
    if (this.sending) return;
    this.sending = true;
    try {
      while (this.queue.length > 0) {
        const batch = this.queue[0];
        const outcome = await this.send(batch);
        if (outcome === "retry") {
          continue; // same batch, same sequence
        }
        this.queue.shift();
      }
    } finally {
      this.sending = false;
    }
  }

  private async send(batch: IngestBatch): Promise<"done" | "retry"> {
    const fetchFn = this.opts.fetchFn ?? fetch;
    let response: Response;
    try {
      response = await fetchFn(`${this.opts.baseUrl}/api/events`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(batch),
      });
    } catch {
      await sleep(this.opts.retryBaseMs);
      return "retry";
    }
    if (response.status === 429) {
      const ack = (await response.json()) as IngestAck;
      await sleep(ack.retry_after_ms ?? this.opts.retryBaseMs);
      return "retry";
    }
    if (!response.ok) {
      this.opts.onError?.(`ingest failed with status ${response.status}`);
      await sleep(this.opts.retryBaseMs);
      return "retry";
    }
    const ack = (await response.json()) as IngestAck;
    if (ack.duplicate) {
      // a retried batch the engine already has; everything in it is safe
      this.acknowledged += batch.events.length;
      return "done";
    }
    this.acknowledged += ack.accepted_count;
    this.rejected += ack.rejected.length;
    for (const rej of ack.rejected) {
      this.opts.onError?.(`event ${rej.event_id} rejected: ${rej.reason}`);
    }
    return "done";
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
