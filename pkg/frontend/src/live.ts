/** Live verdict feed over server-sent events.
 *
 * Events apply in arrival order. Pausing buffers them for later replay
 * so an operator can freeze the view mid-investigation without losing
 * anything; a dropped connection reconnects automatically with a
 * visible status.
 */

import type { VerdictEnvelope } from "./types.js";

export interface EventSourceLike {
  addEventListener(type: string, listener: (event: { data: string }) => void): void;
  close(): void;
  onerror: ((event: unknown) => void) | null;
  onopen: ((event: unknown) => void) | null;
}

export type EventSourceFactory = (url: string) => EventSourceLike;

export type FeedStatus = "connecting" | "live" | "paused" | "reconnecting" | "closed";

export interface LiveFeedOptions {
  factory?: EventSourceFactory;
  onEvent: (envelope: VerdictEnvelope) => void;
  onStatus?: (status: FeedStatus) => void;
  reconnectDelayMs?: number;
  schedule?: (fn: () => void, ms: number) => void;
}

const defaultFactory: EventSourceFactory = (url) =>
  new EventSource(url) as unknown as EventSourceLike;

export class LiveFeed {
  private readonly url: string;
  private readonly factory: EventSourceFactory;
  private readonly onEvent: (envelope: VerdictEnvelope) => void;
  private readonly onStatus: (status: FeedStatus) => void;
  private readonly reconnectDelayMs: number;
  private readonly schedule: (fn: () => void, ms: number) => void;

  private source: EventSourceLike | null = null;
  private closed = false;
  private _paused = false;
  readonly buffer: VerdictEnvelope[] = [];

  constructor(url: string, options: LiveFeedOptions) {
    this.url = url;
    this.factory = options.factory ?? defaultFactory;
    this.onEvent = options.onEvent;
    this.onStatus = options.onStatus ?? (() => {});
    this.reconnectDelayMs = options.reconnectDelayMs ?? 2000;
    this.schedule = options.schedule ?? ((fn, ms) => setTimeout(fn, ms));
  }

  get paused(): boolean {
    return this._paused;
  }

  connect(): void {
    if (this.closed) return;
    this.onStatus("connecting");
    this.source = this.factory(this.url);
    this.source.onopen = () => this.onStatus(this._paused ? "paused" : "live");
    this.source.addEventListener("verdict", (event) => {
      let envelope: VerdictEnvelope;
      try {
        envelope = JSON.parse(event.data) as VerdictEnvelope;
      } catch {
        return; // a malformed frame never kills the feed
      }
      if (this._paused) {
        this.buffer.push(envelope);
      } else {
        this.onEvent(envelope);
      }
    });
    this.source.onerror = () => {
      if (this.closed) return;
      this.source?.close();
      this.source = null;
      this.onStatus("reconnecting");
      this.schedule(() => this.connect(), this.reconnectDelayMs);
    };
  }

  pause(): void {
    this._paused = true;
    this.onStatus("paused");
  }

  resume(): void {
    this._paused = false;
    const pending = this.buffer.splice(0, this.buffer.length);
    for (const envelope of pending) {
      this.onEvent(envelope);
    }
    this.onStatus("live");
  }

  close(): void {
    this.closed = true;
    this.source?.close();
    this.source = null;
    this.onStatus("closed");
  }
}
