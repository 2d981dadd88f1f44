// One WebSocket connection to the session, JSON object per frame.
// Interactions sent while disconnected queue up (bounded) and flush in
// order on reconnect, so a dropped link loses nothing until the queue
// overflows, at which point the user gets told.

import { Interaction, ServerFrame, parseFrame } from "./protocol";

export const MAX_QUEUED = 100;

export type ConnectionStatus = "connecting" | "open" | "closed";

export interface BridgeHooks {
  onFrame: (frame: ServerFrame) => void;
  onStatus?: (status: ConnectionStatus) => void;
  onBanner?: (text: string) => void;
}

export interface WebSocketLike {
  readyState: number;
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

const OPEN = 1;

export class Bridge {
  private ws: WebSocketLike | null = null;
  private queue: string[] = [];
  private overflowed = false;
  status: ConnectionStatus = "closed";

  constructor(
    private url: string,
    private hooks: BridgeHooks,
    private factory: (url: string) => WebSocketLike = (u) =>
      new WebSocket(u) as unknown as WebSocketLike,
  ) {}

  connect(): void {
    if (this.ws && this.ws.readyState === OPEN) return;
    this.setStatus("connecting");
    const ws = this.factory(this.url);
    this.ws = ws;
    ws.onopen = () => {
      this.setStatus("open");
      this.overflowed = false;
      const pending = this.queue;
      this.queue = [];
      for (const line of pending) ws.send(line);
    };
    ws.onclose = () => {
      if (this.ws === ws) {
        this.ws = null;
        this.setStatus("closed");
      }
    };
    ws.onerror = () => undefined; // onclose carries the state change
    ws.onmessage = (ev) => {
      if (typeof ev.data !== "string") return;
      const frame = parseFrame(ev.data);
      if (frame) this.hooks.onFrame(frame);
    };
  }

  close(): void {
    this.ws?.close();
    this.ws = null;
    this.setStatus("closed");
  }

  /** Send one interaction. Returns false when nothing was sent. */
  sendInteraction(interaction: Interaction): boolean {
    if (interaction.kind === "throw" && magnitude(interaction.vector) === 0) {
      return false; // a throw with no motion is not a throw
    }
    return this.sendRaw({ type: "interaction", ...interaction });
  }

  sendColor(r: number, g: number, b: number): boolean {
    return this.sendRaw({ type: "color", r, g, b });
  }

  private sendRaw(payload: Record<string, unknown>): boolean {
    const line = JSON.stringify(payload);
    if (this.ws && this.ws.readyState === OPEN) {
      this.ws.send(line);
      return true;
    }
    if (this.queue.length >= MAX_QUEUED) {
      if (!this.overflowed) {
        this.overflowed = true;
        this.hooks.onBanner?.(
          "Disconnected: interaction queue is full, dropping input",
        );
      }
      return false;
    }
    this.queue.push(line);
    return true;
  }

  get queuedCount(): number {
    return this.queue.length;
  }

  private setStatus(status: ConnectionStatus): void {
    this.status = status;
    this.hooks.onStatus?.(status);
  }
}

function magnitude(v: [number, number, number] | undefined): number {
  if (!v) return 0;
  return Math.hypot(v[0], v[1], v[2]);
}
