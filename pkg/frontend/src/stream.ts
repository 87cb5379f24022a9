import type { FrameMessage, ErrorMessage, ModeSelection, ServerMessage } from "./types";

/** The subset of WebSocket the connection needs; swappable in tests. */
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((event: { data: string }) => void) | null;
  onclose: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

const defaultFactory: SocketFactory = (url) => new WebSocket(url) as unknown as SocketLike;

export interface ReplayConnectionOptions {
  socketFactory?: SocketFactory;
  reconnectDelayMs?: number;
  /** scheduler injection point for tests */
  setTimeoutFn?: (fn: () => void, ms: number) => unknown;
}

/**
 * One replay stream: sends control ops, surfaces frames, and reconnects
 * after connection loss by re-sending the mode and seeking back to the
 * last rendered cursor.
 */
export class ReplayConnection {
  onFrame: ((frame: FrameMessage) => void) | null = null;
  onError: ((error: ErrorMessage) => void) | null = null;

  lastT = 0;
  playing = false;

  private socket: SocketLike | null = null;
  private mode: ModeSelection;
  private closedByUser = false;
  private everConnected = false;
  private readonly factory: SocketFactory;
  private readonly reconnectDelayMs: number;
  private readonly setTimeoutFn: (fn: () => void, ms: number) => unknown;

  constructor(
    private readonly url: string,
    mode: ModeSelection,
    options: ReplayConnectionOptions = {},
  ) {
    this.mode = mode;
    this.factory = options.socketFactory ?? defaultFactory;
    this.reconnectDelayMs = options.reconnectDelayMs ?? 500;
    this.setTimeoutFn = options.setTimeoutFn ?? ((fn, ms) => setTimeout(fn, ms));
    this.open();
  }

  private open(): void {
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.onopen = () => {
      const resume = this.everConnected;
      this.everConnected = true;
      this.sendMode();
      if (resume) {
        this.seek(this.lastT);
        if (this.playing) {
          this.send({ op: "play" });
        }
      }
    };
    socket.onmessage = (event) => {
      const message = JSON.parse(event.data) as ServerMessage;
      if (message.type === "frame") {
        this.lastT = message.t_us;
        this.onFrame?.(message);
      } else {
        this.onError?.(message);
      }
    };
    socket.onclose = () => {
      if (this.closedByUser) {
        return;
      }
      this.setTimeoutFn(() => {
        if (!this.closedByUser) {
          this.open();
        }
      }, this.reconnectDelayMs);
    };
  }

  private send(message: object): void {
    this.socket?.send(JSON.stringify(message));
  }

  private sendMode(): void {
    const m = this.mode;
    if (m.mode === "real") {
      this.send({ op: "mode", mode: "real", pos: m.pos, quat: m.quat });
    } else {
      this.send({ op: "mode", mode: "mini", scale: m.scale, pos: m.pos, quat: m.quat });
    }
  }

  get currentMode(): ModeSelection {
    return this.mode;
  }

  play(): void {
    this.playing = true;
    this.send({ op: "play" });
  }

  pause(): void {
    this.playing = false;
    this.send({ op: "pause" });
  }

  seek(tUs: number): void {
    this.send({ op: "seek", t_us: tUs });
  }

  setRate(rate: number): void {
    this.send({ op: "rate", rate });
  }

  keyframe(direction: "next" | "prev"): void {
    this.send({ op: "keyframe", dir: direction });
  }

  setMode(mode: ModeSelection): void {
    this.mode = mode;
    this.sendMode();
  }

  close(): void {
    this.closedByUser = true;
    this.socket?.close();
  }
}
