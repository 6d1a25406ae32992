// Teleoperation client: socket lifecycle, takeover bookkeeping and the
// 20 Hz input loop. Works with the browser WebSocket or any compatible
// implementation injected for tests.

import {
  ClientFrame,
  ErrorFrame,
  ScenarioFrame,
  ServerFrame,
  StateFrame,
  parseServerFrame,
} from './protocol.js';

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export const INPUT_RATE_HZ = 20;

export interface Axes {
  forward: number; // [-1, 1], scaled by the robot's v bound
  turn: number; // [-1, 1], scaled by the robot's w bound
}

export class TeleopClient {
  scenario: ScenarioFrame | null = null;
  connected = false;
  inputFramesSent = 0;

  onState: ((frame: StateFrame) => void)[] = [];
  onError: ((frame: ErrorFrame) => void)[] = [];
  onDisconnect: (() => void)[] = [];

  private socket: SocketLike | null = null;
  private loop: ReturnType<typeof setInterval> | null = null;
  private lastWasZero = true;

  constructor(
    private url: string,
    private factory: SocketFactory,
  ) {}

  connect(timeoutMs = 10_000): Promise<ScenarioFrame> {
    return new Promise((resolve, reject) => {
      const socket = this.factory(this.url);
      this.socket = socket;
      const timer = setTimeout(() => {
        reject(new Error('timed out waiting for the scenario frame'));
        socket.close();
      }, timeoutMs);
      socket.onopen = () => {
        this.connected = true;
      };
      socket.onmessage = (ev) => {
        const frame = parseServerFrame(String(ev.data));
        this.dispatch(frame);
        if (frame.type === 'scenario') {
          clearTimeout(timer);
          resolve(frame);
        }
      };
      socket.onclose = () => {
        this.connected = false;
        this.stopInputLoop();
        for (const fn of this.onDisconnect) fn();
      };
      socket.onerror = () => {
        clearTimeout(timer);
        reject(new Error('socket error during connect'));
      };
    });
  }

  private dispatch(frame: ServerFrame): void {
    if (frame.type === 'scenario') {
      this.scenario = frame;
    } else if (frame.type === 'state') {
      for (const fn of this.onState) fn(frame);
    } else {
      for (const fn of this.onError) fn(frame);
    }
  }

  private sendFrame(frame: ClientFrame): void {
    if (!this.socket || !this.connected) return;
    this.socket.send(JSON.stringify(frame));
  }

  control(cmd: 'pause' | 'resume' | 'step'): void {
    this.sendFrame({ type: 'control', cmd });
  }

  takeover(robot: number): void {
    this.sendFrame({ type: 'takeover', robot });
  }

  release(robot: number): void {
    this.stopInputLoop();
    this.sendFrame({ type: 'input', robot, v: 0, w: 0 });
    this.inputFramesSent += 1;
    this.sendFrame({ type: 'release', robot });
  }

  sendInput(robot: number, v: number, w: number): void {
    this.sendFrame({ type: 'input', robot, v, w });
    this.inputFramesSent += 1;
  }

  /** Stream inputs at 20 Hz while any axis is nonzero; one zero frame on
   * the transition back to rest. Axes are normalized and scaled by the
   * robot's declared input bounds. */
  startInputLoop(robot: number, axes: () => Axes): void {
    this.stopInputLoop();
    const info = this.scenario?.robots.find((r) => r.id === robot);
    const vMax = info ? info.v_max : 0.35;
    const wMax = info ? info.w_max : 0.35;
    this.lastWasZero = true;
    this.loop = setInterval(() => {
      const a = axes();
      const fwd = Math.max(-1, Math.min(1, a.forward));
      const turn = Math.max(-1, Math.min(1, a.turn));
      const isZero = fwd === 0 && turn === 0;
      if (isZero && this.lastWasZero) return;
      this.sendInput(robot, fwd * vMax, turn * wMax);
      this.lastWasZero = isZero;
    }, 1000 / INPUT_RATE_HZ);
  }

  stopInputLoop(): void {
    if (this.loop !== null) {
      clearInterval(this.loop);
      this.loop = null;
    }
  }

  close(): void {
    this.stopInputLoop();
    this.socket?.close();
  }
}
