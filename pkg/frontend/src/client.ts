// WebSocket wiring: join a scenario, feed server messages to the view model,
// and send the smoothed keyboard input at a steady cadence. Inputs are
// clamped client-side before sending; the server clamps again.

import { KeyboardInput } from "./input.js";
import type { ClientMsg, ServerMsg } from "./protocol.js";
import { ViewModel } from "./viewmodel.js";

export interface TeleopClientOptions {
  url: string;
  scenario: string;
  inputHz?: number;
}

export class TeleopClient {
  readonly vm = new ViewModel();
  keyboard: KeyboardInput | null = null;
  private ws: WebSocket | null = null;
  private inputTimer: ReturnType<typeof setInterval> | null = null;
  private lastTick = 0;

  constructor(private readonly opts: TeleopClientOptions) {}

  connect(): void {
    const ws = new WebSocket(this.opts.url);
    this.ws = ws;
    ws.addEventListener("open", () => {
      this.send({ type: "join", scenario: this.opts.scenario });
    });
    ws.addEventListener("message", (ev) => {
      const msg = JSON.parse(ev.data as string) as ServerMsg;
      this.vm.handleMessage(msg);
      if (msg.type === "scenario" && this.keyboard === null) {
        this.keyboard = new KeyboardInput([
          msg.input_box.upper[0],
          msg.input_box.upper[1],
        ]);
        this.startInputLoop();
      }
    });
    ws.addEventListener("close", () => {
      this.vm.closed();
      this.stopInputLoop();
    });
    ws.addEventListener("error", () => {
      this.vm.lastError = "websocket error";
    });
  }

  reset(): void {
    this.send({ type: "reset" });
  }

  private startInputLoop(): void {
    const hz = this.opts.inputHz ?? 30;
    this.lastTick = performance.now();
    this.inputTimer = setInterval(() => {
      if (!this.keyboard) return;
      const now = performance.now();
      const dt = Math.max(1e-3, (now - this.lastTick) / 1000);
      this.lastTick = now;
      const u = this.keyboard.tick(dt);
      this.send({ type: "input", u });
    }, 1000 / hz);
  }

  private stopInputLoop(): void {
    if (this.inputTimer !== null) {
      clearInterval(this.inputTimer);
      this.inputTimer = null;
    }
  }

  private send(msg: ClientMsg): void {
    if (this.ws && this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(JSON.stringify(msg));
    }
  }
}
