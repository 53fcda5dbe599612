// Client-side state: scenario geometry plus the latest frame. Rendering never
// mutates simulation state; everything here is overwritten by server messages
// only, and queued frames coalesce to the newest one per render tick.

import type { FrameMsg, ScenarioMsg, ServerMsg } from "./protocol.js";

export type ConnectionStatus = "connecting" | "live" | "ended" | "closed" | "error";

export class ViewModel {
  scenario: ScenarioMsg | null = null;
  frame: FrameMsg | null = null;
  status: ConnectionStatus = "connecting";
  lastError: string | null = null;
  violation: string | null = null;
  framesSeen = 0;

  handleMessage(msg: ServerMsg): void {
    switch (msg.type) {
      case "scenario":
        this.scenario = msg;
        this.frame = null;
        this.violation = null;
        this.status = "live";
        this.framesSeen = 0;
        break;
      case "frame":
        this.frame = msg; // coalesce: only the latest frame is kept
        this.framesSeen += 1;
        break;
      case "violation":
        this.violation = msg.msg;
        break;
      case "ended":
        this.status = "ended";
        break;
      case "error":
        this.lastError = msg.msg;
        break;
    }
  }

  closed(): void {
    this.status = "closed";
  }

  /** Intervention strength shown by the meter: 1 - phi_bar. */
  intervention(): number {
    return this.frame ? 1 - this.frame.phi : 0;
  }
}
