// Keyboard to nominal input: arrows set the speed / turn-rate targets, a
// first-order filter smooths transitions, and released keys decay to zero
// within 0.3 s. The produced input never leaves the box (the server clamps
// again regardless).

export const RELEASE_DECAY_S = 0.3;
// time constant such that a released channel is below 1% of full scale at
// RELEASE_DECAY_S, where it snaps to exactly zero
const TAU = RELEASE_DECAY_S / 5;
const SNAP_FRACTION = 0.01;

export class KeyboardInput {
  private pressed = new Set<string>();
  private u: [number, number] = [0, 0];

  constructor(
    private readonly uMax: [number, number],
  ) {}

  keyDown(code: string): void {
    this.pressed.add(code);
  }

  keyUp(code: string): void {
    this.pressed.delete(code);
  }

  clearKeys(): void {
    this.pressed.clear();
  }

  /** Target input from the currently pressed keys (before smoothing). */
  target(): [number, number] {
    const up = this.pressed.has("ArrowUp") ? 1 : 0;
    const down = this.pressed.has("ArrowDown") ? 1 : 0;
    const left = this.pressed.has("ArrowLeft") ? 1 : 0;
    const right = this.pressed.has("ArrowRight") ? 1 : 0;
    return [(up - down) * this.uMax[0], (left - right) * this.uMax[1]];
  }

  /** Advance the filter by dt seconds and return the smoothed input. */
  tick(dt: number): [number, number] {
    const target = this.target();
    const gain = 1 - Math.exp(-dt / TAU);
    for (const i of [0, 1] as const) {
      this.u[i] += gain * (target[i] - this.u[i]);
      if (target[i] === 0 && Math.abs(this.u[i]) < SNAP_FRACTION * this.uMax[i]) {
        this.u[i] = 0;
      }
      const lim = this.uMax[i];
      this.u[i] = Math.min(lim, Math.max(-lim, this.u[i]));
    }
    return [this.u[0], this.u[1]];
  }

  current(): [number, number] {
    return [this.u[0], this.u[1]];
  }
}
