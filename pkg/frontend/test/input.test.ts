import { describe, expect, it } from "vitest";

import { KeyboardInput, RELEASE_DECAY_S } from "../src/input.js";

const DT = 1 / 60;

function settle(kb: KeyboardInput, seconds: number): [number, number] {
  let u: [number, number] = kb.current();
  for (let t = 0; t < seconds; t += DT) {
    u = kb.tick(DT);
  }
  return u;
}

describe("KeyboardInput", () => {
  it("idle gives zero", () => {
    const kb = new KeyboardInput([2, 2]);
    expect(settle(kb, 1.0)).toEqual([0, 0]);
  });

  it("up held reaches full forward speed", () => {
    const kb = new KeyboardInput([2, 2]);
    kb.keyDown("ArrowUp");
    const [up, ud] = settle(kb, 1.0);
    expect(up).toBeCloseTo(2, 3);
    expect(ud).toBe(0);
  });

  it("up+left drives both channels positive", () => {
    const kb = new KeyboardInput([2, 2]);
    kb.keyDown("ArrowUp");
    kb.keyDown("ArrowLeft");
    const [up, ud] = settle(kb, 1.0);
    expect(up).toBeCloseTo(2, 3);
    expect(ud).toBeCloseTo(2, 3);
  });

  it("opposite keys cancel", () => {
    const kb = new KeyboardInput([2, 2]);
    kb.keyDown("ArrowUp");
    kb.keyDown("ArrowDown");
    expect(settle(kb, 0.5)).toEqual([0, 0]);
  });

  it("released keys decay to exactly zero within 0.3 s", () => {
    const kb = new KeyboardInput([2, 2]);
    kb.keyDown("ArrowUp");
    kb.keyDown("ArrowRight");
    settle(kb, 1.0);
    kb.keyUp("ArrowUp");
    kb.keyUp("ArrowRight");
    const u = settle(kb, RELEASE_DECAY_S);
    expect(u[0]).toBe(0);
    expect(u[1]).toBe(0);
  });

  it("never leaves the box, any key chatter", () => {
    const kb = new KeyboardInput([2, 2]);
    const keys = ["ArrowUp", "ArrowDown", "ArrowLeft", "ArrowRight"];
    let seed = 12345;
    const rand = () => {
      seed = (seed * 1103515245 + 12345) % 2 ** 31;
      return seed / 2 ** 31;
    };
    for (let k = 0; k < 5000; k++) {
      const key = keys[Math.floor(rand() * 4)];
      if (rand() < 0.5) kb.keyDown(key);
      else kb.keyUp(key);
      const [up, ud] = kb.tick(DT * (0.5 + rand()));
      expect(Math.abs(up)).toBeLessThanOrEqual(2);
      expect(Math.abs(ud)).toBeLessThanOrEqual(2);
    }
  });

  it("blur-style clear stops all motion", () => {
    const kb = new KeyboardInput([2, 2]);
    kb.keyDown("ArrowUp");
    settle(kb, 0.5);
    kb.clearKeys();
    expect(settle(kb, RELEASE_DECAY_S)).toEqual([0, 0]);
  });
});
