import { describe, expect, it } from "vitest";

import type { Canvas2D } from "../src/render.js";
import { renderScene, worldTransform } from "../src/render.js";
import { ViewModel } from "../src/viewmodel.js";
import { frameMsg, scenarioMsg } from "./viewmodel.test.js";

interface Op {
  op: string;
  args: unknown[];
}

/** Recording stub standing in for a CanvasRenderingContext2D. */
class StubCanvas implements Canvas2D {
  ops: Op[] = [];
  strokeStyle = "";
  fillStyle = "";
  lineWidth = 1;
  font = "";

  private record(op: string, ...args: unknown[]) {
    this.ops.push({ op, args: [...args, this.strokeStyle, this.fillStyle] });
  }

  beginPath() {
    this.record("beginPath");
  }
  moveTo(x: number, y: number) {
    this.record("moveTo", x, y);
  }
  lineTo(x: number, y: number) {
    this.record("lineTo", x, y);
  }
  stroke() {
    this.record("stroke");
  }
  fill() {
    this.record("fill");
  }
  closePath() {
    this.record("closePath");
  }
  setLineDash(segments: number[]) {
    this.record("setLineDash", [...segments]);
  }
  fillRect(x: number, y: number, w: number, h: number) {
    this.record("fillRect", x, y, w, h);
  }
  strokeRect(x: number, y: number, w: number, h: number) {
    this.record("strokeRect", x, y, w, h);
  }
  clearRect(x: number, y: number, w: number, h: number) {
    this.record("clearRect", x, y, w, h);
  }
  fillText(text: string, x: number, y: number) {
    this.record("fillText", text, x, y);
  }
}

const VP = { width: 860, height: 720 };

describe("renderScene", () => {
  it("waits quietly until the scenario arrives", () => {
    const vm = new ViewModel();
    const ctx = new StubCanvas();
    renderScene(ctx, VP, vm);
    const texts = ctx.ops.filter((o) => o.op === "fillText");
    expect(texts.length).toBe(1);
    expect(String(texts[0].args[0])).toContain("waiting for scenario");
  });

  it("draws three level sets per barrier after join", () => {
    const vm = new ViewModel();
    vm.handleMessage(scenarioMsg);
    const ctx = new StubCanvas();
    renderScene(ctx, VP, vm);
    const strokes = ctx.ops.filter((o) => o.op === "stroke");
    // boundary + level_a + level_b per barrier
    expect(strokes.length).toBe(3 * scenarioMsg.barriers.length);
    const dashes = ctx.ops
      .filter((o) => o.op === "setLineDash")
      .map((o) => (o.args[0] as number[]).join(","));
    expect(dashes).toContain("6,4"); // dashed h = a
    expect(dashes).toContain("8,3,2,3"); // dash-dotted h = -b
  });

  it("meter reflects a phi change within one frame", () => {
    const vm = new ViewModel();
    vm.handleMessage(scenarioMsg);
    vm.handleMessage(frameMsg({ phi: 1.0 }));
    const before = new StubCanvas();
    renderScene(before, VP, vm);
    const meterWidth = (ctx: StubCanvas) => {
      // second fillRect of the meter is the fill bar
      const rects = ctx.ops.filter((o) => o.op === "fillRect");
      return rects[rects.length - 1].args[2] as number;
    };
    expect(meterWidth(before)).toBe(0); // phi = 1 -> intervention 0

    vm.handleMessage(frameMsg({ phi: 0.25, active: 1, h: [0.9, 0.1] }));
    const after = new StubCanvas();
    renderScene(after, VP, vm);
    expect(meterWidth(after)).toBeCloseTo(160 * 0.75, 9);
  });

  it("re-rendering the same frame draws the identical scene", () => {
    const vm = new ViewModel();
    vm.handleMessage(scenarioMsg);
    vm.handleMessage(frameMsg({ phi: 0.5, active: 1 }));
    const a = new StubCanvas();
    const b = new StubCanvas();
    renderScene(a, VP, vm);
    renderScene(b, VP, vm);
    expect(JSON.stringify(a.ops)).toBe(JSON.stringify(b.ops));
  });

  it("heading pi/2 points the arrow up on screen", () => {
    const vm = new ViewModel();
    vm.handleMessage(scenarioMsg);
    vm.handleMessage(frameMsg({ x: [0, 0, Math.PI / 2] }));
    const ctx = new StubCanvas();
    renderScene(ctx, VP, vm);
    // the unicycle triangle: moveTo(tip) right before two lineTo + closePath + fill
    const fillIdx = ctx.ops.findIndex((o) => o.op === "closePath");
    const tri = ctx.ops.slice(0, fillIdx).filter((o) => o.op === "moveTo" || o.op === "lineTo");
    const tip = tri[tri.length - 3];
    const baseL = tri[tri.length - 2];
    const baseR = tri[tri.length - 1];
    const tipY = tip.args[1] as number;
    expect(tipY).toBeLessThan(baseL.args[1] as number); // screen y grows downward
    expect(tipY).toBeLessThan(baseR.args[1] as number);
  });

  it("active barrier is highlighted", () => {
    const vm = new ViewModel();
    vm.handleMessage(scenarioMsg);
    vm.handleMessage(frameMsg({ active: 1, phi: 0.3, h: [0.9, 0.2] }));
    const ctx = new StubCanvas();
    renderScene(ctx, VP, vm);
    const strokes = ctx.ops.filter((o) => o.op === "stroke");
    const styles = strokes.map((o) => o.args[o.args.length - 2]);
    expect(styles).toContain("#c62828");
  });
});

describe("worldTransform", () => {
  it("flips y so +y is up and keeps the field inside the viewport", () => {
    const tf = worldTransform(scenarioMsg.barriers, VP);
    const [, yLow] = tf.toScreen([0, -5]);
    const [, yHigh] = tf.toScreen([0, 5]);
    expect(yHigh).toBeLessThan(yLow);
    for (const z of [
      [-11, 0],
      [11, 0],
      [0, 9],
      [0, -9],
    ] as Array<[number, number]>) {
      const [sx, sy] = tf.toScreen(z);
      expect(sx).toBeGreaterThanOrEqual(0);
      expect(sx).toBeLessThanOrEqual(VP.width);
      expect(sy).toBeGreaterThanOrEqual(0);
      expect(sy).toBeLessThanOrEqual(VP.height);
    }
  });
});
