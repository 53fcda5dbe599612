// Canvas rendering of the obstacle field, the unicycle pose, and the
// intervention meter. Pure function of the view model: re-rendering the same
// frame draws the identical scene. Only the 2D-context subset below is used,
// so tests can substitute a recording stub.

import { levelSetPolyline } from "./ellipse.js";
import type { BarrierGeometry, FrameMsg } from "./protocol.js";
import type { ViewModel } from "./viewmodel.js";

export interface Canvas2D {
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
  fill(): void;
  closePath(): void;
  setLineDash(segments: number[]): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  fillStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
}

export interface Viewport {
  width: number;
  height: number;
}

const BOUNDARY_STYLE = "#111111"; // solid black
const LEVEL_A_STYLE = "#1a7f37"; // dashed green
const LEVEL_B_STYLE = "#d97706"; // dash-dotted orange
const ACTIVE_STYLE = "#c62828";
const METER_BACK = "#dddddd";
const METER_FILL = "#c62828";

export interface WorldTransform {
  toScreen(z: [number, number]): [number, number];
  scale: number;
}

export function worldTransform(barriers: BarrierGeometry[], vp: Viewport): WorldTransform {
  let lo = [Infinity, Infinity];
  let hi = [-Infinity, -Infinity];
  for (const bar of barriers) {
    for (const p of levelSetPolyline(bar, -bar.b, 32)) {
      lo = [Math.min(lo[0], p[0]), Math.min(lo[1], p[1])];
      hi = [Math.max(hi[0], p[0]), Math.max(hi[1], p[1])];
    }
  }
  if (!isFinite(lo[0])) {
    lo = [-1, -1];
    hi = [1, 1];
  }
  const margin = 0.05 * Math.max(hi[0] - lo[0], hi[1] - lo[1], 1);
  const scale = Math.min(
    vp.width / (hi[0] - lo[0] + 2 * margin),
    vp.height / (hi[1] - lo[1] + 2 * margin),
  );
  const cx = (lo[0] + hi[0]) / 2;
  const cy = (lo[1] + hi[1]) / 2;
  return {
    scale,
    toScreen: (z) => [
      vp.width / 2 + (z[0] - cx) * scale,
      vp.height / 2 - (z[1] - cy) * scale, // +y up on screen
    ],
  };
}

function strokePolyline(ctx: Canvas2D, tf: WorldTransform, pts: Array<[number, number]>): void {
  if (pts.length === 0) return;
  ctx.beginPath();
  const [x0, y0] = tf.toScreen(pts[0]);
  ctx.moveTo(x0, y0);
  for (let k = 1; k < pts.length; k++) {
    const [x, y] = tf.toScreen(pts[k]);
    ctx.lineTo(x, y);
  }
  ctx.stroke();
}

function drawBarrier(
  ctx: Canvas2D,
  tf: WorldTransform,
  bar: BarrierGeometry,
  highlighted: boolean,
): void {
  ctx.lineWidth = highlighted ? 3 : 1.5;
  ctx.setLineDash([]);
  ctx.strokeStyle = highlighted ? ACTIVE_STYLE : BOUNDARY_STYLE;
  strokePolyline(ctx, tf, levelSetPolyline(bar, 0));
  ctx.lineWidth = 1;
  ctx.setLineDash([6, 4]);
  ctx.strokeStyle = LEVEL_A_STYLE;
  strokePolyline(ctx, tf, levelSetPolyline(bar, bar.a));
  ctx.setLineDash([8, 3, 2, 3]);
  ctx.strokeStyle = LEVEL_B_STYLE;
  strokePolyline(ctx, tf, levelSetPolyline(bar, -bar.b));
  ctx.setLineDash([]);
}

function drawUnicycle(ctx: Canvas2D, tf: WorldTransform, frame: FrameMsg): void {
  const [x, y, th] = frame.x;
  const L = 0.45; // arrow length in world units
  const tip: [number, number] = [x + L * Math.cos(th), y + L * Math.sin(th)];
  const left: [number, number] = [
    x + 0.4 * L * Math.cos(th + 2.4),
    y + 0.4 * L * Math.sin(th + 2.4),
  ];
  const right: [number, number] = [
    x + 0.4 * L * Math.cos(th - 2.4),
    y + 0.4 * L * Math.sin(th - 2.4),
  ];
  ctx.fillStyle = "#1565c0";
  ctx.beginPath();
  const [tx, ty] = tf.toScreen(tip);
  ctx.moveTo(tx, ty);
  const [lx, ly] = tf.toScreen(left);
  ctx.lineTo(lx, ly);
  const [rx, ry] = tf.toScreen(right);
  ctx.lineTo(rx, ry);
  ctx.closePath();
  ctx.fill();
}

function drawMeter(ctx: Canvas2D, vp: Viewport, intervention: number): void {
  const w = 160;
  const h = 14;
  const x = vp.width - w - 12;
  const y = 12;
  ctx.fillStyle = METER_BACK;
  ctx.fillRect(x, y, w, h);
  ctx.fillStyle = METER_FILL;
  ctx.fillRect(x, y, w * Math.min(1, Math.max(0, intervention)), h);
  ctx.strokeStyle = BOUNDARY_STYLE;
  ctx.lineWidth = 1;
  ctx.strokeRect(x, y, w, h);
  ctx.fillStyle = BOUNDARY_STYLE;
  ctx.font = "12px sans-serif";
  ctx.fillText(`intervention ${(100 * intervention).toFixed(0)}%`, x, y + h + 12);
}

function drawMargins(ctx: Canvas2D, vm: ViewModel, frame: FrameMsg): void {
  ctx.fillStyle = BOUNDARY_STYLE;
  ctx.font = "12px monospace";
  ctx.fillText(`t = ${frame.t.toFixed(2)} s`, 12, 18);
  const hs = frame.h;
  let worst = Infinity;
  let worstIdx = -1;
  for (let i = 0; i < hs.length; i++) {
    if (hs[i] < worst) {
      worst = hs[i];
      worstIdx = i;
    }
  }
  ctx.fillText(`min h = ${worst.toFixed(3)} (barrier ${worstIdx})`, 12, 34);
  if (frame.active !== null) {
    ctx.fillStyle = ACTIVE_STYLE;
    ctx.fillText(
      `active barrier ${frame.active}: h = ${hs[frame.active].toFixed(3)}`,
      12,
      50,
    );
  }
  if (vm.violation) {
    ctx.fillStyle = ACTIVE_STYLE;
    ctx.fillText(`VIOLATION: ${vm.violation}`, 12, 66);
  }
}

/** Draw the whole scene; does nothing until the scenario geometry arrived. */
export function renderScene(ctx: Canvas2D, vp: Viewport, vm: ViewModel): void {
  ctx.clearRect(0, 0, vp.width, vp.height);
  if (!vm.scenario) {
    ctx.fillStyle = BOUNDARY_STYLE;
    ctx.font = "14px sans-serif";
    ctx.fillText(`waiting for scenario (${vm.status})`, 12, 24);
    return;
  }
  const tf = worldTransform(vm.scenario.barriers, vp);
  const active = vm.frame?.active ?? null;
  vm.scenario.barriers.forEach((bar, i) => drawBarrier(ctx, tf, bar, i === active));
  if (vm.frame) {
    drawUnicycle(ctx, tf, vm.frame);
    drawMargins(ctx, vm, vm.frame);
  }
  drawMeter(ctx, vp, vm.intervention());
}
