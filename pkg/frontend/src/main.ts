// Browser entry point: canvas, keyboard, connection, render loop.

import { TeleopClient } from "./client.js";
import { renderScene } from "./render.js";

function main(): void {
  const canvas = document.getElementById("scene") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("2d canvas context unavailable");

  const params = new URLSearchParams(window.location.search);
  const host = params.get("server") ?? window.location.host;
  const scenario = params.get("scenario") ?? "obstacle_field";
  const client = new TeleopClient({ url: `ws://${host}/ws`, scenario });
  client.connect();

  window.addEventListener("keydown", (ev) => {
    if (ev.code.startsWith("Arrow")) {
      client.keyboard?.keyDown(ev.code);
      ev.preventDefault();
    } else if (ev.code === "KeyR") {
      client.reset();
    }
  });
  window.addEventListener("keyup", (ev) => {
    if (ev.code.startsWith("Arrow")) {
      client.keyboard?.keyUp(ev.code);
    }
  });
  window.addEventListener("blur", () => client.keyboard?.clearKeys());

  const vp = { width: canvas.width, height: canvas.height };
  const statusEl = document.getElementById("status");
  const loop = () => {
    renderScene(ctx, vp, client.vm);
    if (statusEl) {
      const f = client.vm.frame;
      statusEl.textContent =
        `${client.vm.status}` +
        (f ? ` | t=${f.t.toFixed(2)}s u*=[${f.u_star[0].toFixed(2)}, ${f.u_star[1].toFixed(2)}]` : "") +
        (client.vm.lastError ? ` | error: ${client.vm.lastError}` : "");
    }
    requestAnimationFrame(loop);
  };
  requestAnimationFrame(loop);
}

window.addEventListener("load", main);
