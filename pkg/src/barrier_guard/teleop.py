"""Live teleoperation sessions over WebSocket.

The human input plays the nominal-controller role: the server clamps each
received input into the box (the convexity hypothesis needs u_nom in U),
holds the latest value between steps, and runs the exact same blend/RK4
kernel as offline runs, so a recorded input log replays to the identical
state sequence.

Message schema (JSON over one WebSocket per session):
  client -> server: {"type": "join", "scenario": <name>}
                    {"type": "input", "u": [u_p, u_d]}
                    {"type": "reset"}
  server -> client: {"type": "scenario", ...geometry, sent once at join}
                    {"type": "frame", "t", "x", "u_nom", "u_star", "h",
                     "phi", "active"}
                    {"type": "violation", "msg", "t"}
                    {"type": "ended", "t"}
                    {"type": "error", "msg"}
"""

import asyncio
import itertools
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from . import kernels
from .scenarios import Scenario, load_shipped_scenario

log = logging.getLogger(__name__)

SAFETY_SLACK = 1e-9

_session_ids = itertools.count(1)


class SessionEnded(RuntimeError):
    pass


@dataclass
class Session:
    """One driver, one unicycle; stepped by the server's pacing loop.

    The state advances only through the shared controller/integrator kernel;
    the input log holds the clamped nominal input applied at each step, which
    is everything needed to replay the session offline.
    """

    scenario: Scenario
    sid: int = field(default_factory=lambda: next(_session_ids))
    x: np.ndarray = None
    step_count: int = 0
    live: bool = True
    u_latest: np.ndarray = field(default_factory=lambda: np.zeros(2))
    input_log: List[np.ndarray] = field(default_factory=list)
    min_h: float = np.inf
    last_frame: Optional[dict] = None

    def __post_init__(self):
        if self.x is None:
            self.x = self.scenario.initial_states[0].astype(float).copy()
        self._bars = self.scenario.pack()

    @property
    def dt(self) -> float:
        return self.scenario.teleop_dt if self.scenario.teleop_dt is not None else self.scenario.dt

    @property
    def n_steps(self) -> int:
        return int(round(self.scenario.horizon / self.dt))

    def apply_input(self, u) -> np.ndarray:
        """Clamp a received input into the box and hold it for coming steps."""
        if not self.live:
            raise SessionEnded(f"session {self.sid} has ended")
        u = np.asarray(u, dtype=float)
        if u.shape != (2,) or not np.all(np.isfinite(u)):
            raise ValueError(f"input must be two finite numbers, got {u}")
        self.u_latest = self.scenario.box.clamp(u)
        return self.u_latest

    def step(self, human_input=None) -> dict:
        """Advance one dt with the latest (or given) input; returns the frame."""
        if not self.live:
            raise SessionEnded(f"session {self.sid} has ended")
        if human_input is not None:
            self.apply_input(human_input)
        u_nom = self.u_latest
        u, w, active, h = kernels.controller_step(self.x, u_nom, self._bars)
        if active == -2:
            self.live = False
            raise SessionEnded("annulus disjointness violated during session")
        frame = {
            "type": "frame",
            "t": self.step_count * self.dt,
            "x": self.x.tolist(),
            "u_nom": u_nom.tolist(),
            "u_star": u.tolist(),
            "h": h.tolist(),
            "phi": w,
            "active": int(active) if active >= 0 else None,
        }
        self.input_log.append(u_nom.copy())
        self.min_h = min(self.min_h, float(h.min()))
        self.x = kernels.rk4_unicycle_step(self.x, u, self.dt)
        self.step_count += 1
        if self.step_count > self.n_steps:
            self.live = False
        self.last_frame = frame
        return frame

    def reset(self):
        self.x = self.scenario.initial_states[0].astype(float).copy()
        self.step_count = 0
        self.live = True
        self.u_latest = np.zeros(2)
        self.input_log = []
        self.min_h = np.inf
        self.last_frame = None

    def recorded_log(self) -> np.ndarray:
        """Applied nominal inputs, one row per step."""
        return np.array(self.input_log).reshape(-1, 2)


def session_step(session: Session, human_input) -> dict:
    """Clamp the input, blend, integrate one step; returns the frame."""
    return session.step(human_input)


def scenario_geometry(s: Scenario) -> dict:
    return {
        "type": "scenario",
        "name": s.name,
        "dt": s.teleop_dt if s.teleop_dt is not None else s.dt,
        "steps_per_second": s.steps_per_second,
        "horizon": s.horizon,
        "input_box": {"lower": s.box.lower.tolist(), "upper": s.box.upper.tolist()},
        "x0": s.initial_states[0].tolist(),
        "barriers": [
            {
                "gamma": b.shell.ellipsoid.gamma,
                "delta": b.shell.ellipsoid.delta,
                "P": b.shell.ellipsoid.P.tolist(),
                "center": b.shell.ellipsoid.center.tolist(),
                "a": b.shell.a,
                "b": b.shell.b,
            }
            for b in s.barriers
        ],
    }


def build_app(scenarios: Optional[Dict[str, Scenario]] = None, log_dir: Optional[str] = None,
              static_dir: Optional[str] = None):
    """FastAPI app exposing the scenario catalog and the session WebSocket."""
    from fastapi import FastAPI, WebSocket, WebSocketDisconnect

    if scenarios is None:
        shipped = load_shipped_scenario()
        scenarios = {shipped.name: shipped}

    app = FastAPI(title="barrier-guard teleop")
    app.state.scenarios = scenarios
    app.state.sessions = {}

    @app.get("/scenarios")
    def catalog():
        return {name: scenario_geometry(s) for name, s in scenarios.items()}

    async def _pump(ws: WebSocket, session: Session):
        period = 1.0 / session.scenario.steps_per_second
        warned = False
        while session.live:
            frame = session.step()
            await ws.send_json(frame)
            if session.min_h < -SAFETY_SLACK and not warned:
                warned = True
                await ws.send_json(
                    {"type": "violation", "msg": f"min h = {session.min_h:.3e}",
                     "t": frame["t"]}
                )
            await asyncio.sleep(period)
        await ws.send_json({"type": "ended", "t": session.step_count * session.dt})

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        session = None
        pump_task = None
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError:
                    await ws.send_json({"type": "error", "msg": "malformed JSON"})
                    continue
                kind = msg.get("type")
                if kind == "join":
                    name = msg.get("scenario")
                    if session is not None:
                        await ws.send_json({"type": "error", "msg": "already joined"})
                        continue
                    if name not in scenarios:
                        await ws.send_json({"type": "error", "msg": f"unknown scenario {name!r}"})
                        continue
                    session = Session(scenario=scenarios[name])
                    app.state.sessions[session.sid] = session
                    await ws.send_json(scenario_geometry(session.scenario))
                    pump_task = asyncio.create_task(_pump(ws, session))
                elif kind == "input":
                    if session is None:
                        await ws.send_json({"type": "error", "msg": "join first"})
                        continue
                    try:
                        session.apply_input(msg.get("u"))
                    except (ValueError, TypeError, SessionEnded) as exc:
                        await ws.send_json({"type": "error", "msg": str(exc)})
                elif kind == "reset":
                    if session is None:
                        await ws.send_json({"type": "error", "msg": "join first"})
                        continue
                    if pump_task is not None:
                        pump_task.cancel()
                    session.reset()
                    pump_task = asyncio.create_task(_pump(ws, session))
                else:
                    await ws.send_json({"type": "error", "msg": f"unknown type {kind!r}"})
        except WebSocketDisconnect:
            pass
        finally:
            if pump_task is not None:
                pump_task.cancel()
            if session is not None:
                app.state.sessions.pop(session.sid, None)
                if log_dir and session.input_log:
                    _write_replay_log(log_dir, session)

    if static_dir and os.path.isdir(static_dir):
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


def _write_replay_log(log_dir: str, session: Session):
    os.makedirs(log_dir, exist_ok=True)
    path = os.path.join(log_dir, f"session_{session.sid}.jsonl")
    with open(path, "w") as fh:
        for k, u in enumerate(session.input_log):
            fh.write(json.dumps({"step": k, "u_nom": u.tolist()}) + "\n")
    log.info("wrote replay log %s (%d steps)", path, len(session.input_log))


def serve(port: int, scenarios: Optional[Dict[str, Scenario]] = None,
          log_dir: Optional[str] = None, static_dir: Optional[str] = None,
          host: str = "127.0.0.1"):
    """Blocking server entry point used by the CLI's serve subcommand."""
    import uvicorn

    app = build_app(scenarios=scenarios, log_dir=log_dir, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
