// Message schema shared with the teleop server (JSON over one WebSocket).

export interface BarrierGeometry {
  gamma: -1 | 1;
  delta: number;
  P: [[number, number], [number, number]];
  center: [number, number];
  a: number;
  b: number;
}

export interface ScenarioMsg {
  type: "scenario";
  name: string;
  dt: number;
  steps_per_second: number;
  horizon: number;
  input_box: { lower: [number, number]; upper: [number, number] };
  x0: [number, number, number];
  barriers: BarrierGeometry[];
}

export interface FrameMsg {
  type: "frame";
  t: number;
  x: [number, number, number];
  u_nom: [number, number];
  u_star: [number, number];
  h: number[];
  phi: number;
  active: number | null;
}

export interface ViolationMsg {
  type: "violation";
  msg: string;
  t: number;
}

export interface EndedMsg {
  type: "ended";
  t: number;
}

export interface ErrorMsg {
  type: "error";
  msg: string;
}

export type ServerMsg = ScenarioMsg | FrameMsg | ViolationMsg | EndedMsg | ErrorMsg;

export type ClientMsg =
  | { type: "join"; scenario: string }
  | { type: "input"; u: [number, number] }
  | { type: "reset" };
