// Wire protocol: one JSON object per websocket text frame.

export interface CellInfo {
  id: number;
  x0: number;
  y0: number;
  x1: number;
  y1: number;
  labels: string[];
}

export interface RobotInfo {
  id: number;
  mode: string;
  formula: string;
  footprint: number;
  sensing_radius: number;
  v_max: number;
  w_max: number;
  plan_prefix: number[];
  plan_cycle: number[];
  trap_regions: number[];
}

export interface ScenarioFrame {
  type: 'scenario';
  name: string;
  workspace: {
    width: number;
    height: number;
    cols: number;
    rows: number;
    cells: CellInfo[];
    static_obstacles: number[];
  };
  robots: RobotInfo[];
  obstacles: { id: string; radius: number }[];
}

export interface RobotState {
  id: number;
  x: number;
  y: number;
  theta: number;
  v: number;
  w: number;
  kappa: number | null;
  mode: string;
  taken_over: boolean;
  buchi_progress: { phase: string; index: number; cycles: number };
}

export interface StateFrame {
  type: 'state';
  tick: number;
  time: number;
  running: boolean;
  robots: RobotState[];
  obstacles: { id: string; x: number; y: number }[];
  events: string[];
}

export interface ErrorFrame {
  type: 'error';
  msg: string;
}

export type ServerFrame = ScenarioFrame | StateFrame | ErrorFrame;

export type ClientFrame =
  | { type: 'takeover'; robot: number }
  | { type: 'release'; robot: number }
  | { type: 'input'; robot: number; v: number; w: number }
  | { type: 'control'; cmd: 'pause' | 'resume' | 'step' };

export function parseServerFrame(data: string): ServerFrame {
  const obj = JSON.parse(data);
  if (obj.type !== 'scenario' && obj.type !== 'state' && obj.type !== 'error') {
    throw new Error(`unknown server frame type: ${obj.type}`);
  }
  return obj as ServerFrame;
}
