// Client-side view state: everything rendered comes from server frames.

import { ScenarioFrame, StateFrame } from './protocol.js';

const TRAIL_LENGTH = 300;

export interface ViewModel {
  scenario: ScenarioFrame | null;
  state: StateFrame | null;
  stateReceivedAt: number;
  selected: number | null;
  takenOver: Set<number>;
  trails: Map<number, { x: number; y: number }[]>;
  connected: boolean;
  lastError: string;
}

export function createViewModel(): ViewModel {
  return {
    scenario: null,
    state: null,
    stateReceivedAt: 0,
    selected: null,
    takenOver: new Set(),
    trails: new Map(),
    connected: false,
    lastError: '',
  };
}

export function applyScenario(view: ViewModel, frame: ScenarioFrame): void {
  view.scenario = frame;
  view.trails = new Map(frame.robots.map((r) => [r.id, []]));
  if (frame.robots.length > 0 && view.selected === null) {
    view.selected = frame.robots[0].id;
  }
}

export function applyState(view: ViewModel, frame: StateFrame, now: number): void {
  view.state = frame;
  view.stateReceivedAt = now;
  view.takenOver = new Set(frame.robots.filter((r) => r.taken_over).map((r) => r.id));
  for (const robot of frame.robots) {
    const trail = view.trails.get(robot.id);
    if (trail) {
      trail.push({ x: robot.x, y: robot.y });
      if (trail.length > TRAIL_LENGTH) trail.shift();
    }
  }
}

export function isStale(view: ViewModel, now: number, staleAfterMs = 500): boolean {
  return view.state !== null && now - view.stateReceivedAt > staleAfterMs;
}
