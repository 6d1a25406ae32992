// Top-down canvas rendering of the workspace and live state.

import { ViewModel, isStale } from './viewmodel.js';

const ROBOT_COLORS = ['#2e8b57', '#7b2fbe', '#d62728', '#1f77b4', '#ff7f0e'];

export function robotColor(id: number): string {
  return ROBOT_COLORS[id % ROBOT_COLORS.length];
}

interface Mapper {
  toPx(x: number, y: number): [number, number];
  scale: number;
}

function makeMapper(view: ViewModel, canvas: HTMLCanvasElement): Mapper {
  const ws = view.scenario!.workspace;
  const pad = 24;
  const scale = Math.min(
    (canvas.width - 2 * pad) / ws.width,
    (canvas.height - 2 * pad) / ws.height,
  );
  return {
    scale,
    toPx(x: number, y: number): [number, number] {
      // world y grows upward, canvas y downward
      return [pad + x * scale, canvas.height - pad - y * scale];
    },
  };
}

export function render(view: ViewModel, canvas: HTMLCanvasElement): void {
  const ctx = canvas.getContext('2d');
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (!view.scenario) {
    ctx.fillStyle = '#888';
    ctx.font = '16px sans-serif';
    ctx.fillText('waiting for scenario...', 20, 30);
    return;
  }
  const map = makeMapper(view, canvas);
  drawGrid(view, ctx, map);
  drawTrails(view, ctx, map);
  drawObstacles(view, ctx, map);
  drawRobots(view, ctx, map);
  drawGauges(view, ctx);
  if (isStale(view, performance.now())) {
    ctx.fillStyle = '#c0392b';
    ctx.font = 'bold 14px sans-serif';
    ctx.fillText('STALE', canvas.width - 60, 20);
  }
  if (view.lastError) {
    ctx.fillStyle = '#c0392b';
    ctx.font = '12px sans-serif';
    ctx.fillText(view.lastError, 24, canvas.height - 6);
  }
}

function drawGrid(view: ViewModel, ctx: CanvasRenderingContext2D, map: Mapper): void {
  const scenario = view.scenario!;
  const obstacles = new Set(scenario.workspace.static_obstacles);
  const targetTint = new Map<number, string>();
  const trapCells = new Set<number>();
  for (const robot of scenario.robots) {
    for (const cell of robot.plan_cycle) {
      // tint only the labeled target cells of this robot's tour
      const info = scenario.workspace.cells[cell - 1];
      if (info && info.labels.length > 0) targetTint.set(cell, robotColor(robot.id));
    }
    for (const cell of robot.trap_regions) trapCells.add(cell);
  }

  for (const cell of scenario.workspace.cells) {
    const [x0, y0] = map.toPx(cell.x0, cell.y1);
    const w = (cell.x1 - cell.x0) * map.scale;
    const h = (cell.y1 - cell.y0) * map.scale;
    if (obstacles.has(cell.id)) {
      ctx.fillStyle = '#444';
      ctx.fillRect(x0, y0, w, h);
    } else if (targetTint.has(cell.id)) {
      ctx.fillStyle = targetTint.get(cell.id)! + '33';
      ctx.fillRect(x0, y0, w, h);
    }
    if (trapCells.has(cell.id)) {
      hatch(ctx, x0, y0, w, h);
    }
    ctx.strokeStyle = '#ccc';
    ctx.strokeRect(x0, y0, w, h);
    ctx.fillStyle = '#999';
    ctx.font = '10px sans-serif';
    ctx.fillText(`R${cell.id}`, x0 + 3, y0 + 11);
    if (cell.labels.length) {
      ctx.fillStyle = '#555';
      ctx.fillText(cell.labels.join(','), x0 + 3, y0 + h - 4);
    }
  }
}

function hatch(
  ctx: CanvasRenderingContext2D,
  x: number,
  y: number,
  w: number,
  h: number,
): void {
  ctx.save();
  ctx.beginPath();
  ctx.rect(x, y, w, h);
  ctx.clip();
  ctx.strokeStyle = '#c0392b88';
  for (let off = -h; off < w; off += 7) {
    ctx.beginPath();
    ctx.moveTo(x + off, y + h);
    ctx.lineTo(x + off + h, y);
    ctx.stroke();
  }
  ctx.restore();
}

function drawTrails(view: ViewModel, ctx: CanvasRenderingContext2D, map: Mapper): void {
  for (const [id, trail] of view.trails) {
    if (trail.length < 2) continue;
    for (let i = 1; i < trail.length; i++) {
      const alpha = i / trail.length;
      ctx.strokeStyle =
        robotColor(id) + Math.floor(alpha * 200 + 30).toString(16).padStart(2, '0');
      ctx.beginPath();
      const [ax, ay] = map.toPx(trail[i - 1].x, trail[i - 1].y);
      const [bx, by] = map.toPx(trail[i].x, trail[i].y);
      ctx.moveTo(ax, ay);
      ctx.lineTo(bx, by);
      ctx.stroke();
    }
  }
}

function drawObstacles(view: ViewModel, ctx: CanvasRenderingContext2D, map: Mapper): void {
  if (!view.state || !view.scenario) return;
  const radii = new Map(view.scenario.obstacles.map((o) => [o.id, o.radius]));
  for (const ob of view.state.obstacles) {
    const [x, y] = map.toPx(ob.x, ob.y);
    const r = (radii.get(ob.id) ?? 0.3) * map.scale;
    ctx.fillStyle = '#333';
    ctx.beginPath();
    ctx.arc(x, y, r, 0, 2 * Math.PI);
    ctx.fill();
  }
}

function drawRobots(view: ViewModel, ctx: CanvasRenderingContext2D, map: Mapper): void {
  if (!view.state || !view.scenario) return;
  const info = new Map(view.scenario.robots.map((r) => [r.id, r]));
  for (const robot of view.state.robots) {
    const spec = info.get(robot.id);
    const [x, y] = map.toPx(robot.x, robot.y);
    const color = robotColor(robot.id);

    if (spec) {
      ctx.strokeStyle = color + '55';
      ctx.beginPath();
      ctx.arc(x, y, spec.sensing_radius * map.scale, 0, 2 * Math.PI);
      ctx.stroke();
    }

    const size = (spec ? spec.footprint : 0.3) * map.scale;
    const th = robot.theta;
    ctx.fillStyle = color;
    ctx.beginPath();
    const tip = [x + size * Math.cos(th), y - size * Math.sin(th)];
    const left = [
      x + size * 0.7 * Math.cos(th + 2.5),
      y - size * 0.7 * Math.sin(th + 2.5),
    ];
    const right = [
      x + size * 0.7 * Math.cos(th - 2.5),
      y - size * 0.7 * Math.sin(th - 2.5),
    ];
    ctx.moveTo(tip[0], tip[1]);
    ctx.lineTo(left[0], left[1]);
    ctx.lineTo(right[0], right[1]);
    ctx.closePath();
    ctx.fill();
    if (robot.id === view.selected) {
      ctx.strokeStyle = '#000';
      ctx.stroke();
    }
    ctx.fillStyle = '#000';
    ctx.font = '11px sans-serif';
    ctx.fillText(String(robot.id), x + 6, y - 6);
  }
}

function drawGauges(view: ViewModel, ctx: CanvasRenderingContext2D): void {
  if (!view.state) return;
  let yOff = 16;
  for (const robot of view.state.robots) {
    const label = `robot ${robot.id}  ${robot.buchi_progress.phase} ` +
      `cycles=${robot.buchi_progress.cycles}`;
    ctx.fillStyle = '#333';
    ctx.font = '11px sans-serif';
    ctx.fillText(label, 8, yOff);
    const gaugeX = 190;
    const gaugeW = 70;
    ctx.strokeStyle = '#666';
    ctx.strokeRect(gaugeX, yOff - 9, gaugeW, 10);
    if (robot.kappa !== null) {
      // 0 = human input fully suppressed
      ctx.fillStyle = robot.kappa === 0 ? '#c0392b' : robotColor(robot.id);
      ctx.fillRect(gaugeX, yOff - 9, gaugeW * robot.kappa, 10);
      if (robot.kappa === 0) {
        ctx.strokeStyle = '#c0392b';
        ctx.strokeRect(gaugeX - 2, yOff - 11, gaugeW + 4, 14);
      }
    } else {
      ctx.fillStyle = '#bbb';
      ctx.fillText('-', gaugeX + gaugeW / 2 - 2, yOff);
    }
    yOff += 16;
  }
}
