"""Live session host: streams simulation state over a websocket and feeds
human takeover/input frames into the mixed-initiative controllers.

One asyncio task owns the simulator; socket handlers only append to queues
that are drained at tick boundaries, so a served run with a given input
sequence is reproducible headless by replaying the recorded script.
"""

from __future__ import annotations

import asyncio
import json
from contextlib import asynccontextmanager

import uvicorn
from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from . import runner, tracelog
from .simulation import Simulator
from .mic import HumanInput


class Session:
    def __init__(self, scenario, seed, log_path, inputs_path):
        self.sim = Simulator(scenario, seed=seed)
        self.scenario = scenario
        self.running = False
        self.step_requests = 0
        self.finished = False
        self.rows = self.sim.initial_rows()
        self.log_path = log_path
        self.inputs_path = inputs_path
        self.clients = {}  # websocket -> set of robot ids taken over
        self.takeover_owner = {}  # robot id -> websocket
        self.recorded_inputs = []
        self.open_windows = {}  # robot id -> start tick
        self.closed_windows = []
        self.accepted_input_count = 0

    # -- message handling (called from socket tasks) -----------------------

    def handle_control(self, cmd):
        if cmd == "pause":
            self.running = False
        elif cmd == "resume":
            self.running = True
        elif cmd == "step":
            self.step_requests += 1
        else:
            raise ValueError(f"unknown control command {cmd!r}")

    def handle_takeover(self, ws, robot):
        agent = self._agent(robot)
        owner = self.takeover_owner.get(robot)
        if owner is not None and owner is not ws:
            raise ValueError(f"robot {robot} already taken over")
        self.takeover_owner[robot] = ws
        self.clients.setdefault(ws, set()).add(robot)
        agent.taken_over = True
        if robot not in self.open_windows:
            self.open_windows[robot] = self.sim.tick + 1

    def handle_release(self, ws, robot):
        if self.takeover_owner.get(robot) is not ws:
            raise ValueError(f"robot {robot} not taken over by this client")
        self._release(robot)

    def _release(self, robot):
        agent = self._agent(robot)
        agent.taken_over = False
        ws = self.takeover_owner.pop(robot, None)
        if ws is not None and robot in self.clients.get(ws, ()):
            self.clients[ws].discard(robot)
        start = self.open_windows.pop(robot, None)
        if start is not None and self.sim.tick >= start:
            self.closed_windows.append((robot, start, self.sim.tick))

    def handle_input(self, ws, robot, v, w):
        if self.takeover_owner.get(robot) is not ws:
            raise ValueError(f"robot {robot} not taken over by this client")
        tick = self.sim.tick + 1  # applied at the next boundary
        agent = self._agent(robot)
        agent.last_human = HumanInput(robot, float(v), float(w), tick)
        self.recorded_inputs.append(
            {"tick": tick, "robot": robot, "v": float(v), "w": float(w)}
        )
        self.accepted_input_count += 1

    def drop_client(self, ws):
        for robot in sorted(self.clients.pop(ws, set())):
            self._release(robot)

    def _agent(self, robot):
        for agent in self.sim.agents:
            if agent.id == robot:
                return agent
        raise ValueError(f"unknown robot {robot}")

    # -- frames -------------------------------------------------------------

    def scenario_frame(self):
        ws = self.scenario.workspace
        cells = [
            {
                "id": reg.id,
                "x0": reg.bounds[0],
                "y0": reg.bounds[1],
                "x1": reg.bounds[2],
                "y1": reg.bounds[3],
                "labels": sorted(reg.labels),
            }
            for reg in ws.regions
        ]
        robots = []
        for agent in self.sim.agents:
            pre, cyc = agent.plan.region_trace()
            robots.append(
                {
                    "id": agent.id,
                    "mode": agent.mode,
                    "formula": agent.spec.formula,
                    "footprint": agent.spec.footprint,
                    "sensing_radius": agent.spec.sensing_radius,
                    "v_max": agent.spec.v_max,
                    "w_max": agent.spec.w_max,
                    "plan_prefix": pre,
                    "plan_cycle": cyc,
                    "trap_regions": self._initial_traps(agent),
                }
            )
        return {
            "type": "scenario",
            "name": self.scenario.name,
            "workspace": {
                "width": ws.width,
                "height": ws.height,
                "cols": ws.cols,
                "rows": ws.rows,
                "cells": cells,
                "static_obstacles": sorted(ws.static_obstacles),
            },
            "robots": robots,
            "obstacles": [
                {"id": ob.id, "radius": ob.radius} for ob in self.sim.obstacles
            ],
        }

    def _initial_traps(self, agent):
        from .product import trap_regions

        return trap_regions(agent.pba, agent.buchi)

    def state_frame(self, tick_rows):
        robots = []
        applied = {r.entity_id: r for r in tick_rows if r.kind == "robot"}
        events = []
        for r in tick_rows:
            events.extend(r.events)
        for agent in self.sim.agents:
            row = applied.get(str(agent.id))
            plan = agent.plan
            phase = "prefix" if agent.progress < len(plan.prefix) else "suffix"
            robots.append(
                {
                    "id": agent.id,
                    "x": agent.x,
                    "y": agent.y,
                    "theta": agent.theta,
                    "v": row.v if row else 0.0,
                    "w": row.w if row else 0.0,
                    "kappa": agent.last_kappa,
                    "mode": agent.mode,
                    "taken_over": agent.taken_over,
                    "buchi_progress": {
                        "phase": phase,
                        "index": agent.progress,
                        "cycles": agent.suffix_cycles,
                    },
                }
            )
        return {
            "type": "state",
            "tick": self.sim.tick,
            "time": round(self.sim.tick * self.sim.dt, 6),
            "running": self.running,
            "robots": robots,
            "obstacles": [
                {"id": ob.id, "x": ob.x, "y": ob.y} for ob in self.sim.obstacles
            ],
            "events": events,
        }

    # -- lifecycle ----------------------------------------------------------

    def advance(self):
        tick_rows = self.sim.step()
        self.rows.extend(tick_rows)
        if self.sim.tick >= self.scenario.ticks:
            self.finish()
        return tick_rows

    def finish(self):
        if self.finished:
            return
        self.finished = True
        self.running = False
        for robot in sorted(list(self.open_windows)):
            start = self.open_windows.pop(robot)
            if self.sim.tick >= start:
                self.closed_windows.append((robot, start, self.sim.tick))
        if self.log_path:
            tracelog.write_tracelog(self.rows, self.log_path)
        if self.inputs_path:
            script = {
                "takeovers": [
                    {"robot": r, "start": s, "end": e}
                    for r, s, e in sorted(self.closed_windows)
                ],
                "inputs": self.recorded_inputs,
                "accepted": self.accepted_input_count,
            }
            runner.write_human_script(script, self.inputs_path)


def build_app(session, rate, once):
    sockets = set()
    server_ref = {}

    @asynccontextmanager
    async def lifespan(app):
        task = asyncio.create_task(tick_loop())
        yield
        task.cancel()

    app = FastAPI(lifespan=lifespan)

    async def tick_loop():
        period = 1.0 / rate if rate > 0 else 0.0
        while not session.finished:
            start = asyncio.get_event_loop().time()
            if session.running or session.step_requests > 0:
                if session.step_requests > 0:
                    session.step_requests -= 1
                tick_rows = session.advance()
                frame = json.dumps(session.state_frame(tick_rows))
                dead = []
                for ws in list(sockets):
                    try:
                        await ws.send_text(frame)
                    except Exception:
                        dead.append(ws)
                for ws in dead:
                    sockets.discard(ws)
                    session.drop_client(ws)
            elapsed = asyncio.get_event_loop().time() - start
            await asyncio.sleep(max(0.0, period - elapsed) if period else 0)
        if once and "server" in server_ref:
            server_ref["server"].should_exit = True

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        sockets.add(ws)
        session.clients.setdefault(ws, set())
        await ws.send_text(json.dumps(session.scenario_frame()))
        try:
            while True:
                text = await ws.receive_text()
                try:
                    msg = json.loads(text)
                    kind = msg.get("type")
                    if kind == "control":
                        session.handle_control(msg.get("cmd"))
                    elif kind == "takeover":
                        session.handle_takeover(ws, int(msg.get("robot")))
                    elif kind == "release":
                        session.handle_release(ws, int(msg.get("robot")))
                    elif kind == "input":
                        session.handle_input(
                            ws, int(msg.get("robot")), msg.get("v", 0.0), msg.get("w", 0.0)
                        )
                    else:
                        raise ValueError(f"unknown frame type {kind!r}")
                except Exception as exc:
                    await ws.send_text(json.dumps({"type": "error", "msg": str(exc)}))
        except WebSocketDisconnect:
            sockets.discard(ws)
            session.drop_client(ws)

    return app, server_ref


def serve(
    scenario,
    port=8710,
    host="127.0.0.1",
    seed=None,
    rate=10.0,
    log_path=None,
    inputs_path=None,
    once=False,
    autostart=False,
):
    session = Session(scenario, seed, log_path, inputs_path)
    session.running = bool(autostart)
    app, server_ref = build_app(session, rate, once)
    config = uvicorn.Config(app, host=host, port=port, log_level="warning")
    server = uvicorn.Server(config)
    server_ref["server"] = server
    server.run()
    session.finish()
