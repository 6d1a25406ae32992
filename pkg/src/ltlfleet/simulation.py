"""Deterministic tick-based world: unicycle integration, scripted obstacles,
range-limited sensing, trajectory broadcast and conflict detection.

The whole run is a pure function of (scenario, seed, human script): one tick
advances obstacles along their scripts, senses per robot, runs each robot's
controller in ascending id order (so lower ids have priority and their
same-tick broadcasts are visible downstream), mixes human input where a
takeover is active, saturates, integrates and logs.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import controllers, ltl, mic, product
from .buchi import translate
from .kernels import step_unicycle
from .product import InfeasibleTaskError
from .tracelog import TraceRow
from .workspace import build_cts


@dataclass
class MovingObstacle:
    id: str
    radius: float
    waypoints: list  # [(t, x, y), ...] strictly increasing t
    x: float = 0.0
    y: float = 0.0

    def position(self, t):
        wps = self.waypoints
        if t <= wps[0][0]:
            return wps[0][1], wps[0][2]
        for (t0, x0, y0), (t1, x1, y1) in zip(wps, wps[1:]):
            if t <= t1:
                a = (t - t0) / (t1 - t0)
                return x0 + a * (x1 - x0), y0 + a * (y1 - y0)
        return wps[-1][1], wps[-1][2]


@dataclass
class LocalTrajectory:
    """Broadcast future positions over [t, t + delta]; delta is the first
    exit from the sensing disc anchored at the current position (capped)."""

    owner: int
    points: list  # [(t, x, y), ...] at tick spacing


@dataclass(frozen=True)
class ConflictRecord:
    robot_a: int
    robot_b: int | None  # None when triggered by a moving obstacle
    region: int
    tick: int


@dataclass
class SensorSnapshot:
    observer: int
    robots: list = field(default_factory=list)  # (id, x, y, theta, footprint)
    obstacles: list = field(default_factory=list)  # (id, x, y, radius)
    trajectories: dict = field(default_factory=dict)  # id -> LocalTrajectory


def detect_conflicts(mine, neighbors, workspace, tick):
    """One record per (neighbor, region) whose local trajectories both cross
    that region."""
    my_cells = set(workspace.cells_of_polyline([(p[1], p[2]) for p in mine.points]))
    records = []
    for other in neighbors:
        cells = set(
            workspace.cells_of_polyline([(p[1], p[2]) for p in other.points])
        )
        for region in sorted(my_cells & cells):
            records.append(ConflictRecord(mine.owner, other.owner, region, tick))
    return records


class Agent:
    """Mutable per-robot execution state."""

    def __init__(self, spec, nba, pba, potential, plan, strategy, workspace):
        self.spec = spec
        self.id = spec.id
        self.x, self.y, self.theta = spec.start
        self.nba = nba
        self.pba = pba
        self.potential = potential
        self.plan = plan
        self.pending_plan = None
        self.progress = 0
        self.buchi = frozenset(nba.initial)
        self.region = workspace.region_of(self.x, self.y)
        self.suffix_cycles = 0
        self.strategy = strategy
        self.detour = deque()
        self.taken_over = False
        self.last_human = None
        self.last_kappa = None
        self.mode = spec.mode
        self._trap_cache = {}

    @property
    def mic_active(self):
        return self.mode == "hil" or self.taken_over


class Simulator:
    """Owns all world state; step() advances exactly one tick."""

    def __init__(self, scenario, seed=None, human_script=None, collect_trees=False):
        self.scenario = scenario
        self.seed = scenario.seed if seed is None else int(seed)
        self.workspace = scenario.workspace
        self.dt = scenario.dt
        self.tick = 0
        self.table = scenario.proposition_table()
        self.broadcasts = {}
        self.collect_trees = collect_trees
        self.tree_dumps = []
        self.agents = []
        for spec in sorted(scenario.robots, key=lambda r: r.id):
            formula = ltl.parse(spec.formula, self.table)
            nba = translate(ltl.to_nnf(formula))
            start_region = self.workspace.region_of(spec.start[0], spec.start[1]).id
            cts = build_cts(self.workspace, start_region, scenario.connectivity)
            pba = product.build_product(cts, nba)
            potential = product.compute_potential(pba)
            try:
                plan = product.find_plan(pba)
            except InfeasibleTaskError as exc:
                raise InfeasibleTaskError(
                    f"robot {spec.id}: task '{spec.formula}' is infeasible: {exc}"
                ) from None
            self.agents.append(
                Agent(
                    spec,
                    nba,
                    pba,
                    potential,
                    plan,
                    controllers.make_strategy(spec.mode),
                    self.workspace,
                )
            )
        self.agents.sort(key=lambda a: a.id)

        self.obstacles = []
        for idx, ospec in enumerate(scenario.obstacles):
            if ospec.random_walk:
                waypoints = self._random_walk_script(ospec, idx)
            else:
                waypoints = list(ospec.waypoints)
            ob = MovingObstacle(ospec.id, ospec.radius, waypoints)
            ob.x, ob.y = ob.position(0.0)
            self.obstacles.append(ob)

        self._staleness_ticks = max(1, round(scenario.mic.staleness_s / self.dt))
        script = human_script or {}
        self._takeover_windows = [
            (int(t["robot"]), int(t["start"]), int(t["end"]))
            for t in script.get("takeovers", [])
        ]
        self._script_inputs = {}
        for item in script.get("inputs", []):
            self._script_inputs.setdefault(int(item["tick"]), []).append(
                (int(item["robot"]), float(item["v"]), float(item["w"]))
            )

    def _random_walk_script(self, ospec, index):
        rng = np.random.default_rng([self.seed, 3, index])
        speed = float(ospec.random_walk.get("speed", 0.5))
        margin = ospec.radius
        horizon = self.scenario.ticks * self.dt
        t = 0.0
        x = rng.uniform(margin, self.workspace.width - margin)
        y = rng.uniform(margin, self.workspace.height - margin)
        waypoints = [(t, x, y)]
        while t < horizon:
            nx = rng.uniform(margin, self.workspace.width - margin)
            ny = rng.uniform(margin, self.workspace.height - margin)
            dist = math.hypot(nx - x, ny - y)
            if dist < 0.5:
                continue
            t += dist / speed
            waypoints.append((t, nx, ny))
            x, y = nx, ny
        return waypoints

    # -- sensing ----------------------------------------------------------

    def sense(self, agent, mode=None):
        """Entities within the sensing disc; in comm mode the broadcast
        trajectories of communicating neighbors ride along."""
        mode = agent.mode if mode is None else mode
        snap = SensorSnapshot(observer=agent.id)
        r = agent.spec.sensing_radius
        for other in self.agents:
            if other.id == agent.id:
                continue
            if math.hypot(other.x - agent.x, other.y - agent.y) <= r:
                snap.robots.append(
                    (other.id, other.x, other.y, other.theta, other.spec.footprint)
                )
                if mode == "comm" and other.mode == "comm":
                    traj = self.broadcasts.get(other.id)
                    if traj is not None:
                        snap.trajectories[other.id] = traj
        for ob in self.obstacles:
            if math.hypot(ob.x - agent.x, ob.y - agent.y) <= r:
                snap.obstacles.append((ob.id, ob.x, ob.y, ob.radius))
        return snap

    def trap_rects(self, agent):
        rects = agent._trap_cache.get(agent.buchi)
        if rects is None:
            regions = product.trap_regions(agent.pba, agent.buchi)
            rects = tuple(self.workspace.region(rid).bounds for rid in regions)
            agent._trap_cache[agent.buchi] = rects
        return rects

    # -- committed trajectory prediction ----------------------------------

    def predict_local(self, agent, cap_s=10.0):
        """Forward-simulate the agent's current intent (detour remainder,
        then plan following) until it exits the sensing disc."""
        x, y, th = agent.x, agent.y, agent.theta
        t = self.tick * self.dt
        points = [(t, x, y)]
        detour = list(agent.detour)
        plan = agent.pending_plan if agent.pending_plan is not None else agent.plan
        progress = 0 if agent.pending_plan is not None else agent.progress
        region = self.workspace.region_of(x, y)
        max_ticks = int(round(cap_s / self.dt))
        for k in range(max_ticks):
            if detour:
                v, w = detour.pop(0)
            else:
                target_rid = plan.state_at(progress + 1)[0]
                cx, cy = self.workspace.region(target_rid).center
                v, w = controllers.plan_follow_control(
                    x, y, th, cx, cy, agent.spec.v_max, agent.spec.w_max
                )
            x, y, th = step_unicycle(x, y, th, v, w, self.dt)
            x = min(max(x, 0.0), self.workspace.width)
            y = min(max(y, 0.0), self.workspace.height)
            t += self.dt
            points.append((t, x, y))
            new_region = self.workspace.region_of(x, y)
            if new_region.id != region.id:
                region = new_region
            if not detour and plan.state_at(progress + 1)[0] == region.id:
                progress += 1
            if math.hypot(x - points[0][1], y - points[0][2]) > agent.spec.sensing_radius:
                break
        return LocalTrajectory(agent.id, points)

    def refresh_broadcast(self, agent):
        if agent.mode == "comm":
            self.broadcasts[agent.id] = self.predict_local(agent)

    BRAKE_MARGIN = 0.05

    def _proximity_brake(self, agent, snapshot, u):
        """Last-resort stop: never step into the near-contact band around a
        sensed entity; holding distance or fleeing is always allowed."""
        if u == (0.0, 0.0):
            return u
        nx, ny, _ = step_unicycle(agent.x, agent.y, agent.theta, u[0], u[1], self.dt)
        for _rid, x, y, _th, fp in snapshot.robots:
            limit = agent.spec.footprint + fp + self.BRAKE_MARGIN
            d_next = math.hypot(x - nx, y - ny)
            if d_next < limit and d_next < math.hypot(x - agent.x, y - agent.y):
                return (0.0, 0.0)
        for _oid, x, y, rad in snapshot.obstacles:
            limit = agent.spec.footprint + rad + self.BRAKE_MARGIN
            d_next = math.hypot(x - nx, y - ny)
            if d_next < limit and d_next < math.hypot(x - agent.x, y - agent.y):
                return (0.0, 0.0)
        return u

    # -- the tick ----------------------------------------------------------

    def initial_rows(self):
        rows = []
        for agent in self.agents:
            rows.append(
                TraceRow(
                    0, 0.0, str(agent.id), "robot", agent.x, agent.y, agent.theta,
                    0.0, 0.0, None, (),
                )
            )
        for ob in self.obstacles:
            rows.append(TraceRow(0, 0.0, ob.id, "obstacle", ob.x, ob.y))
        return rows

    def step(self):
        self.tick += 1
        now = self.tick * self.dt
        for ob in self.obstacles:
            ob.x, ob.y = ob.position(now)

        if self._takeover_windows:
            for agent in self.agents:
                windows = [w for w in self._takeover_windows if w[0] == agent.id]
                if windows:
                    agent.taken_over = any(
                        start <= self.tick <= end for _, start, end in windows
                    )
        for robot, v, w in self._script_inputs.get(self.tick, []):
            for agent in self.agents:
                if agent.id == robot:
                    agent.last_human = mic.HumanInput(robot, v, w, self.tick)

        for agent in self.agents:
            self.refresh_broadcast(agent)

        # snapshots are frozen at tick start; controllers then run in
        # ascending id order (lower id = higher priority, and same-tick
        # replanned broadcasts stay visible downstream); integration happens
        # only after every controller has produced its input
        snapshots = {agent.id: self.sense(agent) for agent in self.agents}
        events = {agent.id: [] for agent in self.agents}
        applied = {}
        for agent in self.agents:
            snapshot = snapshots[agent.id]
            conflicts = []
            if agent.mode == "comm" and snapshot.trajectories:
                conflicts = detect_conflicts(
                    self.broadcasts[agent.id],
                    [snapshot.trajectories[j] for j in sorted(snapshot.trajectories)],
                    self.workspace,
                    self.tick,
                )
                if conflicts:
                    events[agent.id].append("conflict")
            u_r, ev = agent.strategy.compute(self, agent, snapshot, conflicts)
            events[agent.id].extend(ev)

            if agent.mic_active:
                kappa = mic.kappa(
                    agent.x,
                    agent.y,
                    self.workspace.obstacle_rects(),
                    [(ox, oy, orad) for (_, ox, oy, orad) in snapshot.obstacles],
                    self.trap_rects(agent),
                    self.scenario.mic,
                )
                agent.last_kappa = kappa
                u = mic.mix(
                    u_r,
                    agent.last_human if agent.taken_over else None,
                    kappa,
                    agent.spec.v_max,
                    agent.spec.w_max,
                    self.tick,
                    self._staleness_ticks,
                )
            else:
                agent.last_kappa = None
                v = min(agent.spec.v_max, max(-agent.spec.v_max, u_r[0]))
                w = min(agent.spec.w_max, max(-agent.spec.w_max, u_r[1]))
                u = (v, w)
            applied[agent.id] = self._proximity_brake(agent, snapshot, u)

        for agent in self.agents:
            u = applied[agent.id]
            x, y, th = step_unicycle(agent.x, agent.y, agent.theta, u[0], u[1], self.dt)
            cx = min(max(x, 0.0), self.workspace.width)
            cy = min(max(y, 0.0), self.workspace.height)
            if cx != x or cy != y:
                events[agent.id].append("boundary_clamp")
            agent.x, agent.y, agent.theta = cx, cy, th

            new_region = self.workspace.region_of(agent.x, agent.y)
            if new_region.id != agent.region.id:
                events[agent.id].append(f"region_enter:{new_region.id}")
                agent.buchi = product.track_buchi(
                    agent.nba, agent.buchi, new_region.labels
                )
                agent.region = new_region

            if agent.detour:
                pass  # plan progress frozen while the detour executes
            else:
                if agent.pending_plan is not None:
                    agent.plan = agent.pending_plan
                    agent.pending_plan = None
                    agent.progress = 0
                plan = agent.plan
                nxt = plan.state_at(agent.progress + 1)
                if nxt[0] == agent.region.id:
                    agent.progress += 1
                    anchor_pos = len(plan.prefix) - 1
                    cycle_len = len(plan.cycle)
                    if (
                        agent.progress > anchor_pos
                        and (agent.progress - anchor_pos) % cycle_len == 0
                    ):
                        agent.suffix_cycles += 1
                        events[agent.id].append("suffix_cycle")

        # collision pass on the updated positions
        for i, a in enumerate(self.agents):
            for b in self.agents[i + 1 :]:
                d = math.hypot(a.x - b.x, a.y - b.y)
                if d < a.spec.footprint + b.spec.footprint:
                    events[a.id].append("collision")
                    events[b.id].append("collision")
            for ob in self.obstacles:
                d = math.hypot(a.x - ob.x, a.y - ob.y)
                if d < a.spec.footprint + ob.radius:
                    events[a.id].append("collision")

        rows = []
        for agent in self.agents:
            v, w = applied[agent.id]
            rows.append(
                TraceRow(
                    self.tick,
                    now,
                    str(agent.id),
                    "robot",
                    agent.x,
                    agent.y,
                    agent.theta,
                    v,
                    w,
                    agent.last_kappa,
                    tuple(events[agent.id]),
                )
            )
        for ob in self.obstacles:
            rows.append(TraceRow(self.tick, now, ob.id, "obstacle", ob.x, ob.y))
        return rows

    def run(self, ticks=None):
        ticks = self.scenario.ticks if ticks is None else ticks
        rows = self.initial_rows()
        for _ in range(ticks):
            rows.extend(self.step())
        return rows
