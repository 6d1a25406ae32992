"""Scenario files: world geometry, robots, moving obstacles, parameters.

Scenarios are JSON documents with top-level keys `workspace`, `robots`,
`obstacles`, `params`, `seed` and `ticks`; see scenarios/ for the shipped
fixtures.  Loading validates all cross references (labels, formula
propositions, poses) before anything runs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from . import ltl
from .mic import MicParams
from .mpc import MpcParams
from .replanner import ReplanParams
from .workspace import Workspace

MODES = ("comm", "nocomm", "hil")


class ScenarioError(Exception):
    pass


@dataclass
class RobotSpec:
    id: int
    start: tuple  # (x, y, theta)
    formula: str
    mode: str = "comm"
    sensing_radius: float = 0.8
    footprint: float = 0.3
    v_max: float = 0.35
    w_max: float = 0.35


@dataclass
class ObstacleSpec:
    id: str
    radius: float
    waypoints: list = field(default_factory=list)  # [(t, x, y), ...]
    random_walk: dict | None = None  # {"speed": m/s} for seeded walkers


@dataclass
class Scenario:
    name: str
    workspace: Workspace
    robots: list
    obstacles: list
    replan: ReplanParams
    mpc: MpcParams
    mic: MicParams
    dt: float = 0.1
    seed: int = 0
    ticks: int = 1000
    connectivity: int = 4

    def proposition_table(self):
        props = sorted(
            {p for reg in self.workspace.regions for p in reg.labels}
        )
        return ltl.PropositionTable(props)


def _require(cond, message):
    if not cond:
        raise ScenarioError(message)


def scenario_from_dict(data, name="scenario"):
    try:
        ws_cfg = data["workspace"]
        workspace = Workspace(
            width=ws_cfg["width"],
            height=ws_cfg["height"],
            cols=ws_cfg["cols"],
            rows=ws_cfg["rows"],
            labels={k: list(v) for k, v in ws_cfg.get("labels", {}).items()},
            static_obstacles=ws_cfg.get("static_obstacles", ()),
        )
    except KeyError as exc:
        raise ScenarioError(f"workspace section missing key {exc}") from None

    params = data.get("params", {})
    replan = ReplanParams(**params.get("replan", {}))
    mpc = MpcParams(**{k: tuple(v) if isinstance(v, list) else v
                       for k, v in params.get("mpc", {}).items()})
    mic = MicParams(**params.get("mic", {}))
    dt = params.get("dt", 0.1)

    scenario = Scenario(
        name=data.get("name", name),
        workspace=workspace,
        robots=[],
        obstacles=[],
        replan=replan,
        mpc=mpc,
        mic=mic,
        dt=dt,
        seed=int(data.get("seed", 0)),
        ticks=int(data.get("ticks", 1000)),
        connectivity=int(ws_cfg.get("connectivity", 4)),
    )

    table = scenario.proposition_table()
    seen_ids = set()
    for rcfg in data.get("robots", []):
        try:
            robot = RobotSpec(
                id=int(rcfg["id"]),
                start=tuple(float(v) for v in rcfg["start"]),
                formula=rcfg["formula"],
                mode=rcfg.get("mode", "comm"),
                sensing_radius=float(rcfg.get("sensing_radius", 0.8)),
                footprint=float(rcfg.get("footprint", 0.3)),
                v_max=float(rcfg.get("v_max", 0.35)),
                w_max=float(rcfg.get("w_max", 0.35)),
            )
        except KeyError as exc:
            raise ScenarioError(f"robot entry missing key {exc}") from None
        _require(robot.id not in seen_ids, f"duplicate robot id {robot.id}")
        seen_ids.add(robot.id)
        _require(robot.mode in MODES, f"robot {robot.id}: unknown mode {robot.mode!r}")
        _require(len(robot.start) == 3, f"robot {robot.id}: start must be (x, y, theta)")
        x, y, _ = robot.start
        _require(
            workspace.in_bounds(x, y), f"robot {robot.id}: start pose out of bounds"
        )
        start_region = workspace.region_of(x, y)
        _require(
            start_region.id not in workspace.static_obstacles,
            f"robot {robot.id}: start pose inside obstacle R{start_region.id}",
        )
        try:
            ltl.parse(robot.formula, table)
        except ltl.UnknownPropositionError as exc:
            raise ScenarioError(
                f"robot {robot.id}: formula references undeclared label: {exc}"
            ) from None
        except ltl.LtlSyntaxError as exc:
            raise ScenarioError(f"robot {robot.id}: bad formula: {exc}") from None
        scenario.robots.append(robot)

    for a in scenario.robots:
        for b in scenario.robots:
            if a.id < b.id:
                d = math.hypot(a.start[0] - b.start[0], a.start[1] - b.start[1])
                _require(
                    d >= a.footprint + b.footprint,
                    f"robots {a.id} and {b.id} start in collision",
                )

    for ocfg in data.get("obstacles", []):
        obstacle = ObstacleSpec(
            id=str(ocfg["id"]),
            radius=float(ocfg.get("radius", 0.3)),
            waypoints=[tuple(map(float, wp)) for wp in ocfg.get("waypoints", [])],
            random_walk=ocfg.get("random_walk"),
        )
        _require(
            bool(obstacle.waypoints) != bool(obstacle.random_walk),
            f"obstacle {obstacle.id}: give either waypoints or random_walk",
        )
        times = [wp[0] for wp in obstacle.waypoints]
        _require(
            all(t1 < t2 for t1, t2 in zip(times, times[1:])),
            f"obstacle {obstacle.id}: waypoint times must increase",
        )
        for _, x, y in obstacle.waypoints:
            _require(
                workspace.in_bounds(x, y),
                f"obstacle {obstacle.id}: waypoint out of bounds",
            )
        scenario.obstacles.append(obstacle)

    _require(scenario.dt > 0, "dt must be positive")
    _require(scenario.ticks >= 0, "ticks must be nonnegative")
    _require(scenario.connectivity in (4, 8), "connectivity must be 4 or 8")
    return scenario


def load_scenario(path):
    with open(path) as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path}: invalid JSON at line {exc.lineno}") from None
    return scenario_from_dict(data, name=str(path))
