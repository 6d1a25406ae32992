"""Tick-stamped execution records: CSV writing, reading and summaries.

Columns: tick,time_s,entity_id,kind,x,y,theta,v,w,kappa,event with
kind in {robot, obstacle}.  Numeric fields are fixed to six decimals so a
log is byte-stable; empty cells mean "not applicable this tick".  Multiple
events in one tick are joined with ';'.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

HEADER = ["tick", "time_s", "entity_id", "kind", "x", "y", "theta", "v", "w", "kappa", "event"]


def _num(value):
    if value is None:
        return ""
    return f"{value:.6f}"


@dataclass
class TraceRow:
    tick: int
    time_s: float
    entity_id: str
    kind: str
    x: float
    y: float
    theta: float | None = None
    v: float | None = None
    w: float | None = None
    kappa: float | None = None
    events: tuple = ()


def write_tracelog(rows, path):
    with open(path, "w", newline="") as handle:
        _write(rows, handle)


def render_tracelog(rows):
    buf = io.StringIO()
    _write(rows, buf)
    return buf.getvalue()


def _write(rows, handle):
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(HEADER)
    for r in rows:
        writer.writerow(
            [
                r.tick,
                _num(r.time_s),
                r.entity_id,
                r.kind,
                _num(r.x),
                _num(r.y),
                _num(r.theta),
                _num(r.v),
                _num(r.w),
                _num(r.kappa),
                ";".join(r.events),
            ]
        )


def read_tracelog(path):
    rows = []
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        if header[:4] != HEADER[:4]:
            raise ValueError(f"{path}: not a trace log")
        has_kappa = "kappa" in header
        for rec in reader:
            vals = dict(zip(header, rec))
            rows.append(
                TraceRow(
                    tick=int(vals["tick"]),
                    time_s=float(vals["time_s"]),
                    entity_id=vals["entity_id"],
                    kind=vals["kind"],
                    x=float(vals["x"]) if vals["x"] else math.nan,
                    y=float(vals["y"]) if vals["y"] else math.nan,
                    theta=float(vals["theta"]) if vals["theta"] else None,
                    v=float(vals["v"]) if vals["v"] else None,
                    w=float(vals["w"]) if vals["w"] else None,
                    kappa=float(vals["kappa"]) if has_kappa and vals["kappa"] else None,
                    events=tuple(e for e in vals["event"].split(";") if e),
                )
            )
    return rows


@dataclass
class Summary:
    ticks: int = 0
    robots: dict = field(default_factory=dict)
    conflicts: int = 0
    replans: int = 0
    collisions: int = 0
    infeasible_events: int = 0
    boundary_clamps: int = 0
    min_inter_robot_distance: float | None = None
    min_robot_obstacle_distance: float | None = None
    max_abs_v: float = 0.0
    max_abs_w: float = 0.0

    def to_dict(self):
        out = {
            "ticks": self.ticks,
            "conflicts": self.conflicts,
            "replans": self.replans,
            "collisions": self.collisions,
            "infeasible_events": self.infeasible_events,
            "boundary_clamps": self.boundary_clamps,
            "min_inter_robot_distance": self.min_inter_robot_distance,
            "min_robot_obstacle_distance": self.min_robot_obstacle_distance,
            "max_abs_v": self.max_abs_v,
            "max_abs_w": self.max_abs_w,
            "robots": {str(k): v for k, v in sorted(self.robots.items())},
        }
        return out


def _round6(value):
    return None if value is None else round(value, 6)


def compute_summary(rows):
    """Re-derive run statistics from trace rows alone."""
    summary = Summary()
    by_tick = {}
    for r in rows:
        summary.ticks = max(summary.ticks, r.tick)
        by_tick.setdefault(r.tick, []).append(r)
        if r.kind == "robot":
            rid = r.entity_id
            st = summary.robots.setdefault(
                rid,
                {
                    "suffix_cycles": 0,
                    "conflicts": 0,
                    "replans": 0,
                    "replans_done": 0,
                    "infeasible": 0,
                    "collisions": 0,
                    "regions_entered": {},
                },
            )
            for ev in r.events:
                if ev == "suffix_cycle":
                    st["suffix_cycles"] += 1
                elif ev == "conflict":
                    st["conflicts"] += 1
                    summary.conflicts += 1
                elif ev == "replan_start":
                    st["replans"] += 1
                    summary.replans += 1
                elif ev == "replan_done":
                    st["replans_done"] += 1
                elif ev == "infeasible":
                    st["infeasible"] += 1
                    summary.infeasible_events += 1
                elif ev == "collision":
                    st["collisions"] += 1
                    summary.collisions += 1
                elif ev == "boundary_clamp":
                    summary.boundary_clamps += 1
                elif ev.startswith("region_enter:"):
                    rid2 = ev.split(":", 1)[1]
                    st["regions_entered"][rid2] = st["regions_entered"].get(rid2, 0) + 1
            if r.v is not None:
                summary.max_abs_v = max(summary.max_abs_v, abs(r.v))
            if r.w is not None:
                summary.max_abs_w = max(summary.max_abs_w, abs(r.w))

    for tick_rows in by_tick.values():
        robots = [r for r in tick_rows if r.kind == "robot"]
        obstacles = [r for r in tick_rows if r.kind == "obstacle"]
        for i, a in enumerate(robots):
            for b in robots[i + 1 :]:
                d = math.hypot(a.x - b.x, a.y - b.y)
                if (
                    summary.min_inter_robot_distance is None
                    or d < summary.min_inter_robot_distance
                ):
                    summary.min_inter_robot_distance = d
            for o in obstacles:
                d = math.hypot(a.x - o.x, a.y - o.y)
                if (
                    summary.min_robot_obstacle_distance is None
                    or d < summary.min_robot_obstacle_distance
                ):
                    summary.min_robot_obstacle_distance = d
    summary.min_inter_robot_distance = _round6(summary.min_inter_robot_distance)
    summary.min_robot_obstacle_distance = _round6(summary.min_robot_obstacle_distance)
    return summary


def write_summary(summary, extra, path):
    payload = {"stats": summary.to_dict()}
    payload.update(extra)
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")
