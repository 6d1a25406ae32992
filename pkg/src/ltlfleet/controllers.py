"""Per-robot control stacks.

Every robot follows its discrete plan with a turn-then-drive proportional
law.  On top of that, `comm` robots resolve detected conflicts with the
sampling-based local replanner, while `nocomm` (and human-involved) robots
switch to the shooting MPC whenever anything enters their sensing disc.
"""

from __future__ import annotations

import math
from collections import deque

import numpy as np

from . import mpc, product, replanner
from .kernels import point_clearance, segment_clearance

K_HEADING = 1.5  # rad/s per rad of heading error
K_SPEED = 1.2  # m/s per meter of distance
STALL_ABORT_TICKS = 20  # drop a detour that cannot advance for this long


def plan_follow_control(x, y, th, tx, ty, v_max, w_max):
    """Drive toward a waypoint; reverses when the target is behind."""
    dist = math.hypot(tx - x, ty - y)
    if dist < 1e-9:
        return 0.0, 0.0
    err = math.remainder(math.atan2(ty - y, tx - x) - th, 2.0 * math.pi)
    direction = 1.0
    if abs(err) > math.pi / 2.0:
        direction = -1.0
        err = math.remainder(err - math.pi, 2.0 * math.pi)
    w = min(w_max, max(-w_max, K_HEADING * err))
    v = direction * min(v_max, K_SPEED * dist) * math.exp(-((err / 0.4) ** 2))
    v = min(v_max, max(-v_max, v))
    return v, w


class CommStrategy:
    """Conflict resolution through broadcast trajectories and local trees."""

    def __init__(self):
        self.replan_attempts = 0
        self.yield_streak = 0

    def compute(self, sim, agent, snapshot, conflicts):
        events = []
        trigger = False
        conflict_partners = []
        if conflicts:
            cluster = replanner.assign_priorities(conflicts)
            if agent.id != cluster[0] and not agent.detour:
                trigger = True
                conflict_partners = [
                    r for r in cluster if r != agent.id and r < agent.id
                ]
        if not trigger and not agent.detour and snapshot.obstacles:
            if self._obstacle_blocks_path(sim, agent, snapshot):
                trigger = True

        if trigger:
            events.append("replan_start")
            ok = self._replan(sim, agent, snapshot, conflicts, conflict_partners)
            if ok:
                events.append("replan_done")
            else:
                events.append("infeasible")
                return (0.0, 0.0), events

        if agent.detour:
            # peek: a braked step is retried next tick, not consumed
            u = agent.detour[0]
            if sim._proximity_brake(agent, snapshot, u) != u:
                self.yield_streak += 1
                if self.yield_streak >= STALL_ABORT_TICKS:
                    # detour cannot advance; drop it and let the next
                    # conflict tick trigger a fresh replan
                    agent.detour.clear()
                    agent.pending_plan = None
                    self.yield_streak = 0
                return (0.0, 0.0), events
            self.yield_streak = 0
            agent.detour.popleft()
            return u, events

        target = sim.workspace.region(mpc.select_goal(agent.plan, agent.progress)).center
        u = plan_follow_control(
            agent.x, agent.y, agent.theta, target[0], target[1],
            agent.spec.v_max, agent.spec.w_max,
        )
        return u, events

    def _obstacle_blocks_path(self, sim, agent, snapshot):
        mine = sim.broadcasts.get(agent.id)
        if mine is None or len(mine.points) < 2:
            return False
        discs = [(x, y, rad) for (_, x, y, rad) in snapshot.obstacles]
        limit = agent.spec.footprint + 0.15
        pts = [(p[1], p[2]) for p in mine.points]
        for (ax, ay), (bx, by) in zip(pts, pts[1:]):
            if segment_clearance(ax, ay, bx, by, [], discs) < limit:
                return True
        return False

    def _replan(self, sim, agent, snapshot, conflicts, partners):
        # block exactly the regions in conflict with higher-priority robots,
        # except cells the robot is already touching (no tree could leave
        # the root otherwise)
        my_region = sim.workspace.region_of(agent.x, agent.y).id
        conflict_regions = {
            rec.region
            for rec in conflicts
            if rec.robot_b is not None and rec.robot_b < agent.id
        }
        conflict_regions.discard(my_region)
        conflict_regions = {
            rid
            for rid in conflict_regions
            if point_clearance(agent.x, agent.y, [sim.workspace.region(rid).bounds], [])
            > agent.spec.footprint
        }

        discs = [(x, y, rad) for (_, x, y, rad) in snapshot.obstacles]
        entities = [(x, y) for (_, x, y, _th, _fp) in snapshot.robots]
        entities += [(x, y) for (_, x, y, _rad) in snapshot.obstacles]
        self.replan_attempts += 1
        rng = np.random.default_rng(
            [sim.seed, 1, agent.id, self.replan_attempts]
        )
        result = replanner.local_trajectory_generation(
            (agent.x, agent.y, agent.theta),
            agent.buchi,
            agent.pba,
            agent.potential,
            sim.workspace,
            conflict_regions,
            discs,
            entities,
            sim.scenario.replan,
            rng,
            agent.spec.sensing_radius,
            agent.spec.footprint,
            sim.scenario.dt,
            agent.spec.v_max,
            agent.spec.w_max,
        )
        if result is None:
            return False
        tree, leaf = result
        if sim.collect_trees:
            sim.tree_dumps.append(
                {
                    "tick": sim.tick,
                    "robot": agent.id,
                    "leaf": leaf,
                    "nodes": [
                        {
                            "state": list(node.state),
                            "parent": node.parent,
                            "input": list(node.input) if node.input else None,
                        }
                        for node in tree.nodes
                    ],
                }
            )
        chain = tree.path_to(leaf)
        leaf_node = chain[-1]
        leaf_region = sim.workspace.region_of(leaf_node.state[0], leaf_node.state[1]).id
        try:
            new_plan = replanner.global_replan(leaf_region, leaf_node.buchi, agent.pba)
        except product.InfeasibleTaskError:
            return False
        n_sub = max(1, round(sim.scenario.replan.tau_s / sim.scenario.dt))
        agent.detour = deque()
        for node in chain[1:]:
            for _ in range(n_sub):
                agent.detour.append(node.input)
        agent.pending_plan = new_plan
        sim.refresh_broadcast(agent)
        return True


class NocommStrategy:
    """Plan following with reactive MPC whenever anything is sensed."""

    STAGNATION_TICKS = 80  # no region progress for this long triggers a retreat
    RETREAT_TICKS = 40

    def __init__(self):
        self.episode_active = False
        self.last_region = None
        self.same_region_ticks = 0
        self.retreat_until = -1

    def _goal_region(self, sim, agent, snapshot):
        # mutual blocking has no arbiter without communication: when stuck
        # next to a lower-id robot, back off one plan step for a while so
        # the other side can pass
        if self.last_region != agent.region.id:
            self.last_region = agent.region.id
            self.same_region_ticks = 0
        else:
            self.same_region_ticks += 1
        blocked_by_senior = any(rid < agent.id for rid, *_ in snapshot.robots)
        if (
            sim.tick > self.retreat_until
            and blocked_by_senior
            and self.same_region_ticks > self.STAGNATION_TICKS
        ):
            self.retreat_until = sim.tick + self.RETREAT_TICKS
            self.same_region_ticks = 0
        if sim.tick <= self.retreat_until:
            return agent.plan.state_at(max(0, agent.progress - 1))[0]
        return mpc.select_goal(agent.plan, agent.progress)

    def compute(self, sim, agent, snapshot, conflicts):
        del conflicts  # no communication: broadcast conflicts are invisible
        events = []
        goal_rid = self._goal_region(sim, agent, snapshot)
        sensed = bool(snapshot.robots) or bool(snapshot.obstacles)
        if not sensed:
            self.episode_active = False
            target = sim.workspace.region(goal_rid).center
            u = plan_follow_control(
                agent.x, agent.y, agent.theta, target[0], target[1],
                agent.spec.v_max, agent.spec.w_max,
            )
            return u, events

        if not self.episode_active:
            self.episode_active = True
            events.append("replan_start")

        region = sim.workspace.region(goal_rid)
        discs = [(x, y, rad) for (_, x, y, rad) in snapshot.obstacles]
        discs += [(x, y, fp) for (_, x, y, _th, fp) in snapshot.robots]
        prob = mpc.MpcProblem(
            state=(agent.x, agent.y, agent.theta),
            goal_center=region.center,
            goal_rect=region.bounds,
            obstacle_rects=tuple(sim.workspace.obstacle_rects()),
            obstacle_discs=tuple(discs),
            trap_rects=tuple(sim.trap_rects(agent)),
            bounds=(0.0, 0.0, sim.workspace.width, sim.workspace.height),
            footprint=agent.spec.footprint,
            v_max=agent.spec.v_max,
            w_max=agent.spec.w_max,
        )
        solution = mpc.solve_mpc(
            prob, sim.scenario.mpc, [sim.seed, 2, agent.id, sim.tick]
        )
        if solution is None:
            events.append("infeasible")
            return (0.0, 0.0), events
        u = (float(solution.inputs[0, 0]), float(solution.inputs[0, 1]))
        return u, events


def make_strategy(mode):
    if mode == "comm":
        return CommStrategy()
    return NocommStrategy()  # nocomm and hil share the autonomous stack
