import math

import numpy as np
import pytest

from ltlfleet.scenario import scenario_from_dict
from ltlfleet.simulation import (
    ConflictRecord,
    LocalTrajectory,
    MovingObstacle,
    Simulator,
    detect_conflicts,
)
from ltlfleet.tracelog import compute_summary, read_tracelog, render_tracelog, write_tracelog
from ltlfleet.workspace import Workspace


def base_scenario(robots, obstacles=(), ticks=100, seed=3, labels=None):
    return scenario_from_dict(
        {
            "workspace": {
                "width": 5.0,
                "height": 6.0,
                "cols": 5,
                "rows": 6,
                "labels": labels or {"R8": [8], "R20": [20], "R17": [17], "R21": [21]},
            },
            "robots": robots,
            "obstacles": list(obstacles),
            "params": {"dt": 0.1},
            "seed": seed,
            "ticks": ticks,
        }
    )


ROBOT0 = {
    "id": 0,
    "start": [0.5, 2.5, 0.0],
    "formula": "[] <> R8 && [] <> R20",
    "mode": "comm",
}
ROBOT1 = {
    "id": 1,
    "start": [4.5, 2.5, 3.141592653589793],
    "formula": "[] <> R17 && [] <> R21",
    "mode": "comm",
}


class TestMovingObstacle:
    def test_interpolation(self):
        ob = MovingObstacle("w", 0.3, [(0.0, 0.0, 0.0), (10.0, 1.0, 2.0)])
        assert ob.position(5.0) == (0.5, 1.0)

    def test_clamps_outside_script(self):
        ob = MovingObstacle("w", 0.3, [(1.0, 1.0, 1.0), (2.0, 3.0, 3.0)])
        assert ob.position(0.0) == (1.0, 1.0)
        assert ob.position(99.0) == (3.0, 3.0)


class TestSense:
    def test_inclusion_by_distance(self):
        near = dict(ROBOT1, start=[1.15, 2.5, 0.0])  # 0.65 m away
        sim = Simulator(base_scenario([ROBOT0, near]))
        snap = sim.sense(sim.agents[0])
        assert [r[0] for r in snap.robots] == [1]

    def test_exclusion_just_outside(self):
        far = dict(ROBOT1, start=[1.31, 2.5, 0.0])  # 0.81 m away
        sim = Simulator(base_scenario([ROBOT0, far]))
        snap = sim.sense(sim.agents[0])
        assert snap.robots == []

    def test_empty_world(self):
        sim = Simulator(base_scenario([ROBOT0]))
        snap = sim.sense(sim.agents[0])
        assert snap.robots == [] and snap.obstacles == []

    def test_comm_neighbors_attach_trajectories(self):
        near = dict(ROBOT1, start=[1.15, 2.5, 0.0])
        sim = Simulator(base_scenario([ROBOT0, near]))
        for agent in sim.agents:
            sim.refresh_broadcast(agent)
        snap = sim.sense(sim.agents[0])
        assert 1 in snap.trajectories
        assert snap.trajectories[1].points[0][0] == pytest.approx(0.0)

    def test_nocomm_has_positions_only(self):
        a = dict(ROBOT0, mode="nocomm")
        b = dict(ROBOT1, mode="nocomm", start=[1.15, 2.5, 0.0])
        sim = Simulator(base_scenario([a, b]))
        for agent in sim.agents:
            sim.refresh_broadcast(agent)
        snap = sim.sense(sim.agents[0])
        assert snap.trajectories == {}
        assert [r[0] for r in snap.robots] == [1]


class TestDetectConflicts:
    def setup_method(self):
        self.ws = Workspace(5, 6, 5, 6)

    def test_crossing_trajectories_share_cell(self):
        mine = LocalTrajectory(0, [(0, 0.2, 2.5), (0, 0.9, 2.5)])
        other = LocalTrajectory(1, [(0, 0.5, 2.2), (0, 0.5, 2.9)])
        recs = detect_conflicts(mine, [other], self.ws, tick=4)
        assert recs == [ConflictRecord(0, 1, 11, 4)]

    def test_disjoint_cells_no_conflict(self):
        mine = LocalTrajectory(0, [(0, 0.5, 0.5), (0, 0.9, 0.5)])
        other = LocalTrajectory(1, [(0, 4.5, 5.5), (0, 4.1, 5.5)])
        assert detect_conflicts(mine, [other], self.ws, tick=0) == []

    def test_symmetric(self):
        mine = LocalTrajectory(0, [(0, 1.5, 2.5), (0, 2.5, 2.5)])
        other = LocalTrajectory(1, [(0, 2.5, 1.8), (0, 2.5, 2.6)])
        a = detect_conflicts(mine, [other], self.ws, 0)
        b = detect_conflicts(other, [mine], self.ws, 0)
        assert {r.region for r in a} == {r.region for r in b}

    def test_matches_dense_rasterization(self):
        rng = np.random.default_rng(31)
        for _ in range(30):
            pts_a = [(0, *rng.uniform(0.05, 4.9, 2)) for _ in range(3)]
            pts_b = [(0, *rng.uniform(0.05, 4.9, 2)) for _ in range(3)]
            mine = LocalTrajectory(0, pts_a)
            other = LocalTrajectory(1, pts_b)
            recs = detect_conflicts(mine, [other], self.ws, 0)

            def raster(points):
                cells = set()
                for (t0, ax, ay), (t1, bx, by) in zip(points, points[1:]):
                    steps = max(2, int(math.hypot(bx - ax, by - ay) / 0.01))
                    for i in range(steps + 1):
                        t = i / steps
                        cells.add(
                            self.ws.region_of(ax + t * (bx - ax), ay + t * (by - ay)).id
                        )
                return cells

            want = raster(pts_a) & raster(pts_b)
            assert {r.region for r in recs} == want


class TestSimulate:
    def test_zero_robots_logs_only_obstacles(self):
        sc = base_scenario(
            [], obstacles=[{"id": "w", "radius": 0.3, "waypoints": [[0, 1, 1], [5, 2, 2]]}],
            ticks=10,
        )
        rows = Simulator(sc).run()
        assert rows and all(r.kind == "obstacle" for r in rows)

    def test_single_robot_reaches_goal(self):
        robot = {"id": 0, "start": [0.5, 0.5, 0.0], "formula": "<> R8", "mode": "comm"}
        sc = base_scenario([robot], ticks=300)
        sim = Simulator(sc)
        rows = sim.run()
        events = [e for r in rows for e in r.events]
        assert "region_enter:8" in events
        agent = sim.agents[0]
        assert agent.buchi & agent.nba.accepting

    def test_deterministic_trace(self):
        sc = base_scenario([ROBOT0, ROBOT1], ticks=200)
        text1 = render_tracelog(Simulator(sc, seed=5).run())
        text2 = render_tracelog(Simulator(sc, seed=5).run())
        assert text1 == text2

    def test_input_saturation(self):
        sc = base_scenario([ROBOT0, ROBOT1], ticks=300)
        rows = Simulator(sc).run()
        for r in rows:
            if r.kind == "robot" and r.v is not None:
                assert abs(r.v) <= 0.35 + 1e-12
                assert abs(r.w) <= 0.35 + 1e-12

    def test_states_stay_in_bounds(self):
        sc = base_scenario([ROBOT0, ROBOT1], ticks=300)
        rows = Simulator(sc).run()
        for r in rows:
            if r.kind == "robot":
                assert 0.0 <= r.x <= 5.0
                assert 0.0 <= r.y <= 6.0

    def test_controller_failure_dwells(self):
        # boxed-in robot: conflict everywhere is impossible to construct
        # cheaply here; instead verify the clamp path by driving into a wall
        robot = {"id": 0, "start": [4.9, 2.5, 0.0], "formula": "<> R20", "mode": "comm"}
        sc = base_scenario([robot], ticks=5)
        rows = Simulator(sc).run()
        assert all(r.x <= 5.0 for r in rows)


class TestTraceLogRoundTrip:
    def test_write_read_summary(self, tmp_path):
        sc = base_scenario([ROBOT0, ROBOT1], ticks=150)
        rows = Simulator(sc).run()
        path = tmp_path / "log.csv"
        write_tracelog(rows, path)
        back = read_tracelog(path)
        assert len(back) == len(rows)
        s1 = compute_summary(rows)
        # summary recomputed from the file matches except float rounding
        s2 = compute_summary(back)
        assert s1.ticks == s2.ticks
        assert s1.conflicts == s2.conflicts
        assert s1.replans == s2.replans
        assert {k: v["suffix_cycles"] for k, v in s1.robots.items()} == {
            k: v["suffix_cycles"] for k, v in s2.robots.items()
        }

    def test_header_format(self, tmp_path):
        sc = base_scenario([ROBOT0], ticks=2)
        path = tmp_path / "log.csv"
        write_tracelog(Simulator(sc).run(), path)
        header = path.read_text().splitlines()[0]
        assert header == "tick,time_s,entity_id,kind,x,y,theta,v,w,kappa,event"


class TestBroadcastTrajectory:
    def test_exits_sensing_disc(self):
        sc = base_scenario([ROBOT0], ticks=10)
        sim = Simulator(sc)
        agent = sim.agents[0]
        traj = sim.predict_local(agent)
        t0, x0, y0 = traj.points[0]
        # all but the last point stay inside the disc; the last one exits
        for _, x, y in traj.points[:-1]:
            assert math.hypot(x - x0, y - y0) <= 0.8 + 1e-9
        lx, ly = traj.points[-1][1:]
        assert math.hypot(lx - x0, ly - y0) > 0.8

    def test_capped_when_dwelling(self):
        # a robot whose task is already satisfied dwells near its anchor,
        # so the lookahead never exits the disc and hits the 10 s cap
        robot = {"id": 0, "start": [2.5, 1.5, 0.0], "formula": "<> R8", "mode": "comm"}
        sc = base_scenario([robot], ticks=400)
        sim = Simulator(sc)
        sim.run()
        traj = sim.predict_local(sim.agents[0])
        assert len(traj.points) <= 101
        span = traj.points[-1][0] - traj.points[0][0]
        assert span <= 10.0 + 1e-9

    def test_sense_mode_override(self):
        near = dict(ROBOT1, start=[1.15, 2.5, 0.0])
        sim = Simulator(base_scenario([ROBOT0, near]))
        for agent in sim.agents:
            sim.refresh_broadcast(agent)
        with_comm = sim.sense(sim.agents[0], mode="comm")
        without = sim.sense(sim.agents[0], mode="nocomm")
        assert 1 in with_comm.trajectories
        assert without.trajectories == {}


class TestRandomWalker:
    def scenario(self, seed):
        return base_scenario(
            [],
            obstacles=[{"id": "w", "radius": 0.3, "random_walk": {"speed": 0.4}}],
            ticks=200,
            seed=seed,
        )

    def test_same_seed_same_script(self):
        a = Simulator(self.scenario(7)).obstacles[0].waypoints
        b = Simulator(self.scenario(7)).obstacles[0].waypoints
        assert a == b

    def test_different_seed_different_script(self):
        a = Simulator(self.scenario(7)).obstacles[0].waypoints
        b = Simulator(self.scenario(8)).obstacles[0].waypoints
        assert a != b

    def test_waypoints_in_bounds_and_cover_horizon(self):
        sim = Simulator(self.scenario(7))
        wps = sim.obstacles[0].waypoints
        for t, x, y in wps:
            assert 0.3 <= x <= 4.7 and 0.3 <= y <= 5.7
        assert wps[-1][0] >= 200 * 0.1


class TestKappaColumn:
    def test_empty_for_comm_robots(self):
        sc = base_scenario([ROBOT0], ticks=20)
        rows = Simulator(sc).run()
        assert all(r.kappa is None for r in rows if r.kind == "robot")

    def test_present_for_hil_robots(self):
        robot = dict(ROBOT0, mode="hil")
        sc = base_scenario([robot], ticks=20)
        rows = Simulator(sc).run()
        ticked = [r for r in rows if r.kind == "robot" and r.tick > 0]
        assert all(r.kappa is not None for r in ticked)
        assert all(0.0 <= r.kappa <= 1.0 for r in ticked)


class TestCommObstacleTrigger:
    def test_crossing_walker_triggers_replan_without_collision(self):
        # a walker cuts across the robot's row; the robot detours and then
        # completes its reach task
        robot = {"id": 0, "start": [0.5, 2.5, 0.0], "formula": "<> R15", "mode": "comm"}
        walker = {
            "id": "w",
            "radius": 0.3,
            "waypoints": [[0.0, 2.0, 4.0], [16.0, 2.0, 0.5], [120.0, 2.0, 0.5]],
        }
        sc = base_scenario(
            [robot], obstacles=[walker], ticks=600,
            labels={"R15": [15]},
        )
        sim = Simulator(sc)
        rows = sim.run()
        events = [e for r in rows for e in r.events]
        assert "replan_start" in events
        assert "collision" not in events
        # the task still completes: the goal region is eventually entered
        assert "region_enter:15" in events
