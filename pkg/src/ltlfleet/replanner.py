"""Sampling-based local trajectory generation around conflicts.

When robots detect that their broadcast local trajectories share a region,
the lower-priority ones grow a small tree of reachable states inside the
(expanded) sensing disc.  Every inserted node must keep a nonempty tracked
automaton state set with finite potential, a collision-free connecting
segment and a safe endpoint.  The first node escaping the sensing disc is
returned as the leaf from which the global plan is recomputed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import product
from .kernels import segment_clearance, steer_grid


class SamplingError(Exception):
    pass


@dataclass(frozen=True)
class ReplanParams:
    n_max: int = 600  # sample budget per replan
    eta: float = 0.3  # sampling margin beyond the sensing radius, meters
    tau_s: float = 0.5  # steering duration, seconds
    r_safe: float = 0.3  # extra endpoint safety distance, meters
    steer_grid: int = 21  # input lattice resolution per axis
    lam: float = 0.1  # heading weight in the steering metric, m/rad


@dataclass
class TreeNode:
    state: tuple  # (x, y, theta)
    buchi: frozenset
    parent: int | None
    input: tuple | None  # (v, w) steering the parent here


@dataclass
class LocalTree:
    nodes: list = field(default_factory=list)

    def add(self, node):
        self.nodes.append(node)
        return len(self.nodes) - 1

    def path_to(self, index):
        """(node, input) chain from the root to a node, root first."""
        chain = []
        while index is not None:
            node = self.nodes[index]
            chain.append(node)
            index = node.parent
        chain.reverse()
        return chain


def assign_priorities(conflicts):
    """Planning order for a conflict cluster: ascending robot id; the first
    robot keeps its trajectory, the rest replan."""
    robots = set()
    for rec in conflicts:
        robots.add(rec.robot_a)
        if rec.robot_b is not None:
            robots.add(rec.robot_b)
    return sorted(robots)


def generate_sample(center, radius, eta, rng, workspace, obstacle_rects):
    """Uniform (position, heading) sample over the expanded sensing disc,
    clipped to the workspace and re-drawn while inside a static obstacle."""
    cx, cy = center
    r_max = radius + eta
    for _ in range(1000):
        ang = rng.uniform(0.0, 2.0 * math.pi)
        rad = r_max * math.sqrt(rng.uniform(0.0, 1.0))
        theta = rng.uniform(-math.pi, math.pi)
        x = cx + rad * math.cos(ang)
        y = cy + rad * math.sin(ang)
        if not workspace.in_bounds(x, y):
            continue
        if any(x0 <= x <= x1 and y0 <= y <= y1 for x0, y0, x1, y1 in obstacle_rects):
            continue
        return (x, y, theta)
    raise SamplingError("could not draw a free sample in 1000 tries")


def _metric(a, b, lam):
    dth = math.remainder(a[2] - b[2], 2.0 * math.pi)
    return math.hypot(a[0] - b[0], a[1] - b[1]) + lam * abs(dth)


def nearest(tree, sample, lam):
    """Index of the tree node closest to the sample; ties go to the earlier
    inserted node."""
    best = 0
    best_d = _metric(tree.nodes[0].state, sample, lam)
    for i in range(1, len(tree.nodes)):
        d = _metric(tree.nodes[i].state, sample, lam)
        if d < best_d:
            best = i
            best_d = d
    return best


def steer(state, sample, params, v_max, w_max, n_sub):
    """Closest reachable state toward the sample under one constant input
    held for tau_s, searched over the input lattice."""
    v, w, x, y, th, dist = steer_grid(
        state[0],
        state[1],
        state[2],
        sample[0],
        sample[1],
        sample[2],
        v_max,
        w_max,
        params.steer_grid,
        params.tau_s,
        n_sub,
        params.lam,
    )
    return (x, y, th), (v, w), dist


def is_obstacle_free(p_a, p_b, rects, discs, footprint):
    """The segment keeps more than a footprint radius away from everything."""
    return segment_clearance(p_a[0], p_a[1], p_b[0], p_b[1], rects, discs) > footprint


def safe_motion(state, r_safe, entity_positions, footprint):
    """Endpoint keeps at least r_safe + footprint from every sensed entity
    position (closed inequality)."""
    x, y = state[0], state[1]
    lim = r_safe + footprint
    for ex, ey in entity_positions:
        if math.hypot(ex - x, ey - y) < lim - 1e-12:
            return False
    return True


def local_trajectory_generation(
    state,
    buchi_set,
    pba,
    potential,
    workspace,
    conflict_regions,
    moving_discs,
    entity_positions,
    params,
    rng,
    sensing_radius,
    footprint,
    dt,
    v_max,
    w_max,
):
    """Grow the local tree until it escapes the sensing disc.

    Returns (tree, leaf_index) or None after the sample budget is exhausted.
    The caller treats None as "dwell one tick and retry with a fresh seed".
    """
    if potential.of(workspace.region_of(state[0], state[1]).id, buchi_set) == math.inf:
        raise ValueError("replanning from a state with infinite potential")
    static_rects = workspace.obstacle_rects()
    blocked = static_rects + [workspace.region(r).bounds for r in sorted(conflict_regions)]
    tree = LocalTree()
    tree.add(TreeNode(tuple(state), frozenset(buchi_set), None, None))
    center = (state[0], state[1])
    n_sub = max(1, round(params.tau_s / dt))
    labels = pba.cts.labels
    for _ in range(params.n_max):
        sample = generate_sample(
            center, sensing_radius, params.eta, rng, workspace, static_rects
        )
        ni = nearest(tree, sample, params.lam)
        parent = tree.nodes[ni]
        new_state, u_star, _ = steer(parent.state, sample, params, v_max, w_max, n_sub)
        if not workspace.in_bounds(new_state[0], new_state[1]):
            continue
        crossed = workspace.cells_of_segment(
            parent.state[0], parent.state[1], new_state[0], new_state[1]
        )
        tracked = parent.buchi
        for rid in crossed[1:]:
            tracked = product.track_buchi(pba.nba, tracked, labels[rid])
        if not tracked:
            continue
        if potential.of(crossed[-1], tracked) == math.inf:
            continue
        if not is_obstacle_free(parent.state, new_state, blocked, moving_discs, footprint):
            continue
        if not safe_motion(new_state, params.r_safe, entity_positions, footprint):
            continue
        idx = tree.add(TreeNode(new_state, tracked, ni, u_star))
        if math.hypot(new_state[0] - center[0], new_state[1] - center[1]) > sensing_radius:
            return tree, idx
    return None


def global_replan(leaf_region, buchi_set, pba):
    """Recompute the prefix-suffix plan starting from the tree leaf."""
    initial = tuple(sorted((leaf_region, s) for s in buchi_set))
    return product.find_plan(pba, initial)
