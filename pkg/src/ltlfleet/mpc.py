"""Communication-free reactive control: finite-horizon sampled shooting.

Each solve rolls out a deterministic lattice of constant-input candidates
plus seeded piecewise-constant refinements around the incumbent, scores them
with a quadratic tracking/input cost and reciprocal-distance penalties to
obstacles and trap regions, and returns the cheapest candidate that keeps
every predicted state in bounds, clear of obstacles and out of traps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import mpc_evaluate, point_clearance, rollout_batch


@dataclass(frozen=True)
class MpcParams:
    horizon_steps: int = 10  # H; horizon T = H * dt seconds
    dt: float = 0.3
    q: tuple = (1.0, 1.0, 0.1)  # state weight diagonal (angle error is zeroed)
    r: tuple = (0.1, 0.05)  # input weight diagonal
    qn: tuple = (5.0, 5.0, 0.1)  # terminal weight diagonal
    w_obs: float = 1.0
    w_trap: float = 2.0
    eps_d: float = 0.05  # floor for the reciprocal distance penalties
    rollouts: int = 2000  # total evaluation budget per solve
    input_grid: int = 11  # constant-candidate lattice resolution
    margin: float = 0.1  # extra clearance demanded beyond the footprint

    def __post_init__(self):
        if min(self.q) < 0 or min(self.r) < 0 or min(self.qn) < 0:
            raise ValueError("weights must be nonnegative")
        if self.eps_d <= 0:
            raise ValueError("eps_d must be positive")


@dataclass(frozen=True)
class MpcProblem:
    state: tuple  # (x, y, theta)
    goal_center: tuple  # (x, y)
    goal_rect: tuple  # (x0, y0, x1, y1)
    obstacle_rects: tuple = ()
    obstacle_discs: tuple = ()  # (cx, cy, radius)
    trap_rects: tuple = ()
    bounds: tuple = (0.0, 0.0, 0.0, 0.0)  # workspace (x0, y0, x1, y1)
    footprint: float = 0.3
    v_max: float = 0.35
    w_max: float = 0.35


@dataclass
class MpcSolution:
    inputs: np.ndarray  # (H, 2)
    states: np.ndarray  # (H+1, 3)
    cost: float
    terminal_in_goal: bool
    candidates_evaluated: int = 0
    feasible_candidates: int = 0


def select_goal(plan, progress):
    """Region id of the next plan state not yet reached (wraps the suffix)."""
    return plan.state_at(progress + 1)[0]


def mpc_cost(trajectory, inputs, prob, params):
    """Reference cost evaluation, term by term, with consistency checking.

    Verifies that the trajectory really is the rollout of the inputs before
    scoring it; mismatches raise ValueError.
    """
    trajectory = np.asarray(trajectory, dtype=float)
    inputs = np.asarray(inputs, dtype=float)
    h = inputs.shape[0]
    if trajectory.shape[0] != h + 1:
        raise ValueError("trajectory must have one more state than inputs")
    rolled = rollout_batch(
        trajectory[0, 0], trajectory[0, 1], trajectory[0, 2], inputs[None, :, :], params.dt
    )[0]
    if not np.allclose(rolled, trajectory, atol=1e-9):
        raise ValueError("trajectory is not consistent with the inputs")
    gx, gy = prob.goal_center
    total = 0.0
    for k in range(h):
        ex = trajectory[k, 0] - gx
        ey = trajectory[k, 1] - gy
        stage = params.q[0] * ex * ex + params.q[1] * ey * ey
        stage += params.r[0] * inputs[k, 0] ** 2 + params.r[1] * inputs[k, 1] ** 2
        if params.w_obs > 0.0:
            d = point_clearance(
                trajectory[k, 0], trajectory[k, 1], prob.obstacle_rects, prob.obstacle_discs
            )
            stage += params.w_obs / max(d, params.eps_d)
        if params.w_trap > 0.0:
            d = point_clearance(trajectory[k, 0], trajectory[k, 1], prob.trap_rects, [])
            stage += params.w_trap / max(d, params.eps_d)
        total += stage * params.dt
    ex = trajectory[h, 0] - gx
    ey = trajectory[h, 1] - gy
    total += params.qn[0] * ex * ex + params.qn[1] * ey * ey
    return total


def _constant_candidates(params, v_max, w_max):
    g = params.input_grid
    vs = np.linspace(-v_max, v_max, g)
    ws = np.linspace(-w_max, w_max, g)
    grid = np.array([(v, w) for v in vs for w in ws])
    return np.repeat(grid[:, None, :], params.horizon_steps, axis=1)


def solve_mpc(prob, params, seed):
    """Best feasible input sequence, or None when every candidate violates a
    hard constraint (caller dwells and retries next tick)."""
    h = params.horizon_steps
    x, y, th = prob.state
    obs_rects = np.asarray(prob.obstacle_rects, dtype=float).reshape(-1, 4)
    obs_discs = np.asarray(prob.obstacle_discs, dtype=float).reshape(-1, 3)

    # Hard clearance: prefer footprint + margin; when something has already
    # come closer than that (obstacles move) accept holding the current
    # clearance, but never any state below the footprint itself.
    cur_clear = point_clearance(x, y, obs_rects, obs_discs)
    clear_min = min(prob.footprint + params.margin, max(cur_clear, prob.footprint))
    bx0, by0, bx1, by1 = prob.bounds
    bound_now = min(x - bx0, bx1 - x, y - by0, by1 - y)
    inset = max(0.0, min(prob.footprint, bound_now))

    def evaluate(inputs):
        states = rollout_batch(x, y, th, inputs, params.dt)
        costs, feas, term = mpc_evaluate(
            states,
            inputs,
            prob.goal_center,
            prob.goal_rect,
            params.q,
            params.r,
            params.qn,
            params.w_obs,
            params.w_trap,
            params.eps_d,
            obs_rects,
            obs_discs,
            np.asarray(prob.trap_rects, dtype=float).reshape(-1, 4),
            params.dt,
            prob.bounds,
            inset,
            clear_min,
        )
        return states, costs, feas, term

    best = None  # (cost, index, inputs, states, term)
    evaluated = 0
    feasible_count = 0

    def consider(inputs, states, costs, feas, term, base_index):
        nonlocal best, feasible_count
        for i in range(len(costs)):
            if not feas[i]:
                continue
            feasible_count += 1
            key = (costs[i], base_index + i)
            if best is None or key < (best[0], best[1]):
                best = (costs[i], base_index + i, inputs[i], states[i], bool(term[i]))

    constant = _constant_candidates(params, prob.v_max, prob.w_max)
    states, costs, feas, term = evaluate(constant)
    consider(constant, states, costs, feas, term, 0)
    evaluated += len(constant)

    remaining = max(0, params.rollouts - evaluated)
    generations = 6
    per_gen = max(1, remaining // generations) if remaining else 0
    rng = np.random.default_rng(seed)
    segments = 2
    seg_len = [h - h // segments, h // segments] if h >= 2 else [h]
    for g in range(generations if remaining else 0):
        incumbent = best[2] if best is not None else np.zeros((h, 2))
        sigma = 0.5 * (0.6**g)
        noise_seg = rng.normal(0.0, 1.0, size=(per_gen, len(seg_len), 2))
        noise = np.concatenate(
            [np.repeat(noise_seg[:, j : j + 1, :], seg_len[j], axis=1) for j in range(len(seg_len))],
            axis=1,
        )
        cand = incumbent[None, :, :] + noise * sigma * np.array([prob.v_max, prob.w_max])
        cand[:, :, 0] = np.clip(cand[:, :, 0], -prob.v_max, prob.v_max)
        cand[:, :, 1] = np.clip(cand[:, :, 1], -prob.w_max, prob.w_max)
        states, costs, feas, term = evaluate(cand)
        consider(cand, states, costs, feas, term, evaluated)
        evaluated += len(cand)

    if best is None:
        return None
    return MpcSolution(
        inputs=np.array(best[2]),
        states=np.array(best[3]),
        cost=float(best[0]),
        terminal_in_goal=best[4],
        candidates_evaluated=evaluated,
        feasible_candidates=feasible_count,
    )
