"""Pure-Python / numpy twin of the compiled kernel extension.

Every public function here mirrors `_native` exactly: same signatures, same
formulas, same tie-breaking.  Obstacle sets are passed as float arrays:
rectangles (M, 4) rows [x0, y0, x1, y1], discs (K, 3) rows [cx, cy, radius].
Empty sets are zero-length arrays and yield infinite clearance.
"""

import math

import numpy as np

BACKEND = "python"

_TWO_PI = 2.0 * math.pi


def _wrap(theta):
    # normalize into (-pi, pi]
    r = math.fmod(math.pi - theta, _TWO_PI)
    if r < 0.0:
        r += _TWO_PI
    return math.pi - r


def step_unicycle(x, y, th, v, w, dt):
    """Exact constant-input unicycle step (straight segment or circular arc)."""
    if abs(w) < 1e-9:
        x2 = x + v * math.cos(th) * dt
        y2 = y + v * math.sin(th) * dt
        th2 = _wrap(th + w * dt)
    else:
        th_new = th + w * dt
        x2 = x + (v / w) * (math.sin(th_new) - math.sin(th))
        y2 = y + (v / w) * (math.cos(th) - math.cos(th_new))
        th2 = _wrap(th_new)
    return x2, y2, th2


def rollout_constant(x, y, th, v, w, dt, n):
    """n exact steps under one constant input; returns (n+1, 3) states."""
    out = np.empty((n + 1, 3))
    out[0] = (x, y, th)
    for i in range(n):
        x, y, th = step_unicycle(x, y, th, v, w, dt)
        out[i + 1] = (x, y, th)
    return out


def rollout_batch(x, y, th, inputs, dt):
    """Batched rollout: inputs (N, H, 2) -> states (N, H+1, 3).

    Each input row is held for one exact step of length dt.
    """
    inputs = np.asarray(inputs, dtype=float)
    n, h = inputs.shape[0], inputs.shape[1]
    states = np.empty((n, h + 1, 3))
    xs = np.full(n, float(x))
    ys = np.full(n, float(y))
    ths = np.full(n, float(th))
    states[:, 0, 0] = xs
    states[:, 0, 1] = ys
    states[:, 0, 2] = ths
    for k in range(h):
        v = inputs[:, k, 0]
        w = inputs[:, k, 1]
        small = np.abs(w) < 1e-9
        th_new = ths + w * dt
        w_safe = np.where(small, 1.0, w)
        dx_arc = (v / w_safe) * (np.sin(th_new) - np.sin(ths))
        dy_arc = (v / w_safe) * (np.cos(ths) - np.cos(th_new))
        dx_str = v * np.cos(ths) * dt
        dy_str = v * np.sin(ths) * dt
        xs = xs + np.where(small, dx_str, dx_arc)
        ys = ys + np.where(small, dy_str, dy_arc)
        ths = np.pi - np.remainder(np.pi - th_new, _TWO_PI)
        states[:, k + 1, 0] = xs
        states[:, k + 1, 1] = ys
        states[:, k + 1, 2] = ths
    return states


def steer_grid(x, y, th, xs, ys, ths, v_max, w_max, grid, tau, n_sub, lam):
    """Best constant input toward a sample over a (grid x grid) input lattice.

    Each candidate is propagated with n_sub exact steps of tau/n_sub (matching
    the tick integrator), scored by planar distance plus lam * |heading error|.
    Ties resolve to the earliest lattice entry (v-major, then w).
    Returns (v, w, xr, yr, thr, dist).
    """
    dt = tau / n_sub
    best = None
    for iv in range(grid):
        v = -v_max + (2.0 * v_max) * iv / (grid - 1)
        for iw in range(grid):
            w = -w_max + (2.0 * w_max) * iw / (grid - 1)
            px, py, pth = x, y, th
            for _ in range(n_sub):
                px, py, pth = step_unicycle(px, py, pth, v, w, dt)
            d = math.hypot(px - xs, py - ys) + lam * abs(_wrap(pth - ths))
            if best is None or d < best[0]:
                best = (d, v, w, px, py, pth)
    d, v, w, px, py, pth = best
    return v, w, px, py, pth, d


def _rect_dist_point(px, py, rects):
    if len(rects) == 0:
        return math.inf
    dx = np.maximum(np.maximum(rects[:, 0] - px, 0.0), px - rects[:, 2])
    dy = np.maximum(np.maximum(rects[:, 1] - py, 0.0), py - rects[:, 3])
    return float(np.min(np.hypot(dx, dy)))

def _disc_dist_point(px, py, discs):
    if len(discs) == 0:
        return math.inf
    d = np.hypot(discs[:, 0] - px, discs[:, 1] - py) - discs[:, 2]
    return float(np.min(np.maximum(d, 0.0)))


def point_clearance(px, py, rects, discs):
    """Distance from a point to the union of rectangles and discs."""
    rects = np.asarray(rects, dtype=float).reshape(-1, 4)
    discs = np.asarray(discs, dtype=float).reshape(-1, 3)
    return min(_rect_dist_point(px, py, rects), _disc_dist_point(px, py, discs))


def _seg_point_dist(ax, ay, bx, by, px, py):
    ux, uy = bx - ax, by - ay
    den = ux * ux + uy * uy
    if den == 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * ux + (py - ay) * uy) / den
    t = min(1.0, max(0.0, t))
    return math.hypot(px - (ax + t * ux), py - (ay + t * uy))


def _seg_seg_dist(ax, ay, bx, by, cx, cy, dx, dy):
    # standard segment-segment distance via endpoint projections + crossing test
    d1 = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    d2 = (bx - ax) * (dy - ay) - (by - ay) * (dx - ax)
    d3 = (dx - cx) * (ay - cy) - (dy - cy) * (ax - cx)
    d4 = (dx - cx) * (by - cy) - (dy - cy) * (bx - cx)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
        return 0.0
    return min(
        _seg_point_dist(ax, ay, bx, by, cx, cy),
        _seg_point_dist(ax, ay, bx, by, dx, dy),
        _seg_point_dist(cx, cy, dx, dy, ax, ay),
        _seg_point_dist(cx, cy, dx, dy, bx, by),
    )


def _seg_rect_dist(ax, ay, bx, by, rect):
    x0, y0, x1, y1 = rect
    inside_a = x0 <= ax <= x1 and y0 <= ay <= y1
    inside_b = x0 <= bx <= x1 and y0 <= by <= y1
    if inside_a or inside_b:
        return 0.0
    return min(
        _seg_seg_dist(ax, ay, bx, by, x0, y0, x1, y0),
        _seg_seg_dist(ax, ay, bx, by, x1, y0, x1, y1),
        _seg_seg_dist(ax, ay, bx, by, x1, y1, x0, y1),
        _seg_seg_dist(ax, ay, bx, by, x0, y1, x0, y0),
    )


def segment_clearance(ax, ay, bx, by, rects, discs):
    """Distance from a segment to the union of rectangles and discs."""
    rects = np.asarray(rects, dtype=float).reshape(-1, 4)
    discs = np.asarray(discs, dtype=float).reshape(-1, 3)
    best = math.inf
    for rect in rects:
        best = min(best, _seg_rect_dist(ax, ay, bx, by, rect))
        if best == 0.0:
            return 0.0
    for cx, cy, r in discs:
        best = min(best, max(0.0, _seg_point_dist(ax, ay, bx, by, cx, cy) - r))
        if best == 0.0:
            return 0.0
    return best


def trajectory_clearance(xy, rects, discs):
    """Per-point clearance along a trajectory: xy (T, 2) -> (T,) distances."""
    xy = np.asarray(xy, dtype=float).reshape(-1, 2)
    rects = np.asarray(rects, dtype=float).reshape(-1, 4)
    discs = np.asarray(discs, dtype=float).reshape(-1, 3)
    t = xy.shape[0]
    out = np.full(t, np.inf)
    if len(rects):
        dx = np.maximum(
            np.maximum(rects[None, :, 0] - xy[:, None, 0], 0.0),
            xy[:, None, 0] - rects[None, :, 2],
        )
        dy = np.maximum(
            np.maximum(rects[None, :, 1] - xy[:, None, 1], 0.0),
            xy[:, None, 1] - rects[None, :, 3],
        )
        out = np.minimum(out, np.min(np.hypot(dx, dy), axis=1))
    if len(discs):
        d = (
            np.hypot(
                discs[None, :, 0] - xy[:, None, 0], discs[None, :, 1] - xy[:, None, 1]
            )
            - discs[None, :, 2]
        )
        out = np.minimum(out, np.min(np.maximum(d, 0.0), axis=1))
    return out


def mpc_evaluate(
    states,
    inputs,
    goal_xy,
    goal_rect,
    qdiag,
    rdiag,
    qndiag,
    w_obs,
    w_trap,
    eps_d,
    obs_rects,
    obs_discs,
    trap_rects,
    dt,
    bounds,
    inset,
    clear_min,
):
    """Cost, feasibility and terminal flags for a batch of rollouts.

    states (N, H+1, 3), inputs (N, H, 2).  The running cost sums over stages
    k = 0..H-1 at state k: quadratic tracking error (angle component zeroed),
    quadratic input cost, and reciprocal-distance penalties to obstacles and
    trap regions, all scaled by dt; the terminal stage adds the QN tracking
    term.  Feasibility requires every state from stage 1 on to stay inside
    the workspace inset, keep clearance >= clear_min from obstacles, and
    stay out of every trap rectangle.
    """
    states = np.asarray(states, dtype=float)
    inputs = np.asarray(inputs, dtype=float)
    obs_rects = np.asarray(obs_rects, dtype=float).reshape(-1, 4)
    obs_discs = np.asarray(obs_discs, dtype=float).reshape(-1, 3)
    trap_rects = np.asarray(trap_rects, dtype=float).reshape(-1, 4)
    n, hp1 = states.shape[0], states.shape[1]
    h = hp1 - 1
    gx, gy = goal_xy
    qx, qy = qdiag[0], qdiag[1]
    rv, rw = rdiag[0], rdiag[1]

    flat = states.reshape(-1, 3)
    d_obs = trajectory_clearance(flat[:, :2], obs_rects, obs_discs).reshape(n, hp1)
    d_trap = trajectory_clearance(flat[:, :2], trap_rects, np.empty((0, 3))).reshape(n, hp1)

    ex = states[:, :h, 0] - gx
    ey = states[:, :h, 1] - gy
    run = qx * ex * ex + qy * ey * ey
    run += rv * inputs[:, :, 0] ** 2 + rw * inputs[:, :, 1] ** 2
    if w_obs > 0.0:
        run += w_obs / np.maximum(d_obs[:, :h], eps_d)
    if w_trap > 0.0:
        run += w_trap / np.maximum(d_trap[:, :h], eps_d)
    exh = states[:, h, 0] - gx
    eyh = states[:, h, 1] - gy
    costs = run.sum(axis=1) * dt + qndiag[0] * exh * exh + qndiag[1] * eyh * eyh

    x0b, y0b, x1b, y1b = bounds
    fut_x = states[:, 1:, 0]
    fut_y = states[:, 1:, 1]
    in_bounds = (
        (fut_x >= x0b + inset)
        & (fut_x <= x1b - inset)
        & (fut_y >= y0b + inset)
        & (fut_y <= y1b - inset)
    ).all(axis=1)
    clear_ok = (d_obs[:, 1:] >= clear_min).all(axis=1)
    trap_ok = (d_trap[:, 1:] > 0.0).all(axis=1)
    feasible = in_bounds & clear_ok & trap_ok

    gx0, gy0, gx1, gy1 = goal_rect
    term_ok = (
        (states[:, h, 0] >= gx0)
        & (states[:, h, 0] <= gx1)
        & (states[:, h, 1] >= gy0)
        & (states[:, h, 1] <= gy1)
    )
    return costs, feasible, term_ok
