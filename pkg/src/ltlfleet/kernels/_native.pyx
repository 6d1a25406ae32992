# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel twin of `_fallback`; same signatures and tie-breaking."""

import numpy as np

from libc.math cimport INFINITY, M_PI, cos, fabs, fmod, hypot, sin

BACKEND = "native"

cdef double TWO_PI = 2.0 * M_PI


cdef inline double _wrap(double theta) noexcept nogil:
    cdef double r = fmod(M_PI - theta, TWO_PI)
    if r < 0.0:
        r += TWO_PI
    return M_PI - r


cdef inline void _step(double* x, double* y, double* th,
                       double v, double w, double dt) noexcept nogil:
    cdef double th_new
    if fabs(w) < 1e-9:
        x[0] = x[0] + v * cos(th[0]) * dt
        y[0] = y[0] + v * sin(th[0]) * dt
        th[0] = _wrap(th[0] + w * dt)
    else:
        th_new = th[0] + w * dt
        x[0] = x[0] + (v / w) * (sin(th_new) - sin(th[0]))
        y[0] = y[0] + (v / w) * (cos(th[0]) - cos(th_new))
        th[0] = _wrap(th_new)


def step_unicycle(double x, double y, double th, double v, double w, double dt):
    """Exact constant-input unicycle step (straight segment or circular arc)."""
    _step(&x, &y, &th, v, w, dt)
    return x, y, th


def rollout_constant(double x, double y, double th, double v, double w,
                     double dt, int n):
    """n exact steps under one constant input; returns (n+1, 3) states."""
    out = np.empty((n + 1, 3))
    cdef double[:, ::1] o = out
    cdef int i
    o[0, 0] = x
    o[0, 1] = y
    o[0, 2] = th
    for i in range(n):
        _step(&x, &y, &th, v, w, dt)
        o[i + 1, 0] = x
        o[i + 1, 1] = y
        o[i + 1, 2] = th
    return out


def rollout_batch(double x, double y, double th, inputs, double dt):
    """Batched rollout: inputs (N, H, 2) -> states (N, H+1, 3)."""
    cdef double[:, :, ::1] u = np.ascontiguousarray(inputs, dtype=np.float64)
    cdef int n = u.shape[0], h = u.shape[1]
    states = np.empty((n, h + 1, 3))
    cdef double[:, :, ::1] s = states
    cdef int i, k
    cdef double px, py, pth
    with nogil:
        for i in range(n):
            px = x
            py = y
            pth = th
            s[i, 0, 0] = px
            s[i, 0, 1] = py
            s[i, 0, 2] = pth
            for k in range(h):
                _step(&px, &py, &pth, u[i, k, 0], u[i, k, 1], dt)
                s[i, k + 1, 0] = px
                s[i, k + 1, 1] = py
                s[i, k + 1, 2] = pth
    return states


def steer_grid(double x, double y, double th, double xs, double ys, double ths,
               double v_max, double w_max, int grid, double tau, int n_sub,
               double lam):
    """Best constant input toward a sample over a (grid x grid) input lattice.

    Ties resolve to the earliest lattice entry (v-major, then w).
    Returns (v, w, xr, yr, thr, dist).
    """
    cdef double dt = tau / n_sub
    cdef double best_d = INFINITY
    cdef double best_v = 0.0, best_w = 0.0, best_x = x, best_y = y, best_th = th
    cdef int iv, iw, j
    cdef double v, w, px, py, pth, d
    with nogil:
        for iv in range(grid):
            v = -v_max + (2.0 * v_max) * (<double> iv) / (grid - 1)
            for iw in range(grid):
                w = -w_max + (2.0 * w_max) * (<double> iw) / (grid - 1)
                px = x
                py = y
                pth = th
                for j in range(n_sub):
                    _step(&px, &py, &pth, v, w, dt)
                d = hypot(px - xs, py - ys) + lam * fabs(_wrap(pth - ths))
                if d < best_d:
                    best_d = d
                    best_v = v
                    best_w = w
                    best_x = px
                    best_y = py
                    best_th = pth
    return best_v, best_w, best_x, best_y, best_th, best_d


cdef inline double _rect_dist(double px, double py, double x0, double y0,
                              double x1, double y1) noexcept nogil:
    cdef double dx = x0 - px
    if px - x1 > dx:
        dx = px - x1
    if dx < 0.0:
        dx = 0.0
    cdef double dy = y0 - py
    if py - y1 > dy:
        dy = py - y1
    if dy < 0.0:
        dy = 0.0
    return hypot(dx, dy)


cdef double _point_clear(double px, double py, double[:, ::1] rects,
                         double[:, ::1] discs) noexcept nogil:
    cdef double best = INFINITY
    cdef double d
    cdef int i
    for i in range(rects.shape[0]):
        d = _rect_dist(px, py, rects[i, 0], rects[i, 1], rects[i, 2], rects[i, 3])
        if d < best:
            best = d
    for i in range(discs.shape[0]):
        d = hypot(discs[i, 0] - px, discs[i, 1] - py) - discs[i, 2]
        if d < 0.0:
            d = 0.0
        if d < best:
            best = d
    return best


def point_clearance(double px, double py, rects, discs):
    """Distance from a point to the union of rectangles and discs."""
    cdef double[:, ::1] r = np.ascontiguousarray(rects, dtype=np.float64).reshape(-1, 4)
    cdef double[:, ::1] c = np.ascontiguousarray(discs, dtype=np.float64).reshape(-1, 3)
    return _point_clear(px, py, r, c)


cdef inline double _seg_point_dist(double ax, double ay, double bx, double by,
                                   double px, double py) noexcept nogil:
    cdef double ux = bx - ax
    cdef double uy = by - ay
    cdef double den = ux * ux + uy * uy
    cdef double t
    if den == 0.0:
        return hypot(px - ax, py - ay)
    t = ((px - ax) * ux + (py - ay) * uy) / den
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    return hypot(px - (ax + t * ux), py - (ay + t * uy))


cdef double _seg_seg_dist(double ax, double ay, double bx, double by,
                          double cx, double cy, double dx, double dy) noexcept nogil:
    cdef double d1 = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    cdef double d2 = (bx - ax) * (dy - ay) - (by - ay) * (dx - ax)
    cdef double d3 = (dx - cx) * (ay - cy) - (dy - cy) * (ax - cx)
    cdef double d4 = (dx - cx) * (by - cy) - (dy - cy) * (bx - cx)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
        return 0.0
    cdef double best = _seg_point_dist(ax, ay, bx, by, cx, cy)
    cdef double d = _seg_point_dist(ax, ay, bx, by, dx, dy)
    if d < best:
        best = d
    d = _seg_point_dist(cx, cy, dx, dy, ax, ay)
    if d < best:
        best = d
    d = _seg_point_dist(cx, cy, dx, dy, bx, by)
    if d < best:
        best = d
    return best


cdef double _seg_rect_dist(double ax, double ay, double bx, double by,
                           double x0, double y0, double x1, double y1) noexcept nogil:
    if (x0 <= ax <= x1 and y0 <= ay <= y1) or (x0 <= bx <= x1 and y0 <= by <= y1):
        return 0.0
    cdef double best = _seg_seg_dist(ax, ay, bx, by, x0, y0, x1, y0)
    cdef double d = _seg_seg_dist(ax, ay, bx, by, x1, y0, x1, y1)
    if d < best:
        best = d
    d = _seg_seg_dist(ax, ay, bx, by, x1, y1, x0, y1)
    if d < best:
        best = d
    d = _seg_seg_dist(ax, ay, bx, by, x0, y1, x0, y0)
    if d < best:
        best = d
    return best


def segment_clearance(double ax, double ay, double bx, double by, rects, discs):
    """Distance from a segment to the union of rectangles and discs."""
    cdef double[:, ::1] r = np.ascontiguousarray(rects, dtype=np.float64).reshape(-1, 4)
    cdef double[:, ::1] c = np.ascontiguousarray(discs, dtype=np.float64).reshape(-1, 3)
    cdef double best = INFINITY
    cdef double d
    cdef int i
    with nogil:
        for i in range(r.shape[0]):
            d = _seg_rect_dist(ax, ay, bx, by, r[i, 0], r[i, 1], r[i, 2], r[i, 3])
            if d < best:
                best = d
            if best == 0.0:
                break
        if best > 0.0:
            for i in range(c.shape[0]):
                d = _seg_point_dist(ax, ay, bx, by, c[i, 0], c[i, 1]) - c[i, 2]
                if d < 0.0:
                    d = 0.0
                if d < best:
                    best = d
                if best == 0.0:
                    break
    return best


def trajectory_clearance(xy, rects, discs):
    """Per-point clearance along a trajectory: xy (T, 2) -> (T,) distances."""
    cdef double[:, ::1] p = np.ascontiguousarray(xy, dtype=np.float64).reshape(-1, 2)
    cdef double[:, ::1] r = np.ascontiguousarray(rects, dtype=np.float64).reshape(-1, 4)
    cdef double[:, ::1] c = np.ascontiguousarray(discs, dtype=np.float64).reshape(-1, 3)
    out = np.empty(p.shape[0])
    cdef double[::1] o = out
    cdef int i
    with nogil:
        for i in range(p.shape[0]):
            o[i] = _point_clear(p[i, 0], p[i, 1], r, c)
    return out


def mpc_evaluate(states, inputs, goal_xy, goal_rect, qdiag, rdiag, qndiag,
                 double w_obs, double w_trap, double eps_d, obs_rects,
                 obs_discs, trap_rects, double dt, bounds, double inset,
                 double clear_min):
    """Cost, feasibility and terminal flags for a batch of rollouts.

    Mirrors the fallback exactly; see `_fallback.mpc_evaluate`.
    """
    cdef double[:, :, ::1] s = np.ascontiguousarray(states, dtype=np.float64)
    cdef double[:, :, ::1] u = np.ascontiguousarray(inputs, dtype=np.float64)
    cdef double[:, ::1] orects = np.ascontiguousarray(obs_rects, dtype=np.float64).reshape(-1, 4)
    cdef double[:, ::1] odiscs = np.ascontiguousarray(obs_discs, dtype=np.float64).reshape(-1, 3)
    cdef double[:, ::1] trects = np.ascontiguousarray(trap_rects, dtype=np.float64).reshape(-1, 4)
    cdef double gx = goal_xy[0], gy = goal_xy[1]
    cdef double gx0 = goal_rect[0], gy0 = goal_rect[1]
    cdef double gx1 = goal_rect[2], gy1 = goal_rect[3]
    cdef double qx = qdiag[0], qy = qdiag[1]
    cdef double rv = rdiag[0], rw = rdiag[1]
    cdef double qnx = qndiag[0], qny = qndiag[1]
    cdef double bx0 = bounds[0], by0 = bounds[1], bx1 = bounds[2], by1 = bounds[3]
    cdef int n = s.shape[0], hp1 = s.shape[1], h = hp1 - 1
    costs = np.empty(n)
    feas = np.zeros(n, dtype=np.uint8)
    term = np.zeros(n, dtype=np.uint8)
    cdef double[::1] cost_v = costs
    cdef unsigned char[::1] feas_v = feas
    cdef unsigned char[::1] term_v = term
    cdef int i, k
    cdef double run, ex, ey, px, py, d_o, d_t
    cdef bint ok
    with nogil:
        for i in range(n):
            run = 0.0
            ok = True
            for k in range(h):
                px = s[i, k, 0]
                py = s[i, k, 1]
                ex = px - gx
                ey = py - gy
                run += qx * ex * ex + qy * ey * ey
                run += rv * u[i, k, 0] * u[i, k, 0] + rw * u[i, k, 1] * u[i, k, 1]
                if w_obs > 0.0:
                    d_o = _point_clear(px, py, orects, odiscs)
                    if d_o < eps_d:
                        d_o = eps_d
                    run += w_obs / d_o
                if w_trap > 0.0:
                    d_t = _point_clear(px, py, trects, odiscs[:0])
                    if d_t < eps_d:
                        d_t = eps_d
                    run += w_trap / d_t
            ex = s[i, h, 0] - gx
            ey = s[i, h, 1] - gy
            cost_v[i] = run * dt + qnx * ex * ex + qny * ey * ey
            for k in range(1, hp1):
                px = s[i, k, 0]
                py = s[i, k, 1]
                if px < bx0 + inset or px > bx1 - inset or py < by0 + inset or py > by1 - inset:
                    ok = False
                    break
                if _point_clear(px, py, orects, odiscs) < clear_min:
                    ok = False
                    break
                if _point_clear(px, py, trects, odiscs[:0]) <= 0.0:
                    ok = False
                    break
            feas_v[i] = 1 if ok else 0
            if gx0 <= s[i, h, 0] <= gx1 and gy0 <= s[i, h, 1] <= gy1:
                term_v[i] = 1
    return costs, feas != 0, term != 0
