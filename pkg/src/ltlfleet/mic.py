"""Mixed-initiative control: blend a live human input into the autonomous
command, smoothly gated by the distances to obstacles and to trap regions.

The gate g(d) rises smoothly from 0 (at the safety distance d_s) to 1 (at
d_s + eps) using the bump function rho(s) = exp(-1/s); kappa blends the
obstacle gate and the trap gate with the gain G_mix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .kernels import point_clearance


@dataclass(frozen=True)
class MicParams:
    d_s: float = 0.4  # safety distance, meters
    eps: float = 0.3  # smoothing buffer, meters
    g_mix: float = 0.5  # 1.0 = gate on obstacles only, 0.0 = traps only
    staleness_s: float = 0.5  # human inputs older than this count as zero

    def __post_init__(self):
        if self.d_s <= 0 or self.eps <= 0 or not 0.0 <= self.g_mix <= 1.0:
            raise ValueError("invalid mixed-initiative parameters")


@dataclass(frozen=True)
class HumanInput:
    robot: int
    v: float
    w: float
    tick: int


def rho(s):
    """exp(-1/s) for s > 0, else 0; smooth at zero from the right."""
    if s <= 0.0:
        return 0.0
    return math.exp(-1.0 / s)


def gate(d, d_s, eps):
    """0 below the safety distance, 1 beyond d_s + eps, smooth in between."""
    num = rho(d - d_s)
    den = num + rho(eps + d_s - d)
    if den == 0.0:  # unreachable for eps > 0, guards float edge cases
        return 1.0
    return num / den


def kappa(x, y, obstacle_rects, obstacle_discs, trap_rects, params):
    """Blended human-authority gain in [0, 1] at position (x, y)."""
    d_o = point_clearance(x, y, obstacle_rects, obstacle_discs)
    d_t = point_clearance(x, y, trap_rects, [])
    g_o = gate(d_o, params.d_s, params.eps)
    g_t = gate(d_t, params.d_s, params.eps)
    return params.g_mix * g_o + (1.0 - params.g_mix) * g_t


def mix(u_r, u_h, k, v_max, w_max, now_tick=None, staleness_ticks=None):
    """u_r + kappa * u_h, saturated to the input bounds.

    u_h may be None (no operator) or stale (older than the staleness bound),
    in which case the autonomous command passes through alone.
    """
    v, w = u_r
    if u_h is not None:
        fresh = True
        if now_tick is not None and staleness_ticks is not None:
            fresh = (now_tick - u_h.tick) <= staleness_ticks
        if fresh:
            v = v + k * u_h.v
            w = w + k * u_h.w
    v = min(v_max, max(-v_max, v))
    w = min(w_max, max(-w_max, w))
    return v, w
