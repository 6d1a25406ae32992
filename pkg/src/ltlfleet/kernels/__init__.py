"""Hot numeric kernels: unicycle integration, rollouts, clearance, MPC costs.

Two interchangeable backends: a compiled extension (`_native`, Cython) and a
vectorized pure-Python twin (`_fallback`).  The compiled one is preferred at
import; set LTLFLEET_PURE=1 to force the fallback.  `BACKEND` names the one
in use.
"""

import os

if os.environ.get("LTLFLEET_PURE"):
    from . import _fallback as _impl
else:
    try:
        from . import _native as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _fallback as _impl

BACKEND = _impl.BACKEND

step_unicycle = _impl.step_unicycle
rollout_constant = _impl.rollout_constant
rollout_batch = _impl.rollout_batch
steer_grid = _impl.steer_grid
point_clearance = _impl.point_clearance
segment_clearance = _impl.segment_clearance
trajectory_clearance = _impl.trajectory_clearance
mpc_evaluate = _impl.mpc_evaluate

__all__ = [
    "BACKEND",
    "step_unicycle",
    "rollout_constant",
    "rollout_batch",
    "steer_grid",
    "point_clearance",
    "segment_clearance",
    "trajectory_clearance",
    "mpc_evaluate",
]
