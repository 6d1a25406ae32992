import math

import numpy as np
import pytest

from ltlfleet import kernels
from ltlfleet.kernels import _fallback as fb

try:
    from ltlfleet.kernels import _native as nat
except ImportError:
    nat = None

needs_native = pytest.mark.skipif(nat is None, reason="compiled kernels unavailable")


def euler_midpoint(x, y, th, v, w, dt, n=10_000):
    h = dt / n
    for _ in range(n):
        thm = th + w * h / 2.0
        x += v * math.cos(thm) * h
        y += v * math.sin(thm) * h
        th += w * h
    return x, y, th


class TestStepUnicycle:
    def test_straight(self):
        assert kernels.step_unicycle(0, 0, 0, 0.35, 0, 1.0) == (0.35, 0.0, 0.0)

    def test_pure_rotation(self):
        x, y, th = kernels.step_unicycle(0, 0, 0, 0, 0.35, 1.0)
        assert (x, y) == (0.0, 0.0)
        assert th == pytest.approx(0.35)

    def test_theta_normalized_half_open(self):
        _, _, th = kernels.step_unicycle(0, 0, math.pi - 0.01, 0, 0.35, 1.0)
        assert -math.pi < th <= math.pi

    def test_matches_fine_integrator(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            x, y = rng.uniform(-2, 2, 2)
            th = rng.uniform(-math.pi, math.pi)
            v = rng.uniform(-0.35, 0.35)
            w = rng.uniform(-0.35, 0.35)
            dt = rng.uniform(0.01, 1.0)
            got = kernels.step_unicycle(x, y, th, v, w, dt)
            want = euler_midpoint(x, y, th, v, w, dt, n=2000)
            assert got[0] == pytest.approx(want[0], abs=1e-7)
            assert got[1] == pytest.approx(want[1], abs=1e-7)


class TestRollouts:
    def test_constant_rollout_composes_steps(self):
        traj = kernels.rollout_constant(0, 0, 0, 0.3, 0.2, 0.1, 5)
        x, y, th = 0, 0, 0
        for i in range(5):
            x, y, th = kernels.step_unicycle(x, y, th, 0.3, 0.2, 0.1)
            assert traj[i + 1] == pytest.approx([x, y, th])

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(9)
        inputs = rng.uniform(-0.35, 0.35, size=(7, 4, 2))
        states = kernels.rollout_batch(0.5, 1.0, 0.3, inputs, 0.1)
        for i in range(7):
            x, y, th = 0.5, 1.0, 0.3
            for k in range(4):
                x, y, th = kernels.step_unicycle(x, y, th, *inputs[i, k], 0.1)
                np.testing.assert_allclose(states[i, k + 1], [x, y, th], atol=1e-12)


class TestClearance:
    def test_point_inside_rect_is_zero(self):
        assert kernels.point_clearance(0.5, 0.5, [[0, 0, 1, 1]], []) == 0.0

    def test_point_outside_rect(self):
        assert kernels.point_clearance(2.0, 0.5, [[0, 0, 1, 1]], []) == pytest.approx(1.0)

    def test_point_disc(self):
        assert kernels.point_clearance(2.0, 0.0, [], [[0, 0, 0.5]]) == pytest.approx(1.5)

    def test_empty_sets_are_infinite(self):
        assert kernels.point_clearance(0, 0, [], []) == math.inf

    def test_segment_through_rect_is_zero(self):
        assert kernels.segment_clearance(-1, 0.5, 2, 0.5, [[0, 0, 1, 1]], []) == 0.0

    def test_segment_near_rect(self):
        d = kernels.segment_clearance(-1, 2, 2, 2, [[0, 0, 1, 1]], [])
        assert d == pytest.approx(1.0)

    def test_segment_disc(self):
        d = kernels.segment_clearance(-1, 1, 1, 1, [], [[0, 0, 0.5]])
        assert d == pytest.approx(0.5)

    def test_trajectory_clearance_pointwise(self):
        xy = np.array([[0.0, 2.0], [0.5, 3.0], [4.0, 0.5]])
        rects = np.array([[0.0, 0.0, 1.0, 1.0]])
        discs = np.array([[4.0, 4.0, 1.0]])
        out = kernels.trajectory_clearance(xy, rects, discs)
        for i, (px, py) in enumerate(xy):
            assert out[i] == pytest.approx(kernels.point_clearance(px, py, rects, discs))


class TestSteerGrid:
    def test_sample_straight_ahead(self):
        v, w, x, y, th, d = kernels.steer_grid(
            0, 0, 0, 0.2, 0.0, 0.0, 0.35, 0.35, 21, 0.5, 5, 0.1
        )
        assert v == pytest.approx(0.35)
        assert w == pytest.approx(0.0)

    def test_sample_at_start_prefers_zero_input(self):
        v, w, x, y, th, d = kernels.steer_grid(
            0, 0, 0, 0.0, 0.0, 0.0, 0.35, 0.35, 21, 0.5, 5, 0.1
        )
        assert (v, w) == (0.0, 0.0)
        assert d == pytest.approx(0.0)


@needs_native
class TestBackendEquivalence:
    def test_backends_agree(self):
        rng = np.random.default_rng(21)
        for _ in range(30):
            x, y = rng.uniform(0, 5, 2)
            th = rng.uniform(-math.pi, math.pi)
            v = rng.uniform(-0.35, 0.35)
            w = rng.uniform(-0.35, 0.35)
            dt = rng.uniform(0.05, 0.5)
            a = nat.step_unicycle(x, y, th, v, w, dt)
            b = fb.step_unicycle(x, y, th, v, w, dt)
            np.testing.assert_allclose(a, b, atol=1e-12)

        inputs = rng.uniform(-0.35, 0.35, size=(50, 8, 2))
        np.testing.assert_allclose(
            nat.rollout_batch(1.0, 2.0, 0.4, inputs, 0.3),
            fb.rollout_batch(1.0, 2.0, 0.4, inputs, 0.3),
            atol=1e-12,
        )

        rects = rng.uniform(0, 3, size=(4, 2))
        rects = np.hstack([rects, rects + rng.uniform(0.2, 1.5, size=(4, 2))])
        discs = np.hstack([rng.uniform(0, 5, size=(3, 2)), rng.uniform(0.1, 0.6, size=(3, 1))])
        for _ in range(50):
            px, py = rng.uniform(-1, 6, 2)
            assert nat.point_clearance(px, py, rects, discs) == pytest.approx(
                fb.point_clearance(px, py, rects, discs), abs=1e-12
            )
            qx, qy = rng.uniform(-1, 6, 2)
            assert nat.segment_clearance(px, py, qx, qy, rects, discs) == pytest.approx(
                fb.segment_clearance(px, py, qx, qy, rects, discs), abs=1e-12
            )

    def test_steer_grid_identical_choice(self):
        rng = np.random.default_rng(22)
        for _ in range(20):
            args = (
                rng.uniform(0, 5),
                rng.uniform(0, 5),
                rng.uniform(-math.pi, math.pi),
                rng.uniform(0, 5),
                rng.uniform(0, 5),
                rng.uniform(-math.pi, math.pi),
                0.35,
                0.35,
                21,
                0.5,
                5,
                0.1,
            )
            a = nat.steer_grid(*args)
            b = fb.steer_grid(*args)
            np.testing.assert_allclose(a, b, atol=1e-12)

    def test_mpc_evaluate_identical(self):
        rng = np.random.default_rng(23)
        inputs = rng.uniform(-0.35, 0.35, size=(40, 6, 2))
        states = fb.rollout_batch(2.0, 2.0, 0.1, inputs, 0.3)
        args = (
            states,
            inputs,
            (4.5, 3.5),
            (4.0, 3.0, 5.0, 4.0),
            (1.0, 1.0, 0.1),
            (0.1, 0.05),
            (5.0, 5.0, 0.1),
            1.0,
            2.0,
            0.05,
            np.array([[0.0, 0.0, 1.0, 1.0]]),
            np.array([[3.0, 1.0, 0.3]]),
            np.array([[2.0, 4.0, 3.0, 5.0]]),
            0.3,
            (0.0, 0.0, 5.0, 6.0),
            0.3,
            0.4,
        )
        ca, fa, ta = nat.mpc_evaluate(*args)
        cb, fbb, tb = fb.mpc_evaluate(*args)
        np.testing.assert_allclose(ca, cb, rtol=1e-12)
        np.testing.assert_array_equal(fa, fbb)
        np.testing.assert_array_equal(ta, tb)
