import unittest

import numpy as np

from modules.algorithms import (
    BacktrackParams,
    GuaranteeViolationError,
    InvalidParameterError,
    StepsizeSchedule,
    StopRule,
    prox_grad_step,
    run_alternating_projections,
    run_averaged_projections,
    run_cyclic_projections,
    run_gradient_descent,
    run_prox_grad,
    run_prox_grad_backtracking,
    run_proximal_point,
)
from modules.analysis import check_self_contracted
from modules.oracles import (
    ObjectivePair,
    indicator,
    l1_norm,
    quadratic,
    zero_proxable,
    zero_smooth,
)
from modules.sets import affine_subspace, ball, halfspace
from tests.instances import prox_grad_instances, random_set


class TestParameters(unittest.TestCase):
    def test_invalid_parameters(self):
        with self.assertRaises(InvalidParameterError):
            StepsizeSchedule.fixed(0.0)
        with self.assertRaises(InvalidParameterError):
            StepsizeSchedule.explicit([])
        with self.assertRaises(InvalidParameterError):
            StepsizeSchedule.explicit([0.5, -1.0])
        with self.assertLogs("ProxGradRunners", level="ERROR"):
            with self.assertRaises(InvalidParameterError):
                StopRule(max_iters=0)
        with self.assertRaises(InvalidParameterError):
            BacktrackParams(alpha_init=1.0, shrink=1.0)

    def test_schedules(self):
        """测试显式步长用尽后沿用最后一项, 自动步长取 fraction/L"""
        schedule = StepsizeSchedule.explicit([0.1, 0.2])
        alphas = [schedule.stepsize(k, 1.0) for k in range(4)]
        self.assertEqual(alphas, [0.1, 0.2, 0.2, 0.2])
        self.assertEqual(StepsizeSchedule.auto(0.5).stepsize(3, 4.0), 0.125)
        self.assertEqual(StepsizeSchedule.fixed(0.3).stepsize(9, 100.0), 0.3)


class TestProxGrad(unittest.TestCase):
    def test_single_step_examples(self):
        """测试近端梯度算子的典型取值"""
        half_square = quadratic([[1.0]])
        pair = ObjectivePair(half_square, zero_proxable(1))
        np.testing.assert_array_equal(prox_grad_step(pair, 1.0, np.array([5.0])), [0.0])

        pair = ObjectivePair(zero_smooth(2), indicator(ball([0.0, 0.0], 1.0)))
        step = prox_grad_step(pair, 1.0, np.array([3.0, 4.0]))
        np.testing.assert_allclose(step, [0.6, 0.8], atol=1e-15)

        pair = ObjectivePair(half_square, l1_norm(1.0))
        np.testing.assert_array_equal(prox_grad_step(pair, 0.5, np.array([2.0])), [0.5])

    def test_geometric_decay(self):
        pair = ObjectivePair(quadratic([[1.0]]), zero_proxable(1))
        schedule = StepsizeSchedule.fixed(0.5)
        t = run_prox_grad(pair, [1.0], schedule, StopRule(max_iters=3))
        np.testing.assert_array_equal(t.points[:, 0], [1.0, 0.5, 0.25, 0.125])
        self.assertEqual(list(t.stepsizes), [0.5] * 3)
        self.assertEqual(t.info["stop_reason"], "max_iters")

    def test_start_at_minimizer(self):
        """测试从极小点出发时轨迹为常数"""
        pair = ObjectivePair(quadratic([[1.0]]), l1_norm(1.0))
        t = run_prox_grad(pair, [0.0], StepsizeSchedule.fixed(0.5))
        np.testing.assert_array_equal(t.points[:, 0], [0.0, 0.0])
        self.assertEqual(t.info["stop_reason"], "step_tolerance")

    def test_guarantee_violation(self):
        pair = ObjectivePair(quadratic([[1.0]]), zero_proxable(1))
        with self.assertRaises(GuaranteeViolationError) as ctx:
            run_prox_grad(pair, [1.0], StepsizeSchedule.fixed(1.5))
        self.assertEqual(ctx.exception.k, 0)
        self.assertEqual(ctx.exception.alpha, 1.5)

        schedule = StepsizeSchedule.explicit([0.5, 0.5, 3.0])
        with self.assertRaises(GuaranteeViolationError) as ctx:
            run_prox_grad(pair, [1.0], schedule)
        self.assertEqual(ctx.exception.k, 2)

    def test_objective_monotone(self):
        """测试 α ≤ 1/L 时目标值单调不增"""
        for pair, x0, schedule in prox_grad_instances(10, seed=1):
            t = run_prox_grad(pair, x0, schedule, StopRule(max_iters=100))
            values = t.objective_values
            finite = np.isfinite(values)
            self.assertTrue(np.all(finite[1:]))
            slack = 1e-9 * (1.0 + np.abs(values[1:-1]))
            self.assertTrue(np.all(np.diff(values[1:]) <= slack))

    def test_deterministic(self):
        pair, x0, schedule = prox_grad_instances(1, seed=5)[0]
        first = run_prox_grad(pair, x0, schedule, StopRule(max_iters=50))
        second = run_prox_grad(pair, x0, schedule, StopRule(max_iters=50))
        np.testing.assert_array_equal(first.points, second.points)


class TestBacktracking(unittest.TestCase):
    def test_closed_form_quadratic(self):
        """f = 2x² (L = 4), alpha_init = 1, q = 0.5: 第一步接受 α = 0.25 并直接到达 0"""
        pair = ObjectivePair(quadratic([[4.0]]), zero_proxable(1))
        params = BacktrackParams(alpha_init=1.0, shrink=0.5)
        t = run_prox_grad_backtracking(pair, [1.0], params)
        self.assertEqual(t.stepsizes[0], 0.25)
        self.assertEqual(t.info["shrinks"][0], 2)
        self.assertEqual(t.points[1, 0], 0.0)
        self.assertTrue(set(t.stepsizes) <= {1.0, 0.5, 0.25})

    def test_small_initial_step_never_shrinks(self):
        """alpha_init ≤ 1/L 时不发生收缩, 轨迹与固定步长一致"""
        for pair, x0, _ in prox_grad_instances(6, seed=3):
            alpha = 1.0 / pair.f.lipschitz
            stop = StopRule(max_iters=3)
            params = BacktrackParams(alpha_init=alpha)
            backtracked = run_prox_grad_backtracking(pair, x0, params, stop)
            fixed = run_prox_grad(pair, x0, StepsizeSchedule.fixed(alpha), stop)
            self.assertEqual(sum(backtracked.info["shrinks"]), 0)
            np.testing.assert_array_equal(backtracked.points, fixed.points)

    def test_roundoff_band_falls_back_to_gradient_test(self):
        """f = ½x² + 1e8: 函数值比较被舍入淹没时按梯度差判据收缩, α = 10 被拒绝"""
        pair = ObjectivePair(quadratic([[1.0]], c=1e8), zero_proxable(1))
        params = BacktrackParams(alpha_init=10.0)
        t = run_prox_grad_backtracking(pair, [1e-5], params, StopRule(max_iters=1))
        self.assertEqual(t.stepsizes[0], 0.3125)
        self.assertEqual(t.info["shrinks"], [5])
        self.assertLess(abs(t.points[1, 0]), 1e-5)

    def test_long_runs_stay_self_contracted(self):
        """500 步且不提前停止: 尾部微小步长下轨迹仍自收缩"""
        full_run = StopRule(max_iters=500, step_tolerance=0.0)
        for pair, x0, _ in prox_grad_instances(4, seed=77):
            params = BacktrackParams(alpha_init=10.0 / pair.f.lipschitz)
            t = run_prox_grad_backtracking(pair, x0, params, full_run)
            self.assertEqual(t.num_steps, 500)
            self.assertTrue(check_self_contracted(t).is_self_contracted)

            gd = run_gradient_descent(pair.f, x0, params, full_run)
            self.assertTrue(check_self_contracted(gd).is_self_contracted)


class TestSpecialCases(unittest.TestCase):
    def test_proximal_point_on_l1(self):
        """测试 l1 上的近端点算法逐步收缩到 0"""
        t = run_proximal_point(l1_norm(1.0), [3.0], StepsizeSchedule.fixed(1.0))
        np.testing.assert_array_equal(t.points[:, 0], [3.0, 2.0, 1.0, 0.0, 0.0])

    def test_proximal_point_on_indicator(self):
        g = indicator(ball([0.0, 0.0], 1.0))
        t = run_proximal_point(g, [3.0, 4.0], StepsizeSchedule.fixed(2.0))
        np.testing.assert_allclose(t.points[1], [0.6, 0.8], atol=1e-15)
        np.testing.assert_allclose(t.points[-1], t.points[1], atol=1e-15)

    def test_proximal_point_matches_prox_grad(self):
        g = l1_norm(0.4)
        schedule = StepsizeSchedule.explicit([0.5, 1.5, 3.0])
        ppa = run_proximal_point(g, [2.0, -7.0], schedule)
        general = run_prox_grad(
            ObjectivePair(zero_smooth(2), g),
            [2.0, -7.0],
            schedule,
            enforce_guarantee=False,
        )
        np.testing.assert_array_equal(ppa.points, general.points)

    def test_gradient_descent_examples(self):
        """测试最速下降: α = 1 一步到达极小点; α = 1.8 产生振荡"""
        f = quadratic([[1.0]])
        t = run_gradient_descent(f, [7.0], StepsizeSchedule.fixed(1.0))
        np.testing.assert_array_equal(t.points[:2, 0], [7.0, 0.0])

        schedule = StepsizeSchedule.fixed(1.8)
        t = run_gradient_descent(f, [1.0], schedule, StopRule(max_iters=3))
        np.testing.assert_allclose(
            t.points[:, 0], [1.0, -0.8, 0.64, -0.512], atol=1e-15
        )

        with self.assertRaises(GuaranteeViolationError):
            run_gradient_descent(f, [1.0], schedule, enforce_guarantee=True)

    def test_gradient_descent_matches_prox_grad(self):
        for pair, x0, schedule in prox_grad_instances(4, seed=8):
            stop = StopRule(max_iters=40)
            gd = run_gradient_descent(pair.f, x0, schedule, stop)
            smooth_only = ObjectivePair(pair.f, zero_proxable(pair.dimension))
            general = run_prox_grad(smooth_only, x0, schedule, stop)
            np.testing.assert_array_equal(gd.points, general.points)

    def test_gradient_descent_with_backtracking(self):
        params = BacktrackParams(alpha_init=1.0)
        t = run_gradient_descent(quadratic([[4.0]]), [1.0], params)
        self.assertEqual(t.stepsizes[0], 0.25)
        self.assertIn("shrinks", t.info)


class TestProjections(unittest.TestCase):
    def test_identical_sets(self):
        """A = B 时首步后轨迹为常数"""
        A = ball([0.0, 0.0], 1.0)
        x_traj, y_traj = run_alternating_projections(A, A, [3.0, 4.0])
        np.testing.assert_allclose(x_traj.points[-1], x_traj.points[1], atol=1e-15)
        np.testing.assert_allclose(y_traj.points[0], x_traj.points[1], atol=1e-15)

    def test_axis_and_diagonal(self):
        x_axis = affine_subspace([[0.0, 1.0]], [0.0])
        diagonal = affine_subspace([[1.0, -1.0]], [0.0])
        x_traj, y_traj = run_alternating_projections(x_axis, diagonal, [0.0, 1.0])
        np.testing.assert_allclose(
            x_traj.points, [[0.0, 1.0], [0.0, 0.0], [0.0, 0.0]], atol=1e-15
        )
        np.testing.assert_allclose(y_traj.points, [[0.0, 0.0], [0.0, 0.0]], atol=1e-15)
        self.assertEqual(y_traj.label, "alternating_projections:y")

    def test_disjoint_halfspaces(self):
        """互不相交的两个半空间: 收敛到最近点对"""
        left = halfspace([1.0], 0.0)
        right = halfspace([-1.0], -1.0)
        x_traj, y_traj = run_alternating_projections(left, right, [-3.0])
        np.testing.assert_array_equal(x_traj.points[:, 0], [-3.0, 1.0, 1.0])
        np.testing.assert_array_equal(y_traj.points[:, 0], [-3.0, 0.0])

    def test_averaged_two_halfspaces(self):
        """三种平均投影实现在两个半空间上给出相同轨迹"""
        sets = [halfspace([1.0], 0.0), halfspace([-1.0], -1.0)]
        for mode in ("direct", "gradient", "product"):
            t = run_averaged_projections(sets, [0.25], mode=mode)
            np.testing.assert_allclose(
                t.points[:, 0], [0.25, 0.5, 0.5], atol=1e-15, err_msg=mode
            )

    def test_averaged_single_set(self):
        C = ball([0.0, 0.0], 1.0)
        for mode in ("direct", "gradient", "product"):
            t = run_averaged_projections([C], [3.0, 4.0], mode=mode)
            np.testing.assert_allclose(
                t.points[1], [0.6, 0.8], atol=1e-15, err_msg=mode
            )

    def test_averaged_modes_agree(self):
        rng = np.random.default_rng(21)
        for _ in range(5):
            d = int(rng.integers(1, 4))
            sets = [random_set(rng, d, kind) for kind in ("ball", "halfspace", "box")]
            x0 = rng.uniform(-5.0, 5.0, d)
            stop = StopRule(max_iters=60)
            runs = [
                run_averaged_projections(sets, x0, stop, mode)
                for mode in ("direct", "gradient", "product")
            ]
            common = min(len(r) for r in runs)
            for r in runs[1:]:
                np.testing.assert_allclose(
                    r.points[:common], runs[0].points[:common], atol=1e-10
                )

    def test_averaged_rejects_bad_mode(self):
        with self.assertRaises(InvalidParameterError):
            run_averaged_projections(
                [ball([0.0], 1.0)], [2.0], mode="mixed"  # type: ignore[arg-type]
            )
        with self.assertRaises(InvalidParameterError):
            run_averaged_projections([], [2.0])

    def test_cyclic_single_set_is_proximal_point(self):
        C = ball([1.0, 1.0], 0.5)
        cyclic = run_cyclic_projections([C], [4.0, -2.0])
        ppa = run_proximal_point(indicator(C), [4.0, -2.0], StepsizeSchedule.fixed(1.0))
        np.testing.assert_array_equal(cyclic.points, ppa.points)

    def test_cyclic_two_sets_is_alternating(self):
        A = ball([0.0, 0.0], 1.0)
        B = halfspace([1.0, 1.0], -0.5)
        stop = StopRule(max_iters=50)
        cyclic = run_cyclic_projections([A, B], [3.0, 2.0], stop)
        x_traj, _ = run_alternating_projections(A, B, [3.0, 2.0], stop)
        common = min(len(cyclic), len(x_traj))
        np.testing.assert_allclose(
            cyclic.points[:common], x_traj.points[:common], atol=1e-12
        )

    def test_cyclic_from_feasible_point(self):
        sets = [ball([0.0, 0.0], 2.0), halfspace([1.0, 0.0], 1.0)]
        t = run_cyclic_projections(sets, [0.5, 0.5])
        np.testing.assert_array_equal(t.points, [[0.5, 0.5], [0.5, 0.5]])


if __name__ == "__main__":
    unittest.main(verbosity=2)
