import unittest

import numpy as np

from modules.oracles import indicator
from modules.sets import (
    InconsistentSystemError,
    InvalidSetError,
    affine_subspace,
    ball,
    box,
    diagonal_set,
    first_block,
    halfspace,
    product_set,
)
from tests.instances import SET_KINDS, random_set


class TestCatalogSets(unittest.TestCase):
    def test_halfspace_projection(self):
        """测试半空间投影"""
        C = halfspace([1.0, 0.0], 0.0)
        np.testing.assert_array_equal(C.project(np.array([2.0, 5.0])), [0.0, 5.0])
        np.testing.assert_array_equal(C.project(np.array([-1.0, 5.0])), [-1.0, 5.0])
        with self.assertRaises(InvalidSetError):
            halfspace([0.0, 0.0], 1.0)

    def test_ball_projection(self):
        C = ball([0.0, 0.0], 1.0)
        np.testing.assert_allclose(
            C.project(np.array([3.0, 4.0])), [0.6, 0.8], atol=1e-15
        )
        np.testing.assert_array_equal(C.project(np.array([0.2, 0.0])), [0.2, 0.0])
        with self.assertRaises(InvalidSetError):
            ball([0.0], 0.0)

    def test_box_projection(self):
        C = box([0.0, 0.0], [1.0, 1.0])
        np.testing.assert_array_equal(C.project(np.array([2.0, -1.0])), [1.0, 0.0])
        with self.assertRaises(InvalidSetError):
            box([1.0], [0.0])

    def test_affine_projection(self):
        """测试仿射子空间投影"""
        line = affine_subspace([[1.0, -1.0]], [0.0])
        np.testing.assert_allclose(
            line.project(np.array([1.0, 0.0])), [0.5, 0.5], atol=1e-14
        )

        # 超平面与半空间在外侧点上投影一致
        hyperplane = affine_subspace([[1.0, 2.0]], [3.0])
        half = halfspace([1.0, 2.0], 3.0)
        x = np.array([4.0, 4.0])
        np.testing.assert_allclose(hyperplane.project(x), half.project(x), atol=1e-12)

        with self.assertRaises(InconsistentSystemError):
            affine_subspace([[1.0, 0.0], [1.0, 0.0]], [0.0, 1.0])

    def test_dimension_check(self):
        with self.assertRaises(InvalidSetError):
            ball([0.0, 0.0], 1.0).project(np.array([1.0, 2.0, 3.0]))

    def test_projection_properties(self):
        """测试投影的幂等性、变分不等式与非扩张性"""
        rng = np.random.default_rng(2024)
        for kind in SET_KINDS:
            for _ in range(5):
                d = int(rng.integers(1, 5))
                C = random_set(rng, d, kind)
                xs = rng.uniform(-6.0, 6.0, (60, d))
                projected = [C.project(x) for x in xs]
                members = projected[:30]
                for x, p in zip(xs, projected):
                    self.assertTrue(C.contains(p, 1e-8), kind)
                    np.testing.assert_allclose(C.project(p), p, atol=1e-9)
                    for c in members:
                        self.assertLessEqual(float((x - p) @ (c - p)), 1e-9)
                for i in range(len(xs) - 1):
                    moved = np.linalg.norm(projected[i] - projected[i + 1])
                    gap = np.linalg.norm(xs[i] - xs[i + 1])
                    self.assertLessEqual(moved, gap + 1e-9)

    def test_indicator_prox_is_projection(self):
        rng = np.random.default_rng(5)
        for kind in SET_KINDS:
            C = random_set(rng, 3, kind)
            g = indicator(C)
            for v in rng.standard_normal((20, 3)) * 4:
                np.testing.assert_array_equal(g.prox(0.7, v), C.project(v))


class TestProductSpace(unittest.TestCase):
    def test_product_of_one_set(self):
        C = ball([0.0, 0.0], 1.0)
        P = product_set([C])
        x = np.array([3.0, 4.0])
        np.testing.assert_array_equal(P.project(x), C.project(x))

    def test_product_of_two_balls(self):
        """测试乘积集逐块投影"""
        P = product_set([ball([0.0], 1.0), ball([0.0], 1.0)])
        np.testing.assert_array_equal(P.project(np.array([3.0, -0.5])), [1.0, -0.5])
        with self.assertRaises(InvalidSetError):
            product_set([])
        with self.assertRaises(InvalidSetError):
            product_set([ball([0.0], 1.0), ball([0.0, 0.0], 1.0)])

    def test_diagonal_projection(self):
        D = diagonal_set(1, 2)
        np.testing.assert_array_equal(D.project(np.array([0.0, 2.0])), [1.0, 1.0])
        np.testing.assert_array_equal(D.project(np.array([3.0, 3.0])), [3.0, 3.0])
        D2 = diagonal_set(2, 3)
        y = np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
        np.testing.assert_allclose(D2.project(y), [3.0, 4.0] * 3)
        np.testing.assert_array_equal(first_block(D2.project(y), 2), [3.0, 4.0])

    def test_diagonal_projection_is_nearest(self):
        """对角集投影与网格上的最近点一致"""
        D = diagonal_set(1, 2)
        y = np.array([0.3, 1.9])
        grid = np.arange(-1.0, 3.0, 1e-4)
        distances = (grid - y[0]) ** 2 + (grid - y[1]) ** 2
        best = grid[int(np.argmin(distances))]
        self.assertAlmostEqual(float(D.project(y)[0]), float(best), delta=1e-4)


if __name__ == "__main__":
    unittest.main(verbosity=2)
