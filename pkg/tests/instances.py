"""
测试用随机实例生成器(全部使用固定种子)
"""

from typing import List, Tuple

import numpy as np

from modules.algorithms import StepsizeSchedule
from modules.oracles import (
    ObjectivePair,
    ProxableOracle,
    SmoothOracle,
    indicator,
    l1_norm,
    quadratic,
)
from modules.sets import ConvexSet, affine_subspace, ball, box, halfspace


def random_psd_quadratic(rng: np.random.Generator, d: int) -> SmoothOracle:
    """特征值位于 [0.5, 2] 的随机二次函数, 带随机线性项"""
    rotation, _ = np.linalg.qr(rng.standard_normal((d, d)))
    Q = rotation @ np.diag(rng.uniform(0.5, 2.0, d)) @ rotation.T
    Q = (Q + Q.T) / 2.0
    return quadratic(Q, rng.standard_normal(d))


def random_proxable(rng: np.random.Generator, d: int) -> ProxableOracle:
    """l1、球指示函数或盒指示函数之一"""
    choice = int(rng.integers(3))
    if choice == 0:
        return l1_norm(float(rng.uniform(0.1, 2.0)), dimension=d)
    if choice == 1:
        return indicator(ball(rng.standard_normal(d), float(rng.uniform(0.5, 2.0))))
    lo = rng.uniform(-2.0, 0.0, d)
    return indicator(box(lo, lo + rng.uniform(0.5, 3.0, d)))


def prox_grad_instances(
    count: int, seed: int
) -> List[Tuple[ObjectivePair, np.ndarray, StepsizeSchedule]]:
    """
    近端梯度随机实例: d ∈ {2..10}, 步长为 1/L 或 (0, 1/L] 内的随机序列
    """
    rng = np.random.default_rng(seed)
    instances = []
    for i in range(count):
        d = int(rng.integers(2, 11))
        pair = ObjectivePair(random_psd_quadratic(rng, d), random_proxable(rng, d))
        x0 = rng.uniform(-5.0, 5.0, d)
        if i % 2 == 0:
            schedule = StepsizeSchedule.fixed(1.0 / pair.f.lipschitz)
        else:
            alphas = rng.uniform(0.5, 1.0, 500) / pair.f.lipschitz
            schedule = StepsizeSchedule.explicit(alphas)
        instances.append((pair, x0, schedule))
    return instances


def random_set(rng: np.random.Generator, d: int, kind: str) -> ConvexSet:
    if kind == "halfspace":
        return halfspace(rng.standard_normal(d), float(rng.uniform(-1.0, 1.0)))
    if kind == "ball":
        return ball(rng.uniform(-2.0, 2.0, d), float(rng.uniform(0.5, 2.0)))
    if kind == "box":
        lo = rng.uniform(-2.0, 1.0, d)
        return box(lo, lo + rng.uniform(0.2, 2.0, d))
    rows = int(rng.integers(1, d)) if d > 1 else 1
    return affine_subspace(rng.standard_normal((rows, d)), rng.standard_normal(rows))


SET_KINDS = ("halfspace", "ball", "box", "affine")
