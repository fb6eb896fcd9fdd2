"""
凸集模块 - 负责闭凸集及其精确欧氏投影

主要功能：
1. 半空间、球、盒、仿射子空间的投影与成员判定
2. 乘积空间构造: 乘积集与对角集(块主序布局)

注意：乘积空间中的点按块主序平铺, 第 i 块占据下标 [i·d, (i+1)·d)
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Sequence

import numpy as np
import numpy.typing as npt

from .core import Point, SelfContractError, as_point

logger = logging.getLogger("ConvexSets")


class SetError(SelfContractError):
    """凸集相关错误的基类"""
    pass


class InvalidSetError(SetError, ValueError):
    """集合参数非法(零法向量、上下界交叉、空列表等)时抛出"""
    pass


class InconsistentSystemError(SetError, ValueError):
    """仿射方程组 Ax = b 无解时抛出"""
    pass


@dataclass(frozen=True)
class ConvexSet:
    """
    可投影的闭凸集

    属性:
        dimension (int): 所在空间维度
        projector: 投影映射 P_C
        name (str): 集合描述, 用于日志
    """

    dimension: int
    projector: Callable[[Point], Point]
    name: str = "set"

    def project(self, x: Point) -> Point:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.dimension,):
            error_msg = f"{self.name}: 输入维度 {x.shape} 与集合维度 {self.dimension} 不符"
            logger.error(error_msg)
            raise InvalidSetError(error_msg)
        return self.projector(x)

    def contains(self, x: Point, tolerance: float = 1e-9) -> bool:
        """判定 ‖x − P_C(x)‖ ≤ tolerance·(1 + ‖x‖)"""
        x = np.asarray(x, dtype=np.float64)
        gap = float(np.linalg.norm(x - self.project(x)))
        return gap <= tolerance * (1.0 + float(np.linalg.norm(x)))


def halfspace(a: Sequence[float], b: float) -> ConvexSet:
    """
    半空间 {x : ⟨a, x⟩ ≤ b}

    异常:
        InvalidSetError: 法向量为零时抛出
    """
    normal = np.array(as_point(a))
    norm_sq = float(normal @ normal)
    if norm_sq == 0.0:
        error_msg = "半空间法向量不能为零"
        logger.error(error_msg)
        raise InvalidSetError(error_msg)
    offset = float(b)

    def project(x: Point) -> Point:
        excess = (float(normal @ x) - offset) / norm_sq
        return x - max(0.0, excess) * normal

    return ConvexSet(
        dimension=normal.size, projector=project, name=f"halfspace(b={offset:g})"
    )


def ball(center: Sequence[float], radius: float) -> ConvexSet:
    """闭球 {x : ‖x − center‖ ≤ radius}"""
    c = np.array(as_point(center))
    r = float(radius)
    if not r > 0:
        error_msg = f"球半径必须为正: {radius}"
        logger.error(error_msg)
        raise InvalidSetError(error_msg)

    def project(x: Point) -> Point:
        offset = x - c
        dist = float(np.linalg.norm(offset))
        if dist <= r:
            return x.copy()
        return c + (r / dist) * offset

    return ConvexSet(dimension=c.size, projector=project, name=f"ball(r={r:g})")


def box(lo: Sequence[float], hi: Sequence[float]) -> ConvexSet:
    """盒约束 {x : lo ≤ x ≤ hi}, 投影为逐分量截断"""
    lower = np.array(as_point(lo))
    upper = np.array(as_point(hi))
    if lower.shape != upper.shape:
        error_msg = f"盒约束上下界维度不一致: {lower.size} vs {upper.size}"
        logger.error(error_msg)
        raise InvalidSetError(error_msg)
    if np.any(lower > upper):
        error_msg = f"盒约束上下界交叉: lo={lower}, hi={upper}"
        logger.error(error_msg)
        raise InvalidSetError(error_msg)

    def project(x: Point) -> Point:
        return np.clip(x, lower, upper)

    return ConvexSet(dimension=lower.size, projector=project, name="box")


def affine_subspace(A: Sequence[Sequence[float]], b: Sequence[float]) -> ConvexSet:
    """
    仿射子空间 {x : Ax = b}

    投影 x − Aᵀ(AAᵀ)⁺(Ax − b) 通过稠密最小二乘求解, 每次调用重新计算。

    异常:
        InconsistentSystemError: 最小二乘残差超过 1e-8 时抛出
    """
    matrix = np.atleast_2d(np.array(A, dtype=np.float64))
    rhs = np.atleast_1d(np.array(b, dtype=np.float64))
    if matrix.ndim != 2 or rhs.shape != (matrix.shape[0],):
        error_msg = f"仿射约束形状不匹配: A{matrix.shape}, b{rhs.shape}"
        logger.error(error_msg)
        raise InvalidSetError(error_msg)
    if not (np.all(np.isfinite(matrix)) and np.all(np.isfinite(rhs))):
        error_msg = "仿射约束含非有限值"
        logger.error(error_msg)
        raise InvalidSetError(error_msg)

    particular, *_ = np.linalg.lstsq(matrix, rhs, rcond=None)
    residual = float(np.linalg.norm(matrix @ particular - rhs))
    if residual > 1e-8:
        error_msg = f"仿射方程组不相容, 最小二乘残差 {residual:.3e}"
        logger.error(error_msg)
        raise InconsistentSystemError(error_msg)

    def project(x: Point) -> Point:
        correction, *_ = np.linalg.lstsq(matrix, matrix @ x - rhs, rcond=None)
        return x - correction

    m, d = matrix.shape
    return ConvexSet(dimension=d, projector=project, name=f"affine(m={m})")


def product_set(sets: Sequence[ConvexSet]) -> ConvexSet:
    """
    乘积集 C_1 × ... × C_n ⊂ ℝ^{d·n}, 逐块投影

    异常:
        InvalidSetError: 列表为空或各集合维度不一致时抛出
    """
    members: List[ConvexSet] = list(sets)
    if not members:
        error_msg = "乘积集至少需要一个集合"
        logger.error(error_msg)
        raise InvalidSetError(error_msg)
    d = members[0].dimension
    if any(s.dimension != d for s in members):
        error_msg = f"乘积集成员维度不一致: {[s.dimension for s in members]}"
        logger.error(error_msg)
        raise InvalidSetError(error_msg)

    def project(y: Point) -> Point:
        blocks = y.reshape(len(members), d)
        return np.concatenate([s.project(block) for s, block in zip(members, blocks)])

    n = len(members)
    return ConvexSet(dimension=d * n, projector=project, name=f"product(n={n})")


def diagonal_set(d: int, n: int) -> ConvexSet:
    """对角集 {(y¹, ..., yⁿ) : y¹ = ... = yⁿ}, 投影为块平均"""
    if d < 1 or n < 1:
        error_msg = f"对角集要求 d, n ≥ 1: d={d}, n={n}"
        logger.error(error_msg)
        raise InvalidSetError(error_msg)

    def project(y: Point) -> Point:
        mean = y.reshape(n, d).mean(axis=0)
        return np.tile(mean, n)

    return ConvexSet(dimension=d * n, projector=project, name=f"diagonal(d={d},n={n})")


def first_block(y: npt.NDArray[np.float64], d: int) -> npt.NDArray[np.float64]:
    """取乘积空间点(或点列)的第一块"""
    return np.asarray(y)[..., :d]
