"""
凸函数预言机模块 - 负责问题 min g(x) + f(x) 中光滑部分 f 与可求近端部分 g

主要功能：
1. SmoothOracle: 函数值、梯度、梯度Lipschitz常数上界
2. ProxableOracle: 函数值(可为+∞)、近端映射 prox_{αg}
3. 内置目录: quadratic / half_sq_dist / sum / zero / indicator / l1

注意：Lipschitz常数按上界存储, 低估会破坏步长保证, 高估是安全的
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from .core import DimensionMismatchError, Point, SelfContractError, as_point
from .sets import ConvexSet

logger = logging.getLogger("ConvexOracles")

# 幂迭代次数与膨胀系数
POWER_ITERATIONS = 200
LIPSCHITZ_INFLATION = 1.01
# 指示函数成员判定容差
MEMBERSHIP_TOLERANCE = 1e-9


class OracleError(SelfContractError):
    """预言机相关错误的基类"""
    pass


class NotSymmetricError(OracleError, ValueError):
    """二次型矩阵不对称时抛出"""
    pass


class NotPSDError(OracleError, ValueError):
    """二次型矩阵出现负特征方向时抛出"""
    pass


class EmptyOracleListError(OracleError, ValueError):
    """求和的预言机列表为空时抛出"""
    pass


@dataclass(frozen=True)
class SmoothOracle:
    """
    可微凸函数 f, 梯度 L-Lipschitz

    属性:
        dimension (int): 定义域维度
        value_fn: x ↦ f(x)
        grad_fn: x ↦ ∇f(x)
        lipschitz (float): 梯度Lipschitz常数的上界 L > 0
        name (str): 描述
    """

    dimension: int
    value_fn: Callable[[Point], float]
    grad_fn: Callable[[Point], Point]
    lipschitz: float
    name: str = "f"

    def eval(self, x: Point) -> float:
        return float(self.value_fn(np.asarray(x, dtype=np.float64)))

    def grad(self, x: Point) -> Point:
        gradient = self.grad_fn(np.asarray(x, dtype=np.float64))
        return np.asarray(gradient, dtype=np.float64)


@dataclass(frozen=True)
class ProxableOracle:
    """
    正常、凸、下半连续函数 g, 取值于扩展实数

    属性:
        dimension (Optional[int]): 定义域维度, None 表示对任意维度适用
        value_fn: x ↦ g(x), 域外返回 math.inf
        prox_fn: (α, v) ↦ argmin_z g(z) + ‖z − v‖²/(2α)
        name (str): 描述
    """

    dimension: Optional[int]
    value_fn: Callable[[Point], float]
    prox_fn: Callable[[float, Point], Point]
    name: str = "g"

    def eval(self, x: Point) -> float:
        return float(self.value_fn(np.asarray(x, dtype=np.float64)))

    def prox(self, alpha: float, v: Point) -> Point:
        if not alpha > 0:
            error_msg = f"{self.name}: 近端参数必须为正, 实际 {alpha}"
            logger.error(error_msg)
            raise OracleError(error_msg)
        image = self.prox_fn(float(alpha), np.asarray(v, dtype=np.float64))
        return np.asarray(image, dtype=np.float64)


@dataclass(frozen=True)
class ObjectivePair:
    """复合目标 g + f, 两部分维度一致"""

    f: SmoothOracle
    g: ProxableOracle

    def __post_init__(self) -> None:
        if self.g.dimension is not None and self.g.dimension != self.f.dimension:
            error_msg = f"f 与 g 维度不一致: {self.f.dimension} vs {self.g.dimension}"
            logger.error(error_msg)
            raise OracleError(error_msg)

    @property
    def dimension(self) -> int:
        return self.f.dimension

    def eval(self, x: Point) -> float:
        """(g + f)(x), g 为 +∞ 时直接返回 +∞"""
        g_value = self.g.eval(x)
        if math.isinf(g_value):
            return g_value
        return g_value + self.f.eval(x)


def _largest_eigenvalue(matrix: np.ndarray) -> float:
    """幂迭代估计对称半正定矩阵的最大特征值(Rayleigh商)"""
    rng = np.random.default_rng(0)
    v = rng.standard_normal(matrix.shape[0])
    v /= np.linalg.norm(v)
    estimate = 0.0
    for _ in range(POWER_ITERATIONS):
        w = matrix @ v
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0
        estimate = float(v @ w)
        v = w / norm
    return max(estimate, float(v @ (matrix @ v)))


def quadratic(
    Q: Sequence[Sequence[float]],
    b: Optional[Sequence[float]] = None,
    c: float = 0.0,
) -> SmoothOracle:
    """
    二次函数 ½⟨x, Qx⟩ + ⟨b, x⟩ + c

    参数:
        Q: 对称半正定 d×d 矩阵
        b: 线性项, 默认为零
        c: 常数项

    返回:
        SmoothOracle: lipschitz 为幂迭代估计的最大特征值乘以 1.01

    异常:
        NotSymmetricError: Q 不对称时抛出
        NotPSDError: 最小特征值低于 −1e-12·(1 + max|Q_ij|) 时抛出
        DimensionMismatchError: Q 非方阵或 b 维度不符时抛出
    """
    matrix = np.atleast_2d(np.array(Q, dtype=np.float64))
    d = matrix.shape[0]
    if matrix.shape != (d, d):
        error_msg = f"二次型矩阵必须为方阵, 实际形状: {matrix.shape}"
        logger.error(error_msg)
        raise DimensionMismatchError(error_msg)
    scale = 1.0 + float(np.max(np.abs(matrix)))
    if not np.allclose(matrix, matrix.T, rtol=0.0, atol=1e-12 * scale):
        error_msg = "二次型矩阵不对称"
        logger.error(error_msg)
        raise NotSymmetricError(error_msg)
    linear = np.zeros(d) if b is None else np.array(as_point(b))
    if linear.shape != (d,):
        error_msg = f"线性项维度 {linear.shape[0]} 与矩阵维度 {d} 不符"
        logger.error(error_msg)
        raise DimensionMismatchError(error_msg)

    smallest = float(np.linalg.eigvalsh(matrix).min())
    if smallest < -1e-12 * scale:
        error_msg = f"二次型矩阵非半正定: 最小特征值 {smallest:.6g}"
        logger.error(error_msg)
        raise NotPSDError(error_msg)

    top = _largest_eigenvalue(matrix)
    lipschitz = LIPSCHITZ_INFLATION * top if top > 0 else 1.0
    constant = float(c)

    def value(x: Point) -> float:
        return 0.5 * float(x @ (matrix @ x)) + float(linear @ x) + constant

    def grad(x: Point) -> Point:
        return matrix @ x + linear

    return SmoothOracle(
        dimension=d, value_fn=value, grad_fn=grad, lipschitz=lipschitz, name="quadratic"
    )


def half_squared_distance(C: ConvexSet) -> SmoothOracle:
    """f = ½ d_C², 满足 Id − ∇f = P_C, 梯度 1-Lipschitz"""

    def value(x: Point) -> float:
        gap = x - C.project(x)
        return 0.5 * float(gap @ gap)

    def grad(x: Point) -> Point:
        return x - C.project(x)

    return SmoothOracle(
        dimension=C.dimension,
        value_fn=value,
        grad_fn=grad,
        lipschitz=1.0,
        name=f"half_sq_dist[{C.name}]",
    )


def sum_smooth(oracles: Sequence[SmoothOracle]) -> SmoothOracle:
    """
    光滑函数之和, Lipschitz上界为各分量上界之和

    异常:
        EmptyOracleListError: 列表为空时抛出
        OracleError: 维度不一致时抛出
    """
    terms: List[SmoothOracle] = list(oracles)
    if not terms:
        error_msg = "求和的光滑函数列表不能为空"
        logger.error(error_msg)
        raise EmptyOracleListError(error_msg)
    d = terms[0].dimension
    if any(t.dimension != d for t in terms):
        error_msg = f"求和的光滑函数维度不一致: {[t.dimension for t in terms]}"
        logger.error(error_msg)
        raise OracleError(error_msg)
    if len(terms) == 1:
        return terms[0]

    def value(x: Point) -> float:
        return sum(t.eval(x) for t in terms)

    def grad(x: Point) -> Point:
        total = terms[0].grad(x)
        for t in terms[1:]:
            total = total + t.grad(x)
        return total

    return SmoothOracle(
        dimension=d,
        value_fn=value,
        grad_fn=grad,
        lipschitz=sum(t.lipschitz for t in terms),
        name="sum(" + ", ".join(t.name for t in terms) + ")",
    )


def zero_smooth(d: int) -> SmoothOracle:
    """f ≡ 0, Lipschitz常数取 1"""
    if d < 1:
        error_msg = f"维度必须 ≥ 1: {d}"
        logger.error(error_msg)
        raise OracleError(error_msg)
    return SmoothOracle(
        dimension=d,
        value_fn=lambda x: 0.0,
        grad_fn=lambda x: np.zeros_like(x),
        lipschitz=1.0,
        name="zero",
    )


def indicator(C: ConvexSet) -> ProxableOracle:
    """指示函数 δ_C: 集合内为0, 集合外为+∞; 近端映射即投影, 与 α 无关"""

    def value(x: Point) -> float:
        return 0.0 if C.contains(x, MEMBERSHIP_TOLERANCE) else math.inf

    def prox(alpha: float, v: Point) -> Point:
        return C.project(v)

    return ProxableOracle(
        dimension=C.dimension,
        value_fn=value,
        prox_fn=prox,
        name=f"indicator[{C.name}]",
    )


def l1_norm(weight: float = 1.0, dimension: Optional[int] = None) -> ProxableOracle:
    """weight·‖x‖₁, 近端映射为阈值 α·weight 的逐分量软阈值"""
    w = float(weight)
    if not w > 0:
        error_msg = f"l1 权重必须为正: {weight}"
        logger.error(error_msg)
        raise OracleError(error_msg)

    def value(x: Point) -> float:
        return w * float(np.sum(np.abs(x)))

    def prox(alpha: float, v: Point) -> Point:
        return np.sign(v) * np.maximum(np.abs(v) - alpha * w, 0.0)

    return ProxableOracle(
        dimension=dimension, value_fn=value, prox_fn=prox, name=f"l1(w={w:g})"
    )


def zero_proxable(d: int) -> ProxableOracle:
    """g ≡ 0, 近端映射为恒等"""
    if d < 1:
        error_msg = f"维度必须 ≥ 1: {d}"
        logger.error(error_msg)
        raise OracleError(error_msg)
    return ProxableOracle(
        dimension=d,
        value_fn=lambda x: 0.0,
        prox_fn=lambda alpha, v: v.copy(),
        name="zero",
    )
