"""
轨迹分析模块 - 负责自收缩性判定、长度/直径度量以及各不等式的运行时审计

主要功能：
1. 自收缩判定: O(K²) 相邻对检查, 以及 O(K³) 三元组暴力参照
2. Fejér单调性、尾部长度、步长统计
3. 下降引理、二次衰减、回溯判据、目标单调性的审计
4. 汇总报告 TrajectoryReport

注意：x_∞ 用最后一个迭代点近似, 报告字段命名为 distance_x0_to_last
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import numpy.typing as npt

from .core import (
    DimensionMismatchError,
    Point,
    SelfContractError,
    Trajectory,
    diameter,
    distance,
    length,
    pairwise_distances,
    step_lengths,
)
from .oracles import ObjectivePair, ProxableOracle, SmoothOracle

logger = logging.getLogger("TrajectoryAnalysis")

DEFAULT_TOLERANCE = 1e-9


class AnalysisError(SelfContractError):
    """分析相关错误的基类"""
    pass


class MissingStepsizesError(AnalysisError, ValueError):
    """审计需要步长而轨迹未记录时抛出"""
    pass


class GridDimensionError(AnalysisError, ValueError):
    """网格暴力近端求解的维度超过2时抛出"""
    pass


@dataclass(frozen=True)
class SelfContractionVerdict:
    """
    自收缩判定结果

    违例量定义为 e = d(x_m, x_{k+1}) − d(x_m, x_k) − tol·d(x_m, x_k),
    max_violation = max(0, max e);
    因而 is_self_contracted ⟺ max_violation ≤ tolerance_used。
    """

    is_self_contracted: bool
    max_violation: float
    witness: Optional[Tuple[int, int]]
    tolerance_used: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "is_self_contracted": self.is_self_contracted,
            "max_violation": self.max_violation,
            "witness": None if self.witness is None else list(self.witness),
            "tolerance_used": self.tolerance_used,
        }


@dataclass(frozen=True)
class TrajectoryReport:
    """轨迹度量汇总"""

    length: float
    diameter: float
    length_diameter_ratio: float
    distance_x0_to_last: float
    fejer_max_violation: Optional[float]
    self_contraction: SelfContractionVerdict
    distance_x0_to_hint: Optional[float] = None
    final_step: float = 0.0
    iterations: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "length": self.length,
            "diameter": self.diameter,
            "length_diameter_ratio": self.length_diameter_ratio,
            "distance_x0_to_last": self.distance_x0_to_last,
            "fejer_max_violation": self.fejer_max_violation,
            "self_contraction": self.self_contraction.to_dict(),
            "distance_x0_to_hint": self.distance_x0_to_hint,
            "final_step": self.final_step,
            "iterations": self.iterations,
        }


def _anchor_gaps(
    points: npt.NDArray[np.float64], m: int
) -> Tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """锚点 m 上相邻对 (k, k+1), k < m 的 (d(x_m, x_{k+1}) − d(x_m, x_k), d(x_m, x_k))"""
    radii = np.linalg.norm(points[: m + 1] - points[m], axis=1)
    return radii[1:] - radii[:-1], radii[:-1]


def check_self_contracted(
    t: Trajectory, tol: float = DEFAULT_TOLERANCE
) -> SelfContractionVerdict:
    """
    判定轨迹是否自收缩

    利用等价刻画: 序列自收缩当且仅当对每个锚点 m, k ↦ d(x_m, x_k) 在 0..m 上非增;
    因此只需检查相邻对 (k, k+1) 与其后的每个锚点 m, 复杂度 O(K²), 内存 O(K)。
    相对容差: 原始违例 d(x_m, x_{k+1}) − d(x_m, x_k) 与 tol·(1 + d(x_m, x_k)) 比较。

    参数:
        t (Trajectory): 待判定轨迹
        tol (float): 非负容差

    返回:
        SelfContractionVerdict: 判定结果, 违例时 witness 为达到最大违例的 (k, m)
    """
    if tol < 0:
        error_msg = f"容差必须非负: {tol}"
        logger.error(error_msg)
        raise AnalysisError(error_msg)
    worst = -math.inf
    witness: Optional[Tuple[int, int]] = None
    for m in range(1, len(t)):
        raw, far = _anchor_gaps(t.points, m)
        excess = raw - tol * far
        k = int(np.argmax(excess))
        if excess[k] > worst:
            worst = float(excess[k])
            witness = (k, m)
    if witness is None:
        return SelfContractionVerdict(True, 0.0, None, tol)
    if worst > tol:
        logger.info(
            f"{t.label or '轨迹'}: 自收缩被否定, "
            f"见证 (k={witness[0]}, m={witness[1]}), 违例 {worst:.3e}"
        )
        return SelfContractionVerdict(False, worst, witness, tol)
    return SelfContractionVerdict(True, max(0.0, worst), None, tol)


def list_violations(
    t: Trajectory, tol: float = DEFAULT_TOLERANCE
) -> List[Tuple[int, int, float]]:
    """
    列出所有违例的三元组 (k, k+1, m), 以 (k, m, 原始违例量) 表示, 按 (m, k) 排序
    """
    found: List[Tuple[int, int, float]] = []
    for m in range(1, len(t)):
        raw, far = _anchor_gaps(t.points, m)
        for k in np.nonzero(raw - tol * far > tol)[0]:
            found.append((int(k), m, float(raw[k])))
    return found


def brute_force_self_contracted(t: Trajectory, tol: float = DEFAULT_TOLERANCE) -> bool:
    """O(K³) 逐三元组 k₁ ≤ k₂ ≤ k₃ 检查, 与 check_self_contracted 使用相同的相对容差"""
    dist = pairwise_distances(t)
    count = len(t)
    for k3 in range(count):
        for k2 in range(k3 + 1):
            for k1 in range(k2 + 1):
                if dist[k3, k2] - dist[k3, k1] > tol * (1.0 + dist[k3, k1]):
                    return False
    return True


def check_fejer(t: Trajectory, z: Point) -> float:
    """
    Fejér单调性: max_k d(x_{k+1}, z) − d(x_k, z)

    返回值 ≤ 容差即表示朝 z 的Fejér单调; 严格下降时为负, 单点轨迹返回 0。

    异常:
        DimensionMismatchError: 维度不一致时抛出
    """
    target = np.asarray(z, dtype=np.float64)
    if target.shape != (t.dimension,):
        error_msg = f"Fejér目标点维度 {target.shape} 与轨迹维度 {t.dimension} 不符"
        logger.error(error_msg)
        raise DimensionMismatchError(error_msg)
    if len(t) < 2:
        return 0.0
    radii = np.linalg.norm(t.points - target, axis=1)
    return float(np.max(np.diff(radii)))


def tail_lengths(t: Trajectory) -> List[float]:
    """尾部长度 Σ_{j≥k} ‖x_{j+1} − x_j‖, 下标 k = 0..K, 末项为 0"""
    steps = step_lengths(t)
    tails = np.concatenate([np.cumsum(steps[::-1])[::-1], [0.0]])
    return [float(v) for v in tails]


def stepsize_summary(t: Trajectory) -> Dict[str, float]:
    """步长之和、最小值、最大值(用于观察步长是否可和)"""
    if t.stepsizes is None or t.stepsizes.size == 0:
        return {"sum": 0.0, "min": 0.0, "max": 0.0}
    return {
        "sum": float(np.sum(t.stepsizes)),
        "min": float(np.min(t.stepsizes)),
        "max": float(np.max(t.stepsizes)),
    }


def _require_stepsizes(t: Trajectory) -> npt.NDArray[np.float64]:
    if t.stepsizes is None:
        error_msg = f"轨迹 {t.label!r} 未记录步长, 无法审计"
        logger.error(error_msg)
        raise MissingStepsizesError(error_msg)
    return t.stepsizes


def _sample_box(t: Trajectory, z_samples: int, seed: int) -> npt.NDArray[np.float64]:
    """在轨迹包围盒向外扩张 2·diameter 的盒中均匀采样"""
    radius = 2.0 * diameter(t)
    if radius == 0.0:
        radius = 1.0
    lo = t.points.min(axis=0) - radius
    hi = t.points.max(axis=0) + radius
    rng = np.random.default_rng(seed)
    return rng.uniform(lo, hi, size=(z_samples, t.dimension))


def _audit_cloud(
    g: ProxableOracle, t: Trajectory, z_samples: int, seed: int
) -> npt.NDArray[np.float64]:
    """各步共用的检验点: 随机 z、它们在 prox_g 下的像(落在 dom g 内)与末迭代点"""
    samples = _sample_box(t, z_samples, seed)
    images = [g.prox(1.0, row) for row in samples]
    if not images:
        return t.points[-1:].copy()
    return np.vstack([samples, *images, t.points[-1:]])


def _worst_gap(left: npt.NDArray[np.float64], right: npt.NDArray[np.float64]) -> float:
    """max(left − right), 按扩展实数约定: 右侧为 +∞ 的项不构成违例"""
    with np.errstate(invalid="ignore"):
        gap = np.where(np.isinf(right), -np.inf, left - right)
    return float(np.max(gap))


def _squared_to(x: Point, cloud: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    diff = cloud - x
    return np.einsum("ij,ij->i", diff, diff)


def audit_decrease_lemma(
    pair: ObjectivePair, t: Trajectory, z_samples: int = 100, seed: int = 0
) -> float:
    """
    审计下降不等式
    (g+f)(x⁺) + ‖x⁺ − z‖²/(2α) ≤ (g+f)(z) + ‖x − z‖²/(2α)

    参数:
        pair (ObjectivePair): 生成轨迹的目标
        t (Trajectory): 记录了步长的轨迹
        z_samples (int): 随机检验点数量(各步共用, 另加每步的 x_k)
        seed (int): 随机种子

    返回:
        float: 最大正违例(左减右), 全部满足时为 0

    异常:
        MissingStepsizesError: 轨迹未记录步长时抛出
    """
    alphas = _require_stepsizes(t)
    cloud = _audit_cloud(pair.g, t, z_samples, seed)
    cloud_values = np.array([pair.eval(z) for z in cloud])
    worst = 0.0
    for k, alpha in enumerate(alphas):
        x, x_plus = t.points[k], t.points[k + 1]
        z = np.vstack([cloud, x[None, :]])
        values = np.append(cloud_values, pair.eval(x))
        left = pair.eval(x_plus) + _squared_to(x_plus, z) / (2 * alpha)
        right = values + _squared_to(x, z) / (2 * alpha)
        worst = max(worst, _worst_gap(left, right))
    logger.info(f"{t.label or '轨迹'}: 下降引理最大违例 {worst:.3e}")
    return worst


def audit_quadratic_decay(
    pair: ObjectivePair, t: Trajectory, z_samples: int = 100, seed: int = 0
) -> float:
    """
    审计二次衰减: 对模型 Φ_x(z) = g(z) + ⟨∇f(x), z − x⟩ + ‖z − x‖²/(2α) 及其极小点 x⁺,
    Φ_x(x⁺) + ‖x⁺ − z‖²/(2α) ≤ Φ_x(z)

    返回:
        float: 最大正违例
    """
    alphas = _require_stepsizes(t)
    cloud = _audit_cloud(pair.g, t, z_samples, seed)
    cloud_g = np.array([pair.g.eval(z) for z in cloud])
    worst = 0.0
    for k, alpha in enumerate(alphas):
        x, x_plus = t.points[k], t.points[k + 1]
        grad_x = pair.f.grad(x)
        z = np.vstack([cloud, x[None, :]])
        g_values = np.append(cloud_g, pair.g.eval(x))
        model = g_values + (z - x) @ grad_x + _squared_to(x, z) / (2 * alpha)
        move = x_plus - x
        model_plus = (
            pair.g.eval(x_plus)
            + float(grad_x @ move)
            + float(move @ move) / (2 * alpha)
        )
        left = model_plus + _squared_to(x_plus, z) / (2 * alpha)
        worst = max(worst, _worst_gap(left, model))
    return worst


def audit_descent_lemma(f: SmoothOracle, t: Trajectory) -> float:
    """
    逐步复核回溯判据(下降引理的上界形式):
    f(x_{k+1}) ≤ f(x_k) + ⟨∇f(x_k), x_{k+1} − x_k⟩ + ‖x_{k+1} − x_k‖²/(2α_k)

    返回:
        float: 最大的 左 − 右(可能为负); 单点轨迹返回 −∞
    """
    alphas = _require_stepsizes(t)
    worst = -math.inf
    for k, alpha in enumerate(alphas):
        x, x_plus = t.points[k], t.points[k + 1]
        move = x_plus - x
        bound = f.eval(x) + float(f.grad(x) @ move) + float(move @ move) / (2 * alpha)
        worst = max(worst, f.eval(x_plus) - bound)
    return worst


def audit_objective_monotonicity(t: Trajectory) -> float:
    """max_k obj_{k+1} − obj_k; 记录值中的 +∞ 按序比较"""
    if t.objective_values is None:
        error_msg = f"轨迹 {t.label!r} 未记录目标值"
        logger.error(error_msg)
        raise AnalysisError(error_msg)
    values = t.objective_values
    if values.size < 2:
        return -math.inf
    return _worst_gap(values[1:], values[:-1])


def brute_force_prox(
    g: ProxableOracle, alpha: float, v: Point, lo: float, hi: float, step: float
) -> Point:
    """
    网格暴力求 argmin_z g(z) + ‖z − v‖²/(2α), 仅用于测试中独立校验近端映射

    异常:
        GridDimensionError: v 的维度大于2时抛出
    """
    target = np.atleast_1d(np.asarray(v, dtype=np.float64))
    if target.size > 2:
        error_msg = f"网格暴力近端仅支持1维或2维, 实际 {target.size}"
        logger.error(error_msg)
        raise GridDimensionError(error_msg)
    if not (lo < hi and step > 0):
        error_msg = f"网格参数非法: lo={lo}, hi={hi}, step={step}"
        logger.error(error_msg)
        raise AnalysisError(error_msg)
    axis = lo + step * np.arange(int(math.floor((hi - lo) / step + 1e-9)) + 1)
    if target.size == 1:
        grid = axis[:, None]
    else:
        xs, ys = np.meshgrid(axis, axis, indexing="ij")
        grid = np.column_stack([xs.ravel(), ys.ravel()])
    penalty = np.sum((grid - target) ** 2, axis=1) / (2 * alpha)
    values = np.array([g.eval(z) for z in grid]) + penalty
    return grid[int(np.argmin(values))].copy()


def report(
    t: Trajectory,
    solution_hint: Optional[Point] = None,
    tol: float = DEFAULT_TOLERANCE,
) -> TrajectoryReport:
    """
    汇总轨迹度量: 长度、直径、长度/直径比、d(x_0, x_K)、Fejér违例与自收缩判定

    参数:
        t (Trajectory): 轨迹
        solution_hint (Optional[Point]): 已知极小点(可选)
        tol (float): 自收缩判定容差

    返回:
        TrajectoryReport: 直径为0时比值记为0
    """
    total = length(t)
    diam = diameter(t)
    ratio = total / diam if diam > 0 else 0.0
    fejer = None
    to_hint = None
    if solution_hint is not None:
        hint = np.asarray(solution_hint, dtype=np.float64)
        fejer = check_fejer(t, hint)
        to_hint = distance(t.points[0], hint)
    steps = step_lengths(t)
    result = TrajectoryReport(
        length=total,
        diameter=diam,
        length_diameter_ratio=ratio,
        distance_x0_to_last=distance(t.points[0], t.points[-1]),
        fejer_max_violation=fejer,
        self_contraction=check_self_contracted(t, tol),
        distance_x0_to_hint=to_hint,
        final_step=float(steps[-1]) if steps.size else 0.0,
        iterations=t.num_steps,
    )
    logger.info(
        f"{t.label or '轨迹'}: 长度 {total:.6g}, 直径 {diam:.6g}, 比值 {ratio:.6g}, "
        f"自收缩 {result.self_contraction.is_self_contracted}"
    )
    return result
