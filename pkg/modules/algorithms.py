"""
迭代算法模块 - 负责近端梯度族与投影类算法, 每个运行器产出确定性的轨迹

主要功能：
1. 近端梯度算子 T_α(x) = prox_{αg}(x − α∇f(x)) 及固定/显式/自动步长运行器
2. 回溯线搜索版本(每次迭代从 alpha_init 重新开始)
3. 特例: 近端点算法、最速下降
4. 交替投影、平均投影(直接/梯度/乘积空间三种实现)、循环投影基线

注意：运行器内部没有任何随机成分, 相同输入得到逐位相同的轨迹
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np

from .core import Point, SelfContractError, Trajectory, TrajectoryBuilder, as_point
from .oracles import (
    ObjectivePair,
    ProxableOracle,
    SmoothOracle,
    half_squared_distance,
    indicator,
    sum_smooth,
    zero_proxable,
    zero_smooth,
)
from .sets import ConvexSet, diagonal_set, first_block, product_set

logger = logging.getLogger("ProxGradRunners")

# 步长上界校验的相对浮点余量
GUARANTEE_SLACK = 1e-12
# 回溯判据中 f 值比较的舍入余量(相对 |f|)
BACKTRACK_ROUNDOFF = 8 * float(np.finfo(np.float64).eps)
# 二次项不超过该倍数的舍入余量时, 函数值比较不可信
ROUNDOFF_BAND = 1e4


class AlgorithmError(SelfContractError):
    """算法运行相关错误的基类"""
    pass


class InvalidParameterError(AlgorithmError, ValueError):
    """步长、停止规则或回溯参数非法时抛出"""
    pass


class GuaranteeViolationError(AlgorithmError):
    """要求理论保证时步长超过 1/L 抛出"""

    def __init__(self, k: int, alpha: float, lipschitz: float):
        self.k = k
        self.alpha = alpha
        self.lipschitz = lipschitz
        super().__init__(f"第 {k} 步步长 α_k={alpha:.6g} 超过 1/L={1.0 / lipschitz:.6g}")


class BacktrackingExhaustedError(AlgorithmError):
    """回溯收缩次数超过上限时抛出(梯度非Lipschitz或预言机配置错误)"""
    pass


@dataclass(frozen=True)
class StepsizeSchedule:
    """
    步长序列

    kind 为 "fixed"(常数 alpha)、"explicit"(显式列表 alphas, 用尽后沿用最后一项)
    或 "auto"(fraction·1/L)。
    """

    kind: Literal["fixed", "explicit", "auto"]
    alpha: Optional[float] = None
    alphas: Tuple[float, ...] = ()
    fraction: float = 1.0

    def __post_init__(self) -> None:
        if self.kind == "fixed":
            alpha = self.alpha
            if alpha is None or not alpha > 0 or not math.isfinite(alpha):
                error_msg = f"固定步长必须为正: {self.alpha}"
                logger.error(error_msg)
                raise InvalidParameterError(error_msg)
        elif self.kind == "explicit":
            object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
            valid = all(a > 0 and math.isfinite(a) for a in self.alphas)
            if not self.alphas or not valid:
                error_msg = "显式步长列表必须非空且全部为正"
                logger.error(error_msg)
                raise InvalidParameterError(error_msg)
        elif self.kind == "auto":
            if not 0 < self.fraction or not math.isfinite(self.fraction):
                error_msg = f"自动步长比例必须为正: {self.fraction}"
                logger.error(error_msg)
                raise InvalidParameterError(error_msg)
        else:
            error_msg = f"未知步长类型: {self.kind}"
            logger.error(error_msg)
            raise InvalidParameterError(error_msg)

    @classmethod
    def fixed(cls, alpha: float) -> "StepsizeSchedule":
        return cls(kind="fixed", alpha=float(alpha))

    @classmethod
    def explicit(cls, alphas: Sequence[float]) -> "StepsizeSchedule":
        return cls(kind="explicit", alphas=tuple(alphas))

    @classmethod
    def auto(cls, fraction: float = 1.0) -> "StepsizeSchedule":
        return cls(kind="auto", fraction=float(fraction))

    def stepsize(self, k: int, lipschitz: float) -> float:
        if self.kind == "fixed":
            return float(self.alpha)  # type: ignore[arg-type]
        if self.kind == "explicit":
            return self.alphas[min(k, len(self.alphas) - 1)]
        return self.fraction * (1.0 / lipschitz)


@dataclass(frozen=True)
class StopRule:
    """停止规则: 达到 max_iters 或 ‖x_{k+1} − x_k‖ ≤ step_tolerance"""

    max_iters: int = 10000
    step_tolerance: float = 1e-12

    def __post_init__(self) -> None:
        if self.max_iters < 1:
            error_msg = f"max_iters 必须 ≥ 1: {self.max_iters}"
            logger.error(error_msg)
            raise InvalidParameterError(error_msg)
        if not self.step_tolerance >= 0:
            error_msg = f"step_tolerance 必须非负: {self.step_tolerance}"
            logger.error(error_msg)
            raise InvalidParameterError(error_msg)


@dataclass(frozen=True)
class BacktrackParams:
    """回溯参数: 初始步长 α, 收缩因子 0 < q < 1, 最大收缩次数"""

    alpha_init: float
    shrink: float = 0.5
    max_shrinks: int = 60

    def __post_init__(self) -> None:
        if not self.alpha_init > 0 or not math.isfinite(self.alpha_init):
            error_msg = f"alpha_init 必须为正: {self.alpha_init}"
            logger.error(error_msg)
            raise InvalidParameterError(error_msg)
        if not 0 < self.shrink < 1:
            error_msg = f"收缩因子必须满足 0 < q < 1: {self.shrink}"
            logger.error(error_msg)
            raise InvalidParameterError(error_msg)
        if self.max_shrinks < 1:
            error_msg = f"max_shrinks 必须 ≥ 1: {self.max_shrinks}"
            logger.error(error_msg)
            raise InvalidParameterError(error_msg)


def prox_grad_step(pair: ObjectivePair, alpha: float, x: Point) -> Point:
    """
    近端梯度算子 T_α(x) = prox_{αg}(x − α∇f(x))

    参数:
        pair (ObjectivePair): 目标 g + f
        alpha (float): 步长 α > 0
        x (Point): 当前点

    返回:
        Point: 下一迭代点
    """
    if not alpha > 0:
        error_msg = f"步长必须为正: {alpha}"
        logger.error(error_msg)
        raise InvalidParameterError(error_msg)
    x = np.asarray(x, dtype=np.float64)
    return pair.g.prox(alpha, x - alpha * pair.f.grad(x))


def _iterate(
    pair: ObjectivePair,
    x0: Point,
    choose_step: Callable[[int, Point], Tuple[float, Point]],
    stop: StopRule,
    label: str,
) -> Trajectory:
    """公共迭代循环: choose_step(k, x_k) 返回 (α_k, x_{k+1})"""
    x = np.array(as_point(x0))
    if x.shape != (pair.dimension,):
        error_msg = f"初始点维度 {x.size} 与问题维度 {pair.dimension} 不符"
        logger.error(error_msg)
        raise InvalidParameterError(error_msg)
    builder = TrajectoryBuilder(x, label=label, objective=pair.eval(x))
    stop_reason = "max_iters"
    for k in range(stop.max_iters):
        alpha, x_next = choose_step(k, x)
        builder.append(x_next, stepsize=alpha, objective=pair.eval(x_next))
        step = float(np.linalg.norm(x_next - x))
        x = x_next
        if step <= stop.step_tolerance:
            stop_reason = "step_tolerance"
            break
    builder.info["stop_reason"] = stop_reason
    trajectory = builder.freeze()
    logger.info(f"{label}: 完成 {trajectory.num_steps} 步, 停止原因 {stop_reason}")
    return trajectory


def run_prox_grad(
    pair: ObjectivePair,
    x0: Point,
    schedule: StepsizeSchedule,
    stop: StopRule = StopRule(),
    enforce_guarantee: bool = True,
    label: str = "prox_grad",
) -> Trajectory:
    """
    近端梯度法 x_{k+1} = T_{α_k}(x_k)

    参数:
        pair (ObjectivePair): 目标 g + f
        x0 (Point): 初始点
        schedule (StepsizeSchedule): 步长序列
        stop (StopRule): 停止规则
        enforce_guarantee (bool): 为 True 时要求每个 α_k ≤ 1/L

    返回:
        Trajectory: 记录步长与目标值 (g+f)(x_k) 的轨迹

    异常:
        GuaranteeViolationError: 要求保证而步长越界时抛出, 附带 k 与 α_k
    """
    lipschitz = pair.f.lipschitz

    def choose_step(k: int, x: Point) -> Tuple[float, Point]:
        alpha = schedule.stepsize(k, lipschitz)
        if enforce_guarantee and alpha * lipschitz > 1.0 + GUARANTEE_SLACK:
            error = GuaranteeViolationError(k, alpha, lipschitz)
            logger.error(str(error))
            raise error
        return alpha, prox_grad_step(pair, alpha, x)

    return _iterate(pair, x0, choose_step, stop, label)


def _sufficient_decrease(
    f: SmoothOracle,
    x: Point,
    f_x: float,
    grad_x: Point,
    x_next: Point,
    alpha: float,
) -> bool:
    """
    回溯判据 f(x⁺) ≤ f(x) + ⟨∇f(x), x⁺ − x⟩ + ‖x⁺ − x‖²/(2α)

    先检验 ⟨∇f(x⁺) − ∇f(x), x⁺ − x⟩ ≤ ‖x⁺ − x‖²/(2α): 对凸 f 它蕴含原判据
    (t ↦ f(x + t·d) 的导数单调不减), 且不受 f 值舍入影响。
    不满足时, 只有二次项明显高于 f 值舍入量才按原判据比较函数值。
    """
    move = x_next - x
    quadratic_term = float(move @ move) / (2.0 * alpha)
    if float((f.grad(x_next) - grad_x) @ move) <= quadratic_term:
        return True
    f_next = f.eval(x_next)
    roundoff = BACKTRACK_ROUNDOFF * (1.0 + abs(f_x) + abs(f_next))
    if quadratic_term <= ROUNDOFF_BAND * roundoff:
        return False
    return f_next <= f_x + float(grad_x @ move) + quadratic_term + roundoff


def run_prox_grad_backtracking(
    pair: ObjectivePair,
    x0: Point,
    params: BacktrackParams,
    stop: StopRule = StopRule(),
    label: str = "prox_grad_backtracking",
) -> Trajectory:
    """
    带回溯线搜索的近端梯度法

    每次迭代令 α_k = alpha_init, 当
    f(T_α(x_k)) > f(x_k) + ⟨∇f(x_k), T_α(x_k) − x_k⟩ + ‖T_α(x_k) − x_k‖²/(2α)
    时令 α := q·α 并重新计算 T_α(x_k)。

    异常:
        BacktrackingExhaustedError: 收缩次数超过 max_shrinks 时抛出
    """
    shrink_counts: List[int] = []

    def choose_step(k: int, x: Point) -> Tuple[float, Point]:
        f_x = pair.f.eval(x)
        grad_x = pair.f.grad(x)
        alpha = params.alpha_init
        for shrinks in range(params.max_shrinks + 1):
            x_next = pair.g.prox(alpha, x - alpha * grad_x)
            if _sufficient_decrease(pair.f, x, f_x, grad_x, x_next, alpha):
                shrink_counts.append(shrinks)
                logger.debug(f"{label}: 第 {k} 步接受 α={alpha:.6g}, 收缩 {shrinks} 次")
                return alpha, x_next
            alpha *= params.shrink
        error_msg = f"{label}: 第 {k} 步回溯超过 {params.max_shrinks} 次仍未满足下降条件"
        logger.error(error_msg)
        raise BacktrackingExhaustedError(error_msg)

    trajectory = _iterate(pair, x0, choose_step, stop, label)
    info = dict(trajectory.info)
    info["shrinks"] = list(shrink_counts)
    return Trajectory(
        points=trajectory.points,
        stepsizes=trajectory.stepsizes,
        objective_values=trajectory.objective_values,
        label=trajectory.label,
        info=info,
    )


def run_proximal_point(
    g: ProxableOracle,
    x0: Point,
    schedule: StepsizeSchedule,
    stop: StopRule = StopRule(),
) -> Trajectory:
    """近端点算法 x_{k+1} = prox_{α_k g}(x_k), 即 f = 0 时的近端梯度法, 步长无上界要求"""
    x = as_point(x0)
    pair = ObjectivePair(f=zero_smooth(x.size), g=g)
    return run_prox_grad(
        pair, x, schedule, stop, enforce_guarantee=False, label="proximal_point"
    )


def run_gradient_descent(
    f: SmoothOracle,
    x0: Point,
    schedule: Union[StepsizeSchedule, BacktrackParams],
    stop: StopRule = StopRule(),
    enforce_guarantee: bool = False,
) -> Trajectory:
    """最速下降 x_{k+1} = x_k − α_k∇f(x_k), 即 g = 0 时的近端梯度法"""
    pair = ObjectivePair(f=f, g=zero_proxable(f.dimension))
    if isinstance(schedule, BacktrackParams):
        return run_prox_grad_backtracking(
            pair, x0, schedule, stop, label="gradient_descent"
        )
    return run_prox_grad(
        pair, x0, schedule, stop, enforce_guarantee, label="gradient_descent"
    )


def run_alternating_projections(
    A: ConvexSet,
    B: ConvexSet,
    x0: Point,
    stop: StopRule = StopRule(),
) -> Tuple[Trajectory, Trajectory]:
    """
    交替投影 y_{k+1} = P_A(x_k), x_{k+1} = P_B(y_{k+1})

    以近端梯度法实现: f = ½d_A² (L = 1), g = δ_B, α = 1;
    前向点 x_k − ∇f(x_k) = P_A(x_k) 即 y_{k+1}。

    返回:
        Tuple[Trajectory, Trajectory]: x 序列(含 x_0)与 y 序列(y_1, y_2, ...)
    """
    if A.dimension != B.dimension:
        error_msg = f"两个集合维度不一致: {A.dimension} vs {B.dimension}"
        logger.error(error_msg)
        raise InvalidParameterError(error_msg)
    pair = ObjectivePair(f=half_squared_distance(A), g=indicator(B))
    forward_points: List[Point] = []

    def choose_step(k: int, x: Point) -> Tuple[float, Point]:
        y_next = x - pair.f.grad(x)
        forward_points.append(y_next)
        return 1.0, pair.g.prox(1.0, y_next)

    x_traj = _iterate(pair, x0, choose_step, stop, "alternating_projections:x")
    y_traj = Trajectory(
        points=np.vstack(forward_points), label="alternating_projections:y"
    )
    return x_traj, y_traj


AveragingMode = Literal["direct", "gradient", "product"]


def run_averaged_projections(
    sets: Sequence[ConvexSet],
    x0: Point,
    stop: StopRule = StopRule(),
    mode: AveragingMode = "direct",
) -> Trajectory:
    """
    平均投影 x_{k+1} = (1/n) Σ P_{C_i}(x_k)

    mode:
        direct  - 直接套用平均公式
        gradient - 对 Σ ½d_{C_i}² 以固定步长 1/n 做梯度下降
        product - 在 ℝ^{d·n} 中对 (乘积集, 对角集) 做交替投影, 取 x 序列第一块

    返回:
        Trajectory: ℝ^d 中的轨迹
    """
    members = list(sets)
    if not members:
        error_msg = "平均投影至少需要一个集合"
        logger.error(error_msg)
        raise InvalidParameterError(error_msg)
    x = as_point(x0)
    d, n = x.size, len(members)
    if any(s.dimension != d for s in members):
        error_msg = f"集合维度与初始点维度 {d} 不一致"
        logger.error(error_msg)
        raise InvalidParameterError(error_msg)

    if mode == "direct":
        pair = ObjectivePair(
            f=sum_smooth([half_squared_distance(s) for s in members]),
            g=zero_proxable(d),
        )

        def choose_step(k: int, x_k: Point) -> Tuple[float, Point]:
            projections = np.vstack([s.project(x_k) for s in members])
            return 1.0 / n, np.mean(projections, axis=0)

        return _iterate(pair, x, choose_step, stop, "averaged_projections:direct")

    if mode == "gradient":
        f = sum_smooth([half_squared_distance(s) for s in members])
        trajectory = run_gradient_descent(
            f, x, StepsizeSchedule.fixed(1.0 / n), stop, enforce_guarantee=True
        )
        return Trajectory(
            points=trajectory.points,
            stepsizes=trajectory.stepsizes,
            objective_values=trajectory.objective_values,
            label="averaged_projections:gradient",
            info=trajectory.info,
        )

    if mode == "product":
        # 乘积空间中步长范数为 ℝ^d 中的 √n 倍, 停止阈值同步放大
        scaled_stop = StopRule(stop.max_iters, stop.step_tolerance * math.sqrt(n))
        seed = np.tile(x, n)
        x_traj, _ = run_alternating_projections(
            product_set(members), diagonal_set(d, n), seed, scaled_stop
        )
        return Trajectory(
            points=first_block(x_traj.points, d),
            stepsizes=np.full(x_traj.num_steps, 1.0 / n) if x_traj.num_steps else None,
            label="averaged_projections:product",
            info=x_traj.info,
        )

    error_msg = f"未知平均投影模式: {mode}"
    logger.error(error_msg)
    raise InvalidParameterError(error_msg)


def run_cyclic_projections(
    sets: Sequence[ConvexSet],
    x0: Point,
    stop: StopRule = StopRule(),
) -> Trajectory:
    """循环投影 x_{k+1} = P_n ∘ ... ∘ P_1(x_k), 仅记录外层迭代; 无自收缩保证, 作为对照基线"""
    members = list(sets)
    if not members:
        error_msg = "循环投影至少需要一个集合"
        logger.error(error_msg)
        raise InvalidParameterError(error_msg)
    x = np.array(as_point(x0))
    builder = TrajectoryBuilder(x, label="cyclic_projections")
    stop_reason = "max_iters"
    for _ in range(stop.max_iters):
        x_next = x
        for s in members:
            x_next = s.project(x_next)
        builder.append(x_next)
        step = float(np.linalg.norm(x_next - x))
        x = x_next
        if step <= stop.step_tolerance:
            stop_reason = "step_tolerance"
            break
    builder.info["stop_reason"] = stop_reason
    trajectory = builder.freeze()
    logger.info(f"cyclic_projections: 完成 {trajectory.num_steps} 步, 停止原因 {stop_reason}")
    return trajectory
