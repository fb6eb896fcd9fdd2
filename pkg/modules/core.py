"""
轨迹核心模块 - 负责几何基础类型和基本轨迹度量

主要功能：
1. 点(Point)的校验与构造
2. 不可变轨迹(Trajectory)及其构建器
3. 距离、长度、直径等基础度量

注意：所有坐标统一使用64位浮点数
"""

import logging
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np
import numpy.typing as npt

logger = logging.getLogger("TrajectoryCore")

Point = npt.NDArray[np.float64]


class SelfContractError(Exception):
    """工具包所有错误的基类"""
    pass


class InvalidPointError(SelfContractError, ValueError):
    """点坐标非法(空、非一维或含NaN/无穷)时抛出"""
    pass


class DimensionMismatchError(SelfContractError, ValueError):
    """维度不一致时抛出"""
    pass


class EmptyTrajectoryError(SelfContractError, ValueError):
    """轨迹为空时抛出"""
    pass


def as_point(coords: Iterable[float]) -> Point:
    """
    将坐标序列转换为只读的点

    参数:
        coords: 实数坐标序列

    返回:
        Point: 一维float64数组(只读副本)

    异常:
        InvalidPointError: 坐标为空、不是一维或含非有限值时抛出
    """
    arr = np.array(coords, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1 or arr.size == 0:
        error_msg = f"点必须是非空一维坐标序列, 实际形状: {arr.shape}"
        logger.error(error_msg)
        raise InvalidPointError(error_msg)
    if not np.all(np.isfinite(arr)):
        error_msg = f"点坐标含非有限值: {arr}"
        logger.error(error_msg)
        raise InvalidPointError(error_msg)
    arr.flags.writeable = False
    return arr


def check_same_dimension(p: Point, q: Point) -> None:
    """校验两个点的维度一致"""
    if p.shape != q.shape:
        error_msg = f"维度不一致: {p.shape[0]} vs {q.shape[0]}"
        logger.error(error_msg)
        raise DimensionMismatchError(error_msg)


def distance(p: Point, q: Point) -> float:
    """
    欧氏距离 ‖p − q‖

    异常:
        DimensionMismatchError: 维度不一致时抛出
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    check_same_dimension(p, q)
    return float(np.linalg.norm(p - q))


@dataclass(frozen=True)
class Trajectory:
    """
    迭代序列 x_0, ..., x_K 及每步元数据

    points 为 (K+1, d) 只读数组; stepsizes 长度为 K; objective_values 长度为 K+1;
    info 记录运行附加信息(停止原因、回溯收缩次数等)。
    """

    points: npt.NDArray[np.float64]
    stepsizes: Optional[npt.NDArray[np.float64]] = None
    objective_values: Optional[npt.NDArray[np.float64]] = None
    label: str = ""
    info: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        points = np.array(self.points, dtype=np.float64)
        if points.ndim == 1:
            points = points.reshape(-1, 1)
        if points.ndim != 2 or points.shape[0] == 0 or points.shape[1] == 0:
            error_msg = f"轨迹至少需要一个点, 实际形状: {points.shape}"
            logger.error(error_msg)
            raise EmptyTrajectoryError(error_msg)
        if not np.all(np.isfinite(points)):
            error_msg = f"轨迹 {self.label!r} 含非有限坐标"
            logger.error(error_msg)
            raise InvalidPointError(error_msg)
        points.flags.writeable = False
        object.__setattr__(self, "points", points)

        if self.stepsizes is not None:
            steps = np.array(self.stepsizes, dtype=np.float64).reshape(-1)
            if steps.shape[0] != points.shape[0] - 1:
                error_msg = f"步长数量 {steps.shape[0]} 与步数 {points.shape[0] - 1} 不符"
                logger.error(error_msg)
                raise DimensionMismatchError(error_msg)
            if np.any(~(steps > 0)):
                error_msg = f"轨迹 {self.label!r} 的步长必须严格为正"
                logger.error(error_msg)
                raise InvalidPointError(error_msg)
            steps.flags.writeable = False
            object.__setattr__(self, "stepsizes", steps)

        if self.objective_values is not None:
            values = np.array(self.objective_values, dtype=np.float64).reshape(-1)
            if values.shape[0] != points.shape[0]:
                error_msg = f"目标值数量 {values.shape[0]} 与点数 {points.shape[0]} 不符"
                logger.error(error_msg)
                raise DimensionMismatchError(error_msg)
            values.flags.writeable = False
            object.__setattr__(self, "objective_values", values)

        object.__setattr__(self, "info", MappingProxyType(dict(self.info)))

    @property
    def dimension(self) -> int:
        return int(self.points.shape[1])

    @property
    def num_steps(self) -> int:
        """步数 K(点数减一)"""
        return int(self.points.shape[0] - 1)

    def __len__(self) -> int:
        return int(self.points.shape[0])

    def __getitem__(self, k: int) -> Point:
        return self.points[k]

    def prefix(self, count: int) -> "Trajectory":
        """前 count 个点构成的子轨迹"""
        count = max(1, min(count, len(self)))
        return Trajectory(
            points=self.points[:count],
            stepsizes=None if self.stepsizes is None else self.stepsizes[: count - 1],
            objective_values=(
                None if self.objective_values is None else self.objective_values[:count]
            ),
            label=self.label,
            info=self.info,
        )

    def with_points(
        self, points: npt.NDArray[np.float64], label: Optional[str] = None
    ) -> "Trajectory":
        """保留元数据, 替换坐标(用于刚体变换等)"""
        return Trajectory(
            points=points,
            stepsizes=self.stepsizes,
            objective_values=self.objective_values,
            label=self.label if label is None else label,
            info=self.info,
        )


class TrajectoryBuilder:
    """运行器逐步追加迭代点, 结束时冻结为 Trajectory"""

    def __init__(self, x0: Point, label: str, objective: Optional[float] = None):
        self._points: List[Point] = [np.array(x0, dtype=np.float64)]
        self._stepsizes: List[float] = []
        self._objectives: List[float] = [] if objective is None else [objective]
        self._track_objective = objective is not None
        self.label = label
        self.info: Dict[str, Any] = {}

    @property
    def last(self) -> Point:
        return self._points[-1]

    def __len__(self) -> int:
        return len(self._points)

    def append(
        self,
        x: Point,
        stepsize: Optional[float] = None,
        objective: Optional[float] = None,
    ) -> None:
        self._points.append(np.array(x, dtype=np.float64))
        if stepsize is not None:
            self._stepsizes.append(float(stepsize))
        if self._track_objective and objective is not None:
            self._objectives.append(float(objective))

    def freeze(self) -> Trajectory:
        stepsizes = None
        if self._stepsizes and len(self._stepsizes) == len(self._points) - 1:
            stepsizes = np.array(self._stepsizes)
        objectives = None
        if self._track_objective and len(self._objectives) == len(self._points):
            objectives = np.array(self._objectives)
        return Trajectory(
            points=np.vstack(self._points),
            stepsizes=stepsizes,
            objective_values=objectives,
            label=self.label,
            info=self.info,
        )


def trajectory_from_points(
    points: Sequence[Iterable[float]], label: str = ""
) -> Trajectory:
    """由坐标列表直接构造轨迹(测试与命令行使用)"""
    rows = [np.atleast_1d(np.asarray(p, dtype=np.float64)) for p in points]
    if not rows:
        error_msg = "轨迹至少需要一个点"
        logger.error(error_msg)
        raise EmptyTrajectoryError(error_msg)
    dims = {r.shape for r in rows}
    if len(dims) != 1:
        error_msg = f"轨迹中点的维度不一致: {sorted(d[0] for d in dims)}"
        logger.error(error_msg)
        raise DimensionMismatchError(error_msg)
    return Trajectory(points=np.vstack(rows), label=label)


def step_lengths(t: Trajectory) -> npt.NDArray[np.float64]:
    """相邻迭代点之间的距离 ‖x_{k+1} − x_k‖, 长度为 K"""
    return np.linalg.norm(np.diff(t.points, axis=0), axis=1)


def length(t: Trajectory) -> float:
    """
    序列长度 Σ‖x_{k+1} − x_k‖

    返回:
        float: 单点或常数轨迹为0
    """
    if len(t) == 0:
        error_msg = "空轨迹没有长度"
        logger.error(error_msg)
        raise EmptyTrajectoryError(error_msg)
    return float(np.sum(step_lengths(t)))


def pairwise_distances(t: Trajectory) -> npt.NDArray[np.float64]:
    """(K+1)×(K+1) 的两两距离矩阵"""
    diff = t.points[:, None, :] - t.points[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=-1))


def diameter(t: Trajectory) -> float:
    """
    轨迹直径 max_{i,j} ‖x_i − x_j‖

    逐对穷举, 复杂度 O(K²)
    """
    if len(t) == 0:
        error_msg = "空轨迹没有直径"
        logger.error(error_msg)
        raise EmptyTrajectoryError(error_msg)
    if len(t) == 1:
        return 0.0
    best = 0.0
    # 逐行计算, 避免 (K+1)² × d 的中间数组
    for i in range(len(t) - 1):
        row = np.linalg.norm(t.points[i + 1 :] - t.points[i], axis=1)
        best = max(best, float(row.max()))
    return best
