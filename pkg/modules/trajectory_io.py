"""
轨迹读写模块 - 负责轨迹CSV与报告JSON的序列化

CSV格式: 表头 k,x0,...,x{d-1}[,alpha][,objective], 每个迭代点一行, UTF-8,
数值以 17 位有效数字输出。第 k 行的 alpha 为离开 x_k 的步长 α_k, 最后一行留空。
"""

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from .core import SelfContractError, Trajectory

logger = logging.getLogger("TrajectoryIO")

PathLike = Union[str, Path]


class TrajectoryFormatError(SelfContractError, ValueError):
    """轨迹CSV格式错误时抛出"""
    pass


def _fmt(value: float) -> str:
    return format(float(value), '.17g')


def write_trajectory_csv(t: Trajectory, path: PathLike) -> None:
    """
    将轨迹写为CSV

    参数:
        t (Trajectory): 轨迹
        path: 输出路径
    """
    header = ["k"] + [f"x{i}" for i in range(t.dimension)]
    if t.stepsizes is not None:
        header.append("alpha")
    if t.objective_values is not None:
        header.append("objective")
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        for k, point in enumerate(t.points):
            row = [str(k)] + [_fmt(v) for v in point]
            if t.stepsizes is not None:
                row.append(_fmt(t.stepsizes[k]) if k < t.num_steps else "")
            if t.objective_values is not None:
                row.append(_fmt(t.objective_values[k]))
            writer.writerow(row)
    logger.info(f"已写出轨迹 {t.label!r}: {len(t)} 行 -> {path}")


def _parse_float(text: str, line: int, column: str) -> float:
    try:
        return float(text)
    except ValueError:
        error_msg = f"第 {line} 行 {column} 列不是实数: {text!r}"
        logger.error(error_msg)
        raise TrajectoryFormatError(error_msg)


def read_trajectory_csv(path: PathLike, label: str = "") -> Trajectory:
    """
    读取轨迹CSV

    返回:
        Trajectory: 解析得到的轨迹

    异常:
        TrajectoryFormatError: 表头非法、行长度不一致、数值无法解析或 k 不连续时抛出
    """
    try:
        with open(path, 'r', encoding='utf-8', newline='') as f:
            rows = list(csv.reader(f))
    except (OSError, UnicodeDecodeError, csv.Error) as e:
        error_msg = f"无法读取轨迹文件 {path}: {e}"
        logger.error(error_msg)
        raise TrajectoryFormatError(error_msg)

    rows = [r for r in rows if r]
    if len(rows) < 2:
        error_msg = f"轨迹文件 {path} 至少需要表头和一行数据"
        logger.error(error_msg)
        raise TrajectoryFormatError(error_msg)
    header = [h.strip() for h in rows[0]]
    has_objective = header[-1] == "objective"
    coord_end = len(header) - int(has_objective)
    has_alpha = coord_end > 0 and header[coord_end - 1] == "alpha"
    coord_end -= int(has_alpha)
    expected = ["k"] + [f"x{i}" for i in range(coord_end - 1)]
    if coord_end < 2 or header[:coord_end] != expected:
        error_msg = f"轨迹表头非法: {','.join(header)}"
        logger.error(error_msg)
        raise TrajectoryFormatError(error_msg)

    points: List[List[float]] = []
    alphas: List[float] = []
    objectives: List[float] = []
    for line, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            error_msg = f"第 {line} 行有 {len(row)} 列, 表头为 {len(header)} 列"
            logger.error(error_msg)
            raise TrajectoryFormatError(error_msg)
        if row[0].strip() != str(line - 2):
            error_msg = f"第 {line} 行的 k 应为 {line - 2}, 实际 {row[0]!r}"
            logger.error(error_msg)
            raise TrajectoryFormatError(error_msg)
        coords = [_parse_float(row[i], line, header[i]) for i in range(1, coord_end)]
        if not all(math.isfinite(c) for c in coords):
            error_msg = f"第 {line} 行含非有限坐标"
            logger.error(error_msg)
            raise TrajectoryFormatError(error_msg)
        points.append(coords)
        if has_alpha and row[coord_end].strip():
            alphas.append(_parse_float(row[coord_end], line, "alpha"))
        if has_objective:
            objectives.append(_parse_float(row[-1], line, "objective"))

    stepsizes: Optional[np.ndarray] = None
    if has_alpha and alphas:
        if len(alphas) != len(points) - 1:
            error_msg = f"alpha 列应有 {len(points) - 1} 个值, 实际 {len(alphas)}"
            logger.error(error_msg)
            raise TrajectoryFormatError(error_msg)
        stepsizes = np.array(alphas)
    try:
        return Trajectory(
            points=np.array(points),
            stepsizes=stepsizes,
            objective_values=np.array(objectives) if has_objective else None,
            label=label or Path(path).stem,
        )
    except SelfContractError as e:
        error_msg = str(e)
        logger.error(error_msg)
        raise TrajectoryFormatError(error_msg) from e


def _json_safe(value: Any) -> Any:
    """将 ±∞/NaN 转为字符串, 保证输出为严格JSON"""
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def dumps_json(document: Dict[str, Any]) -> str:
    return json.dumps(_json_safe(document), indent=2, ensure_ascii=False)


def write_json(document: Dict[str, Any], path: PathLike) -> None:
    with open(path, 'w', encoding='utf-8') as f:
        f.write(dumps_json(document))
        f.write('\n')
    logger.info(f"已写出报告 -> {path}")
