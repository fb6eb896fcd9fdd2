"""
静态图模块 - 将二维轨迹绘制为SVG(折线 + 起止点标记)
"""

import logging
from pathlib import Path
from typing import List, Union
from xml.sax.saxutils import escape

import numpy as np

from .core import DimensionMismatchError, Trajectory

logger = logging.getLogger("TrajectoryPlot")

CANVAS = 480.0
MARGIN_FRACTION = 0.05
START_COLOR = "#2b8a3e"
END_COLOR = "#c92a2a"
LINE_COLOR = "#1c7ed6"


def render_svg(t: Trajectory) -> str:
    """
    生成二维轨迹的SVG文本

    视窗按数据范围自动缩放, 四周各留 5% 边距; y 轴向上。

    异常:
        DimensionMismatchError: 轨迹维度不为2时抛出
    """
    if t.dimension != 2:
        error_msg = f"只能绘制二维轨迹, 实际维度 {t.dimension}"
        logger.error(error_msg)
        raise DimensionMismatchError(error_msg)

    lo = t.points.min(axis=0)
    hi = t.points.max(axis=0)
    span = float(np.max(hi - lo))
    if span == 0.0:
        span = 1.0
    center = (lo + hi) / 2.0
    half = span * (0.5 + MARGIN_FRACTION)
    scale = CANVAS / (2.0 * half)

    def to_canvas(p: np.ndarray) -> str:
        x = (p[0] - (center[0] - half)) * scale
        y = CANVAS - (p[1] - (center[1] - half)) * scale
        return f"{x:.3f},{y:.3f}"

    coords = [to_canvas(p) for p in t.points]
    parts: List[str] = [
        '<svg xmlns="http://www.w3.org/2000/svg" '
        f'width="{CANVAS:g}" height="{CANVAS:g}" '
        f'viewBox="0 0 {CANVAS:g} {CANVAS:g}">',
        f'  <title>{escape(t.label or "trajectory")}</title>',
        f'  <rect x="0" y="0" width="{CANVAS:g}" height="{CANVAS:g}" fill="white"/>',
    ]
    if len(coords) > 1:
        parts.append(
            f'  <polyline points="{" ".join(coords)}" fill="none" '
            f'stroke="{LINE_COLOR}" stroke-width="1.5" stroke-linejoin="round"/>'
        )
    sx, sy = coords[0].split(",")
    parts.append(
        f'  <circle class="start" cx="{sx}" cy="{sy}" r="4" fill="{START_COLOR}"/>'
    )
    if len(coords) > 1:
        ex, ey = coords[-1].split(",")
        parts.append(
            f'  <circle class="end" cx="{ex}" cy="{ey}" r="4" fill="{END_COLOR}"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_svg(t: Trajectory, path: Union[str, Path]) -> None:
    with open(path, 'w', encoding='utf-8') as f:
        f.write(render_svg(t))
    logger.info(f"已写出SVG -> {path}")
