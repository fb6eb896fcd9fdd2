#!/usr/bin/env python3
"""
命令行入口 - 运行实验、校验轨迹、比较平均投影三种实现、绘制二维轨迹

子命令:
    run               按JSON配置运行算法, 输出轨迹CSV与报告JSON
    check             对轨迹CSV做自收缩判定
    compare-averaged  比较平均投影的 direct / gradient / product 三种实现
    plot              将二维轨迹CSV绘制为SVG

退出码: 0 成功/通过, 1 自收缩被否定, 2 配置或输入格式错误, 3 运行期错误
"""

import argparse
import logging
import math
import sys
from typing import Dict, List, Optional, Sequence

import numpy as np

from .algorithms import StopRule, run_averaged_projections
from .analysis import (
    audit_decrease_lemma,
    check_self_contracted,
    report,
    stepsize_summary,
)
from .core import DimensionMismatchError, SelfContractError, Trajectory
from .problem_config import ConfigError, build_sets, load_config, run_problem, with_stop
from .settings import Settings, configure_logging, load_settings
from .svg_plot import write_svg
from .trajectory_io import (
    TrajectoryFormatError,
    dumps_json,
    read_trajectory_csv,
    write_json,
    write_trajectory_csv,
)

logger = logging.getLogger("SelfContractCLI")

EXIT_OK = 0
EXIT_REFUTED = 1
EXIT_INPUT_ERROR = 2
EXIT_RUNTIME_ERROR = 3

EQUIVALENCE_TOLERANCE = 1e-10


def _diagnostic(message: str) -> None:
    """标准错误上输出一行诊断"""
    print(message.replace("\n", " "), file=sys.stderr)


def _resolve_tolerance(tol: Optional[float], settings: Settings) -> Optional[float]:
    """命令行容差优先于工具配置; 负数或非有限值输出诊断并返回 None"""
    tolerance = settings.tolerance if tol is None else tol
    if not (math.isfinite(tolerance) and tolerance >= 0):
        _diagnostic(f"容差必须为非负有限数: {tolerance}")
        return None
    return tolerance


def _default_stop(settings: Settings) -> StopRule:
    """配置文件未给出停止规则时沿用工具配置中的默认值"""
    try:
        return StopRule(settings.max_iters, settings.step_tolerance)
    except SelfContractError as e:
        logger.warning(f"工具配置中的停止规则非法, 使用内置默认值: {e}")
        return StopRule()


def _audit_seed(
    cli_seed: Optional[int], config_seed: Optional[int], settings: Settings
) -> int:
    """审计种子优先级: 命令行 > 问题配置 > 工具配置"""
    if cli_seed is not None:
        return cli_seed
    if config_seed is not None:
        return config_seed
    return settings.audit_seed


def cmd_run(
    config_path: str,
    out_trajectory_path: str,
    out_report_path: str,
    tol: Optional[float] = None,
    seed: Optional[int] = None,
    max_iters: Optional[int] = None,
    step_tol: Optional[float] = None,
    settings: Optional[Settings] = None,
) -> int:
    """
    运行配置中的算法, 写出轨迹CSV与报告JSON

    返回:
        int: 0 成功; 2 配置错误; 3 运行期错误(预言机、步长保证等)
    """
    settings = settings or load_settings()
    tolerance = _resolve_tolerance(tol, settings)
    if tolerance is None:
        return EXIT_INPUT_ERROR
    try:
        config = load_config(config_path, _default_stop(settings))
        config = with_stop(config, max_iters, step_tol)
    except ConfigError as e:
        _diagnostic(f"配置错误: {e}")
        return EXIT_INPUT_ERROR
    audit_seed = _audit_seed(seed, config.seed, settings)

    try:
        outcome = run_problem(config)
        trajectory = outcome.trajectory
        result = report(trajectory, config.solution_hint, tolerance)
        document: Dict[str, object] = {
            **result.to_dict(),
            "label": trajectory.label,
            "algorithm": config.algorithm,
            "tolerance": tolerance,
            "seed": audit_seed,
            "stop_reason": trajectory.info.get("stop_reason"),
            "stepsizes": stepsize_summary(trajectory),
        }
        if outcome.companion is not None:
            document["companion"] = {
                "label": outcome.companion.label,
                **report(outcome.companion, None, tolerance).to_dict(),
            }
        if outcome.pair is not None and trajectory.stepsizes is not None:
            document["audits"] = {
                "decrease_lemma_max_violation": audit_decrease_lemma(
                    outcome.pair, trajectory, settings.z_samples, audit_seed
                ),
                "z_samples": settings.z_samples,
            }
        write_trajectory_csv(trajectory, out_trajectory_path)
        write_json(document, out_report_path)
    except SelfContractError as e:
        _diagnostic(f"运行错误: {e}")
        return EXIT_RUNTIME_ERROR
    except OSError as e:
        _diagnostic(f"写出失败: {e}")
        return EXIT_RUNTIME_ERROR
    return EXIT_OK


def cmd_check(
    trajectory_csv_path: str,
    tol: Optional[float] = None,
    settings: Optional[Settings] = None,
) -> int:
    """
    判定轨迹CSV是否自收缩, 判定结果以JSON打印到标准输出

    返回:
        int: 0 自收缩; 1 被否定(附见证); 2 解析错误或容差非法
    """
    settings = settings or load_settings()
    tolerance = _resolve_tolerance(tol, settings)
    if tolerance is None:
        return EXIT_INPUT_ERROR
    try:
        trajectory = read_trajectory_csv(trajectory_csv_path)
    except TrajectoryFormatError as e:
        _diagnostic(f"轨迹格式错误: {e}")
        return EXIT_INPUT_ERROR
    verdict = check_self_contracted(trajectory, tolerance)
    print(dumps_json(verdict.to_dict()))
    return EXIT_OK if verdict.is_self_contracted else EXIT_REFUTED


def _max_discrepancy(runs: Sequence[Trajectory]) -> float:
    """公共前缀上逐迭代、逐坐标的最大差异"""
    common = min(len(r) for r in runs)
    reference = runs[0].points[:common]
    return max(float(np.max(np.abs(r.points[:common] - reference))) for r in runs)


def cmd_compare_averaged(
    config_path: str,
    tol: Optional[float] = None,
    max_iters: Optional[int] = None,
    step_tol: Optional[float] = None,
    settings: Optional[Settings] = None,
) -> int:
    """
    运行平均投影的三种实现并打印最大逐迭代坐标差异

    返回:
        int: 差异 ≤ 1e-10 时为 0, 否则为 1; 配置错误为 2, 运行错误为 3
    """
    settings = settings or load_settings()
    tolerance = _resolve_tolerance(tol, settings)
    if tolerance is None:
        return EXIT_INPUT_ERROR
    try:
        config = load_config(config_path, _default_stop(settings))
        config = with_stop(config, max_iters, step_tol)
        if not config.sets:
            error_msg = "配置未给出集合族 sets"
            logger.error(error_msg)
            raise ConfigError(error_msg)
        sets = build_sets(config)
    except ConfigError as e:
        _diagnostic(f"配置错误: {e}")
        return EXIT_INPUT_ERROR
    try:
        runs = [
            run_averaged_projections(sets, config.x0, config.stop, mode)
            for mode in ("direct", "gradient", "product")
        ]
    except SelfContractError as e:
        _diagnostic(f"运行错误: {e}")
        return EXIT_RUNTIME_ERROR
    discrepancy = _max_discrepancy(runs)
    verdict = check_self_contracted(runs[0], tolerance)
    print(dumps_json({
        "max_discrepancy": discrepancy,
        "iterations": {r.label: r.num_steps for r in runs},
        "self_contraction": verdict.to_dict(),
    }))
    return EXIT_OK if discrepancy <= EQUIVALENCE_TOLERANCE else EXIT_REFUTED


def cmd_plot(trajectory_csv_path: str, out_svg_path: str) -> int:
    """
    将二维轨迹绘制为SVG

    返回:
        int: 0 成功; 2 解析错误或维度不为2; 3 写出失败
    """
    try:
        trajectory = read_trajectory_csv(trajectory_csv_path)
        write_svg(trajectory, out_svg_path)
    except (TrajectoryFormatError, DimensionMismatchError) as e:
        _diagnostic(f"无法绘图: {e}")
        return EXIT_INPUT_ERROR
    except OSError as e:
        _diagnostic(f"写出失败: {e}")
        return EXIT_RUNTIME_ERROR
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="selfcontract",
        description="近端梯度与投影算法的自收缩轨迹实验工具",
    )
    parser.add_argument("--log-level", default=None, help="日志级别, 覆盖配置文件")
    parser.add_argument("--settings", default=None, help="工具配置文件(YAML)路径")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="按配置运行算法")
    run.add_argument("config", help="问题配置JSON")
    run.add_argument("trajectory", help="输出轨迹CSV")
    run.add_argument("report", help="输出报告JSON")
    run.add_argument("--tol", type=float, default=None, help="自收缩判定容差(默认 1e-9)")
    run.add_argument("--seed", type=int, default=None, help="审计采样随机种子")
    run.add_argument("--max-iters", type=int, default=None)
    run.add_argument("--step-tol", type=float, default=None)

    check = sub.add_parser("check", help="判定轨迹CSV是否自收缩")
    check.add_argument("trajectory", help="轨迹CSV")
    check.add_argument("--tol", type=float, default=None)

    compare = sub.add_parser("compare-averaged", help="比较平均投影三种实现")
    compare.add_argument("config", help="问题配置JSON(含 sets)")
    compare.add_argument("--tol", type=float, default=None)
    compare.add_argument("--max-iters", type=int, default=None)
    compare.add_argument("--step-tol", type=float, default=None)

    plot = sub.add_parser("plot", help="绘制二维轨迹SVG")
    plot.add_argument("trajectory", help="轨迹CSV")
    plot.add_argument("svg", help="输出SVG")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT_ERROR if e.code else EXIT_OK
    settings = load_settings(args.settings)
    configure_logging(settings, args.log_level)

    if args.command == "run":
        return cmd_run(args.config, args.trajectory, args.report, args.tol, args.seed,
                       args.max_iters, args.step_tol, settings)
    if args.command == "check":
        return cmd_check(args.trajectory, args.tol, settings)
    if args.command == "compare-averaged":
        return cmd_compare_averaged(
            args.config, args.tol, args.max_iters, args.step_tol, settings
        )
    return cmd_plot(args.trajectory, args.svg)


if __name__ == "__main__":
    sys.exit(main())
