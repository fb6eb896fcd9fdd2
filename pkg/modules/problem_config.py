"""
问题配置模块 - 负责解析版本化的JSON问题配置并构造目录中的预言机与集合

主要功能：
1. 严格校验配置(顶层 version: 1, 拒绝未知字段, 校验参数个数与维度)
2. 按 kind 构造光滑函数、可近端函数、凸集
3. 按 algorithm 调度运行器, 返回轨迹

注意：product / diagonal 集合只由平均投影的乘积空间实现内部构造, 配置中不可直接使用
"""

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import (
    Any,
    Dict,
    List,
    Mapping,
    NoReturn,
    Optional,
    Tuple,
    Union,
    cast,
)

import numpy as np

from .algorithms import (
    AveragingMode,
    BacktrackParams,
    StepsizeSchedule,
    StopRule,
    run_alternating_projections,
    run_averaged_projections,
    run_cyclic_projections,
    run_gradient_descent,
    run_prox_grad,
    run_prox_grad_backtracking,
    run_proximal_point,
)
from .core import Point, SelfContractError, Trajectory, as_point
from .oracles import (
    ObjectivePair,
    ProxableOracle,
    SmoothOracle,
    half_squared_distance,
    indicator,
    l1_norm,
    quadratic,
    sum_smooth,
    zero_proxable,
    zero_smooth,
)
from .sets import ConvexSet, affine_subspace, ball, box, halfspace

logger = logging.getLogger("ProblemConfig")

CONFIG_VERSION = 1

ALGORITHMS = (
    "prox_grad",
    "prox_grad_backtracking",
    "proximal_point",
    "gradient_descent",
    "alternating_projections",
    "averaged_projections",
    "cyclic_projections",
)
AVERAGING_MODES = ("direct", "gradient", "product")

TOP_LEVEL_FIELDS = {
    "version", "dimension", "algorithm", "mode", "x0", "f", "g", "sets",
    "schedule", "backtracking", "stop", "enforce_guarantee", "seed", "solution_hint",
}

# kind -> (必填字段, 可选字段)
SMOOTH_KINDS: Dict[str, Tuple[Tuple[str, ...], Tuple[str, ...]]] = {
    "quadratic": (("Q",), ("b", "c")),
    "half_sq_dist": (("set",), ()),
    "sum": (("terms",), ()),
    "zero": ((), ()),
}
PROXABLE_KINDS: Dict[str, Tuple[Tuple[str, ...], Tuple[str, ...]]] = {
    "indicator": (("set",), ()),
    "l1": (("weight",), ()),
    "zero": ((), ()),
}
SET_KINDS: Dict[str, Tuple[Tuple[str, ...], Tuple[str, ...]]] = {
    "halfspace": (("a", "b"), ()),
    "ball": (("center", "radius"), ()),
    "box": (("lo", "hi"), ()),
    "affine": (("A", "b"), ()),
}
SCHEDULE_KINDS: Dict[str, Tuple[Tuple[str, ...], Tuple[str, ...]]] = {
    "fixed": (("alpha",), ()),
    "explicit": (("alphas",), ()),
    "auto": ((), ("fraction",)),
}


class ConfigError(SelfContractError, ValueError):
    """问题配置无法解析或校验失败时抛出"""
    pass


def _fail(message: str) -> NoReturn:
    logger.error(message)
    raise ConfigError(message)


@dataclass(frozen=True)
class ProblemConfig:
    """校验后的问题配置"""

    dimension: int
    algorithm: str
    x0: Point
    f: Optional[Mapping[str, Any]] = None
    g: Optional[Mapping[str, Any]] = None
    sets: Tuple[Mapping[str, Any], ...] = ()
    mode: str = "direct"
    schedule: Optional[Mapping[str, Any]] = None
    backtracking: Optional[Mapping[str, Any]] = None
    stop: StopRule = field(default_factory=StopRule)
    enforce_guarantee: bool = True
    seed: Optional[int] = None
    solution_hint: Optional[Point] = None


@dataclass(frozen=True)
class RunOutcome:
    """一次配置运行的结果: 主轨迹, 交替投影的 y 序列(若有), 以及近端梯度族的目标"""

    trajectory: Trajectory
    companion: Optional[Trajectory] = None
    pair: Optional[ObjectivePair] = None


def _check_fields(
    spec: Any, allowed: Tuple[Tuple[str, ...], Tuple[str, ...]], where: str
) -> Dict[str, Any]:
    if not isinstance(spec, dict):
        _fail(f"{where} 必须是JSON对象")
    required, optional = allowed
    extra = set(spec) - set(required) - set(optional) - {"kind"}
    if extra:
        _fail(f"{where} 含未知字段: {sorted(extra)}")
    missing = [name for name in required if name not in spec]
    if missing:
        _fail(f"{where} 缺少字段: {missing}")
    return spec


def _kind_of(spec: Any, catalog: Mapping[str, Any], where: str) -> str:
    if not isinstance(spec, dict) or "kind" not in spec:
        _fail(f"{where} 必须是带 kind 字段的JSON对象")
    kind = spec["kind"]
    if kind not in catalog:
        _fail(f"{where} 的 kind 未知: {kind!r}, 可选 {sorted(catalog)}")
    _check_fields(spec, catalog[kind], f"{where}({kind})")
    return str(kind)


def _vector(value: Any, d: int, where: str) -> np.ndarray:
    try:
        arr = np.array(as_point(value))
    except (SelfContractError, TypeError, ValueError) as e:
        _fail(f"{where} 不是有效的实数向量: {e}")
    if arr.size != d:
        _fail(f"{where} 长度应为 {d}, 实际 {arr.size}")
    return arr


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(f"{where} 必须是实数, 实际 {value!r}")
    return float(value)


def _integer(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(f"{where} 必须是整数, 实际 {value!r}")
    return int(value)


def build_set(spec: Mapping[str, Any], d: int, where: str = "set") -> ConvexSet:
    """按 kind 构造凸集: halfspace / ball / box / affine"""
    kind = _kind_of(spec, SET_KINDS, where)
    try:
        if kind == "halfspace":
            return halfspace(
                _vector(spec["a"], d, f"{where}.a"), _number(spec["b"], f"{where}.b")
            )
        if kind == "ball":
            return ball(
                _vector(spec["center"], d, f"{where}.center"),
                _number(spec["radius"], f"{where}.radius"),
            )
        if kind == "box":
            return box(
                _vector(spec["lo"], d, f"{where}.lo"),
                _vector(spec["hi"], d, f"{where}.hi"),
            )
        matrix = np.atleast_2d(np.array(spec["A"], dtype=np.float64))
        if matrix.ndim != 2 or matrix.shape[1] != d:
            _fail(f"{where}.A 必须是 m×{d} 矩阵")
        rhs = _vector(spec["b"], matrix.shape[0], f"{where}.b")
        return affine_subspace(matrix, rhs)
    except ConfigError:
        raise
    except (SelfContractError, TypeError, ValueError) as e:
        _fail(f"{where} 参数非法: {e}")


def build_smooth(spec: Mapping[str, Any], d: int, where: str = "f") -> SmoothOracle:
    """按 kind 构造光滑函数: quadratic / half_sq_dist / sum / zero"""
    kind = _kind_of(spec, SMOOTH_KINDS, where)
    try:
        if kind == "quadratic":
            matrix = np.atleast_2d(np.array(spec["Q"], dtype=np.float64))
            if matrix.shape != (d, d):
                _fail(f"{where}.Q 必须是 {d}×{d} 矩阵, 实际 {matrix.shape}")
            b = _vector(spec["b"], d, f"{where}.b") if "b" in spec else None
            return quadratic(matrix, b, _number(spec.get("c", 0.0), f"{where}.c"))
        if kind == "half_sq_dist":
            return half_squared_distance(build_set(spec["set"], d, f"{where}.set"))
        if kind == "sum":
            terms = spec["terms"]
            if not isinstance(terms, list) or not terms:
                _fail(f"{where}.terms 必须是非空列表")
            return sum_smooth(
                [build_smooth(t, d, f"{where}.terms[{i}]") for i, t in enumerate(terms)]
            )
        return zero_smooth(d)
    except ConfigError:
        raise
    except (SelfContractError, TypeError, ValueError) as e:
        _fail(f"{where} 参数非法: {e}")


def build_proxable(spec: Mapping[str, Any], d: int, where: str = "g") -> ProxableOracle:
    """按 kind 构造可近端函数: indicator / l1 / zero"""
    kind = _kind_of(spec, PROXABLE_KINDS, where)
    try:
        if kind == "indicator":
            return indicator(build_set(spec["set"], d, f"{where}.set"))
        if kind == "l1":
            return l1_norm(_number(spec["weight"], f"{where}.weight"), dimension=d)
        return zero_proxable(d)
    except ConfigError:
        raise
    except (SelfContractError, TypeError, ValueError) as e:
        _fail(f"{where} 参数非法: {e}")


def build_schedule(spec: Mapping[str, Any]) -> StepsizeSchedule:
    kind = _kind_of(spec, SCHEDULE_KINDS, "schedule")
    try:
        if kind == "fixed":
            return StepsizeSchedule.fixed(_number(spec["alpha"], "schedule.alpha"))
        if kind == "explicit":
            alphas = spec["alphas"]
            if not isinstance(alphas, list):
                _fail("schedule.alphas 必须是列表")
            return StepsizeSchedule.explicit(
                [_number(a, "schedule.alphas[]") for a in alphas]
            )
        fraction = _number(spec.get("fraction", 1.0), "schedule.fraction")
        return StepsizeSchedule.auto(fraction)
    except ConfigError:
        raise
    except SelfContractError as e:
        _fail(f"schedule 参数非法: {e}")


def build_backtracking(spec: Mapping[str, Any]) -> BacktrackParams:
    _check_fields(spec, (("alpha_init",), ("shrink", "max_shrinks")), "backtracking")
    try:
        return BacktrackParams(
            alpha_init=_number(spec["alpha_init"], "backtracking.alpha_init"),
            shrink=_number(spec.get("shrink", 0.5), "backtracking.shrink"),
            max_shrinks=_integer(
                spec.get("max_shrinks", 60), "backtracking.max_shrinks"
            ),
        )
    except SelfContractError as e:
        if isinstance(e, ConfigError):
            raise
        _fail(f"backtracking 参数非法: {e}")


def _parse_stop(spec: Any, defaults: StopRule) -> StopRule:
    if spec is None:
        return defaults
    _check_fields(spec, ((), ("max_iters", "step_tolerance")), "stop")
    try:
        return StopRule(
            max_iters=_integer(
                spec.get("max_iters", defaults.max_iters), "stop.max_iters"
            ),
            step_tolerance=_number(
                spec.get("step_tolerance", defaults.step_tolerance),
                "stop.step_tolerance",
            ),
        )
    except SelfContractError as e:
        if isinstance(e, ConfigError):
            raise
        _fail(f"stop 参数非法: {e}")


def parse_config(document: Any, default_stop: StopRule = StopRule()) -> ProblemConfig:
    """
    校验并解析问题配置

    参数:
        document: json.load 得到的对象
        default_stop (StopRule): 配置未给出停止规则时使用的默认值

    返回:
        ProblemConfig: 校验后的配置; 预言机与集合在此阶段即完成一次试构造

    异常:
        ConfigError: 版本不符、未知字段、未知 kind、参数个数或维度不匹配时抛出
    """
    if not isinstance(document, dict):
        _fail("配置顶层必须是JSON对象")
    unknown = set(document) - TOP_LEVEL_FIELDS
    if unknown:
        _fail(f"配置含未知字段: {sorted(unknown)}")
    if document.get("version") != CONFIG_VERSION:
        _fail(f"配置版本必须为 {CONFIG_VERSION}, 实际 {document.get('version')!r}")
    for name in ("dimension", "algorithm", "x0"):
        if name not in document:
            _fail(f"配置缺少字段: {name}")

    d = _integer(document["dimension"], "dimension")
    if d < 1:
        _fail(f"dimension 必须 ≥ 1: {d}")
    algorithm = document["algorithm"]
    if algorithm not in ALGORITHMS:
        _fail(f"未知算法: {algorithm!r}, 可选 {list(ALGORITHMS)}")
    mode = document.get("mode", "direct")
    if mode not in AVERAGING_MODES:
        _fail(f"未知平均投影模式: {mode!r}")
    if "mode" in document and algorithm != "averaged_projections":
        _fail("mode 仅适用于 averaged_projections")

    needs = {
        "prox_grad": {"f", "g", "schedule"},
        "prox_grad_backtracking": {"f", "g", "backtracking"},
        "proximal_point": {"g", "schedule"},
        "gradient_descent": {"f"},
        "alternating_projections": {"sets"},
        "averaged_projections": {"sets"},
        "cyclic_projections": {"sets"},
    }[algorithm]
    allowed = needs | {
        "version",
        "dimension",
        "algorithm",
        "x0",
        "stop",
        "seed",
        "solution_hint",
        "mode",
    }
    if algorithm in ("prox_grad", "gradient_descent"):
        allowed |= {"enforce_guarantee"}
    if algorithm == "gradient_descent":
        allowed |= {"schedule", "backtracking"}
        if ("schedule" in document) == ("backtracking" in document):
            _fail("gradient_descent 需要 schedule 与 backtracking 二者之一")
    missing = sorted(needs - set(document))
    if missing:
        _fail(f"算法 {algorithm} 缺少字段: {missing}")
    stray = sorted(set(document) - allowed)
    if stray:
        _fail(f"算法 {algorithm} 不接受字段: {stray}")

    sets = document.get("sets", [])
    if not isinstance(sets, list):
        _fail("sets 必须是列表")
    if algorithm == "alternating_projections" and len(sets) != 2:
        _fail(f"alternating_projections 需要恰好 2 个集合, 实际 {len(sets)}")
    if algorithm in ("averaged_projections", "cyclic_projections") and not sets:
        _fail(f"{algorithm} 至少需要 1 个集合")

    enforce = document.get("enforce_guarantee", algorithm == "prox_grad")
    if not isinstance(enforce, bool):
        _fail("enforce_guarantee 必须是布尔值")

    config = ProblemConfig(
        dimension=d,
        algorithm=algorithm,
        x0=as_point(_vector(document["x0"], d, "x0")),
        f=document.get("f"),
        g=document.get("g"),
        sets=tuple(sets),
        mode=mode,
        schedule=document.get("schedule"),
        backtracking=document.get("backtracking"),
        stop=_parse_stop(document.get("stop"), default_stop),
        enforce_guarantee=enforce,
        seed=_integer(document["seed"], "seed") if "seed" in document else None,
        solution_hint=(
            as_point(_vector(document["solution_hint"], d, "solution_hint"))
            if document.get("solution_hint") is not None
            else None
        ),
    )
    # 试构造一次, 使参数错误在运行前暴露为配置错误
    _build_components(config)
    return config


def load_config(
    path: Union[str, Path], default_stop: StopRule = StopRule()
) -> ProblemConfig:
    """从文件读取并解析问题配置"""
    try:
        with open(path, 'r', encoding='utf-8') as f:
            document = json.load(f)
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as e:
        error_msg = f"无法读取配置文件 {path}: {e}"
        logger.error(error_msg)
        raise ConfigError(error_msg)
    return parse_config(document, default_stop)


def with_stop(
    config: ProblemConfig,
    max_iters: Optional[int] = None,
    step_tolerance: Optional[float] = None,
) -> ProblemConfig:
    """用命令行参数覆盖停止规则"""
    if max_iters is None:
        max_iters = config.stop.max_iters
    if step_tolerance is None:
        step_tolerance = config.stop.step_tolerance
    try:
        stop = StopRule(max_iters=max_iters, step_tolerance=step_tolerance)
    except SelfContractError as e:
        error_msg = str(e)
        logger.error(error_msg)
        raise ConfigError(error_msg) from e
    return replace(config, stop=stop)


@dataclass(frozen=True)
class _Components:
    f: Optional[SmoothOracle]
    g: Optional[ProxableOracle]
    sets: List[ConvexSet]
    schedule: Optional[StepsizeSchedule]
    backtracking: Optional[BacktrackParams]


def _build_components(config: ProblemConfig) -> _Components:
    d = config.dimension
    return _Components(
        f=build_smooth(config.f, d) if config.f is not None else None,
        g=build_proxable(config.g, d) if config.g is not None else None,
        sets=[build_set(s, d, f"sets[{i}]") for i, s in enumerate(config.sets)],
        schedule=(
            build_schedule(config.schedule) if config.schedule is not None else None
        ),
        backtracking=(
            build_backtracking(config.backtracking)
            if config.backtracking is not None
            else None
        ),
    )


def run_problem(config: ProblemConfig) -> RunOutcome:
    """
    按配置运行算法

    返回:
        RunOutcome: 主轨迹; 交替投影时附带 y 序列; 近端梯度族附带目标 g + f

    异常:
        AlgorithmError 等运行期错误原样抛出
    """
    parts = _build_components(config)
    algorithm = config.algorithm
    stop = config.stop
    x0 = config.x0
    # 解析阶段已保证所选算法需要的部件齐全
    f = cast(SmoothOracle, parts.f)
    g = cast(ProxableOracle, parts.g)
    mode = cast(AveragingMode, config.mode)
    logger.info(f"运行算法 {algorithm}, 维度 {config.dimension}")

    if algorithm == "prox_grad":
        pair = ObjectivePair(f, g)
        schedule = cast(StepsizeSchedule, parts.schedule)
        traj = run_prox_grad(pair, x0, schedule, stop, config.enforce_guarantee)
        return RunOutcome(traj, pair=pair)
    if algorithm == "prox_grad_backtracking":
        pair = ObjectivePair(f, g)
        params = cast(BacktrackParams, parts.backtracking)
        traj = run_prox_grad_backtracking(pair, x0, params, stop)
        return RunOutcome(traj, pair=pair)
    if algorithm == "proximal_point":
        pair = ObjectivePair(zero_smooth(config.dimension), g)
        schedule = cast(StepsizeSchedule, parts.schedule)
        return RunOutcome(run_proximal_point(g, x0, schedule, stop), pair=pair)
    if algorithm == "gradient_descent":
        pair = ObjectivePair(f, zero_proxable(config.dimension))
        rule = cast(
            Union[StepsizeSchedule, BacktrackParams],
            parts.schedule or parts.backtracking,
        )
        traj = run_gradient_descent(f, x0, rule, stop, config.enforce_guarantee)
        return RunOutcome(traj, pair=pair)
    if algorithm == "alternating_projections":
        first, second = parts.sets[0], parts.sets[1]
        x_traj, y_traj = run_alternating_projections(first, second, x0, stop)
        pair = ObjectivePair(half_squared_distance(first), indicator(second))
        return RunOutcome(x_traj, companion=y_traj, pair=pair)
    if algorithm == "averaged_projections":
        return RunOutcome(run_averaged_projections(parts.sets, x0, stop, mode))
    return RunOutcome(run_cyclic_projections(parts.sets, config.x0, stop))


def build_sets(config: ProblemConfig) -> List[ConvexSet]:
    """构造配置中的集合族(供平均投影三模式比较使用)"""
    return _build_components(config).sets
