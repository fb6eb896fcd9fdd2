"""
配置模块 - 负责加载工具默认配置

主要功能：
1. 从 config/solver_config.yaml 读取默认容差、停止规则、审计与日志设置
2. 通过 .env / 环境变量覆盖配置文件路径和日志级别
3. 配置文件缺失或损坏时回退到内置默认值

注意：问题本身的配置(JSON)由 problem_config 模块负责, 与这里的工具默认值分开
"""

import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from dotenv import load_dotenv

logger = logging.getLogger("SolverSettings")

PROJECT_ROOT = Path(__file__).resolve().parent.parent
DEFAULT_CONFIG_PATH = PROJECT_ROOT / "config" / "solver_config.yaml"
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


@dataclass(frozen=True)
class Settings:
    tolerance: float = 1e-9
    max_iters: int = 10000
    step_tolerance: float = 1e-12
    z_samples: int = 100
    audit_seed: int = 0
    log_level: str = "INFO"
    log_file: Optional[str] = None


def _read_yaml(path: Path) -> Dict[str, Any]:
    """读取YAML配置, 失败时返回空字典并记录警告"""
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = yaml.safe_load(f) or {}
    except FileNotFoundError:
        logger.warning(f"配置文件不存在, 使用默认配置: {path}")
        return {}
    except yaml.YAMLError as e:
        logger.warning(f"配置文件解析失败, 使用默认配置: {e}")
        return {}
    if not isinstance(data, dict):
        logger.warning(f"配置文件顶层必须是映射, 使用默认配置: {path}")
        return {}
    return data


def load_settings(path: Optional[str] = None) -> Settings:
    """
    加载工具配置

    参数:
        path (Optional[str]): 配置文件路径, 默认取环境变量 SELFCONTRACT_CONFIG
            或 config/solver_config.yaml

    返回:
        Settings: 合并了配置文件与环境变量后的设置
    """
    load_dotenv()
    config_path = Path(path or os.getenv("SELFCONTRACT_CONFIG") or DEFAULT_CONFIG_PATH)
    data = _read_yaml(config_path)
    defaults = Settings()
    stop = data.get("stop") or {}
    audit = data.get("audit") or {}
    log = data.get("logging") or {}
    env_level = os.getenv("SELFCONTRACT_LOG_LEVEL")
    try:
        log_level = env_level or log.get("level", defaults.log_level)
        settings = Settings(
            tolerance=float(data.get("tolerance", defaults.tolerance)),
            max_iters=int(stop.get("max_iters", defaults.max_iters)),
            step_tolerance=float(
                stop.get("step_tolerance", defaults.step_tolerance)
            ),
            z_samples=int(audit.get("z_samples", defaults.z_samples)),
            audit_seed=int(audit.get("seed", defaults.audit_seed)),
            log_level=str(log_level).upper(),
            log_file=log.get("file", defaults.log_file),
        )
    except (TypeError, ValueError, AttributeError) as e:
        logger.warning(f"配置项类型错误, 使用默认配置: {e}")
        return defaults
    return settings


def configure_logging(settings: Settings, level: Optional[str] = None) -> None:
    """按设置配置根日志器: 标准错误输出, 可选文件输出"""
    handlers: list = [logging.StreamHandler()]
    if settings.log_file:
        handlers.append(logging.FileHandler(settings.log_file, encoding='utf-8'))
    logging.basicConfig(
        level=getattr(logging, (level or settings.log_level).upper(), logging.INFO),
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )
