"""設定読込モジュール。

config/config.yaml から積分・収束判定・極限点計算・メッシュ・ログの設定を読み込む。
環境変数は参照しない（全設定を明示する）。
"""

import sys
from pathlib import Path
from typing import Any

import yaml
from loguru import logger

from src.simulation.config import IntegratorConfig

# プロジェクトルート（src/ の1階層上）
PROJECT_ROOT = Path(__file__).resolve().parent.parent
DEFAULT_CONFIG_PATH = PROJECT_ROOT / "config" / "config.yaml"

_INTEGRATOR_KEYS = ("method", "rtol", "atol", "h_init", "h_min", "h_max", "t_end", "max_steps", "stop_on_steady")
_CONVERGENCE_KEYS = ("eps_consensus", "eps_stationary", "characteristic_time")


def load_config(config_path: Path | None = None) -> dict[str, Any]:
    """YAML設定ファイルを読み込む。

    Args:
        config_path: 設定ファイルパス。Noneの場合はデフォルトパス。

    Returns:
        設定dict。ファイルが存在しない場合は空dict。
    """
    path = config_path or DEFAULT_CONFIG_PATH
    if not path.exists():
        logger.warning(f"設定ファイルが見つかりません: {path}（既定値を使用）")
        return {}
    with open(path, encoding="utf-8") as f:
        return yaml.safe_load(f) or {}


def integrator_config_from(config: dict[str, Any], **overrides: Any) -> IntegratorConfig:
    """設定dictの integrator / convergence セクションから IntegratorConfig を生成する。

    overrides に None 以外の値を渡すと設定値より優先する（CLIフラグ用）。
    """
    values: dict[str, Any] = {}
    integrator = config.get("integrator", {}) or {}
    convergence = config.get("convergence", {}) or {}
    values.update({k: integrator[k] for k in _INTEGRATOR_KEYS if k in integrator})
    values.update({k: convergence[k] for k in _CONVERGENCE_KEYS if k in convergence})
    values.update({k: v for k, v in overrides.items() if v is not None})
    return IntegratorConfig(**values)


def limit_point_settings(config: dict[str, Any]) -> tuple[float, int]:
    """極限点計算の (tol, max_iter) を返す。"""
    section = config.get("limit_point", {}) or {}
    return float(section.get("tol", 1e-12)), int(section.get("max_iter", 200))


def well_centered_tol(config: dict[str, Any]) -> float:
    """well-centered 判定のマージンを返す。"""
    return float((config.get("mesh", {}) or {}).get("well_centered_tol", 1e-9))


def setup_logging(config: dict[str, Any], level: str | None = None) -> None:
    """loguru のシンクを設定する。

    既定シンクを外して標準エラーに出力し、log_dir が設定されていれば
    ローテーション付きのファイルシンクを追加する。
    """
    section = config.get("logging", {}) or {}
    stderr_level = level or section.get("level", "INFO")
    logger.remove()
    logger.add(sys.stderr, level=stderr_level, format="{time:HH:mm:ss} | {level:<8} | {message}")
    log_dir = section.get("log_dir")
    if log_dir:
        Path(log_dir).mkdir(parents=True, exist_ok=True)
        logger.add(
            str(Path(log_dir) / "rdnet_{time:YYYYMMDD}.log"),
            level="DEBUG",
            rotation=section.get("rotation", "10 MB"),
            retention=section.get("retention", "30 days"),
            encoding="utf-8",
        )
