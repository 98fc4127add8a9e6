"""境界アクチュエーション実験。

時間変化する境界フラックス f̂_b(t) で開放系を積分し、種ごとの空間分散と
双対体積加重総量の時系列を記録する。パターン形成の指標として出力するのみで、
理論的な判定は行わない。

境界フラックスは compartment-major（境界頂点ごとに m 種）で並べる。
"""

from abc import ABC, abstractmethod
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Any

import numpy as np
from loguru import logger
from numpy.typing import ArrayLike, NDArray

from src.compartmental.system import CompartmentalSystem, spatial_variance, total_mass
from src.errors import DimensionMismatchError, ValidationError
from src.simulation.config import IntegratorConfig
from src.simulation.integrator import integrate
from src.simulation.trajectory import Trajectory


class BoundarySchedule(ABC):
    """境界フラックスのスケジュール t ↦ f̂_b。"""

    @property
    @abstractmethod
    def size(self) -> int:
        """f̂_b の長さ（m·N_b）。"""
        ...

    @abstractmethod
    def __call__(self, t: float) -> NDArray[np.float64]:
        ...

    def bound(self) -> float:
        """|f̂_b(t)| の上界。"""
        return float("inf")


@dataclass(frozen=True)
class ZeroSchedule(BoundarySchedule):
    """f̂_b ≡ 0（閉鎖系と同値）。"""

    n_signals: int

    @property
    def size(self) -> int:
        return self.n_signals

    def __call__(self, t: float) -> NDArray[np.float64]:
        return np.zeros(self.n_signals)

    def bound(self) -> float:
        return 0.0


@dataclass(frozen=True)
class ConstantSchedule(BoundarySchedule):
    """f̂_b ≡ values。"""

    values: tuple[float, ...]

    @property
    def size(self) -> int:
        return len(self.values)

    def __call__(self, t: float) -> NDArray[np.float64]:
        return np.array(self.values, dtype=np.float64)

    def bound(self) -> float:
        return float(np.max(np.abs(self.values), initial=0.0))


@dataclass(frozen=True)
class PeriodicSchedule(BoundarySchedule):
    """f̂_b(t) = mean + amplitude · sin(2πt / period)。"""

    mean: tuple[float, ...]
    amplitude: tuple[float, ...]
    period: float

    def __post_init__(self) -> None:
        if len(self.mean) != len(self.amplitude):
            raise DimensionMismatchError("mean と amplitude の長さが一致しません")
        if not self.period > 0:
            raise ValidationError(f"period は正である必要があります: {self.period}")

    @property
    def size(self) -> int:
        return len(self.mean)

    def __call__(self, t: float) -> NDArray[np.float64]:
        phase = np.sin(2.0 * np.pi * t / self.period)
        return np.asarray(self.mean, dtype=np.float64) + np.asarray(self.amplitude, dtype=np.float64) * phase

    def bound(self) -> float:
        return float(np.max(np.abs(self.mean) + np.abs(self.amplitude), initial=0.0))


def _expand(value: Any, size: int, name: str) -> tuple[float, ...]:
    """スカラーは全成分に複製し、リストは長さを確認する。"""
    if isinstance(value, int | float):
        return tuple(float(value) for _ in range(size))
    values = tuple(float(v) for v in value)
    if len(values) != size:
        raise DimensionMismatchError(f"{name} の長さ {len(values)} が m·N_b = {size} と一致しません")
    return values


def _site_values(spec: Mapping[str, Any], size: int, n_species: int, key: str) -> tuple[float, ...]:
    """sites 指定（境界サイト番号 → 種ごとの値）を compartment-major のベクトルに展開する。"""
    values = np.zeros(size)
    for site, per_species in dict(spec.get("sites", {})).items():
        offset = int(site) * n_species
        raw = per_species.get(key, 0.0) if isinstance(per_species, Mapping) else per_species
        entries = _expand(raw, n_species, f"sites[{site}]")
        if offset < 0 or offset + n_species > size:
            raise ValidationError(f"境界サイト番号 {site} が範囲外です")
        values[offset:offset + n_species] = entries
    return tuple(values.tolist())


def schedule_from_dict(spec: Mapping[str, Any], size: int, n_species: int = 1) -> BoundarySchedule:
    """辞書（YAML/CLI形式）から境界スケジュールを生成する。

    形式:
        {"kind": "zero"}
        {"kind": "constant", "values": 0.5}                 # スカラーは全成分に複製
        {"kind": "constant", "sites": {0: [1.0, 0.0]}}      # 境界サイトごとの種別値
        {"kind": "periodic", "mean": 0.0, "amplitude": 0.1, "period": 2.0}

    Raises:
        ValidationError: 未知の kind や不正な値
    """
    kind = str(spec.get("kind", "zero"))
    if kind == "zero":
        return ZeroSchedule(size)
    if kind == "constant":
        if "sites" in spec:
            return ConstantSchedule(_site_values(spec, size, n_species, "value"))
        return ConstantSchedule(_expand(spec.get("values", 0.0), size, "values"))
    if kind == "periodic":
        if "sites" in spec:
            mean = _site_values(spec, size, n_species, "mean")
            amplitude = _site_values(spec, size, n_species, "amplitude")
        else:
            mean = _expand(spec.get("mean", 0.0), size, "mean")
            amplitude = _expand(spec.get("amplitude", 0.0), size, "amplitude")
        return PeriodicSchedule(mean=mean, amplitude=amplitude, period=float(spec.get("period", 1.0)))
    raise ValidationError(f"未知の境界スケジュールです: kind={kind!r}（zero / constant / periodic）")


@dataclass
class ActuationResult:
    """境界アクチュエーション実験の結果。

    Attributes:
        trajectory: 開放系の積分結果
        spatial_variance: 種ごとの空間分散の時系列 (T, m)
        total_mass: 種ごとの双対体積加重総量の時系列 (T, m)
    """

    trajectory: Trajectory
    spatial_variance: NDArray[np.float64]
    total_mass: NDArray[np.float64]

    @property
    def times(self) -> NDArray[np.float64]:
        return self.trajectory.times


def boundary_actuation_experiment(
    sys: CompartmentalSystem,
    schedule: BoundarySchedule,
    config: IntegratorConfig | None = None,
    X0: ArrayLike | None = None,
) -> ActuationResult:
    """時間変化する境界フラックスで開放系を積分する。

    Args:
        sys: コンパートメントモデル
        schedule: 境界スケジュール（[0, t_end] で有界）
        config: 積分設定
        X0: 初期状態（省略時は一様平衡 1_N ⊗ x*）

    Raises:
        DimensionMismatchError: スケジュールの長さが m·N_b でない場合
        ValidationError: スケジュールが有界でない場合
    """
    if schedule.size != sys.n_boundary_signals:
        raise DimensionMismatchError(
            f"境界スケジュールの長さ {schedule.size} が m·N_b = {sys.n_boundary_signals} と一致しません"
        )
    if not np.isfinite(schedule.bound()):
        raise ValidationError("境界スケジュールは有界である必要があります")

    initial = sys.x_star_stacked.copy() if X0 is None else np.asarray(X0, dtype=np.float64)
    logger.info(f"境界アクチュエーション実験: {type(schedule).__name__}, 上界={schedule.bound():.6g}")
    traj = integrate(sys, initial, config, forcing=schedule)
    variance = np.array([spatial_variance(sys, X) for X in traj.states])
    mass = np.array([total_mass(sys, X) for X in traj.states])
    return ActuationResult(trajectory=traj, spatial_variance=variance, total_mass=mass)
