"""積分結果（時系列とモニタ系列）。"""

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from src.errors import DimensionMismatchError, ValidationError
from src.simulation.config import IntegratorConfig

TERMINATION_REASONS = ("t_end", "steady")


@dataclass
class Trajectory:
    """X(t) の時系列とモニタ系列。

    Attributes:
        times: サンプル時刻（狭義単調増加）
        states: 各時刻の状態 (T, mN)、compartment-major
        energy: G_d(tᵢ)
        disagreement_max: maxⱼ,ᵢ |x^j_i/x*_i - meanⱼ| の時系列
        min_concentration: minⱼ,ᵢ x^j_i の時系列
        derivative_norm: ‖Ẋ‖∞ の時系列
        n_species: 種数 m
        termination_reason: "t_end" または "steady"
        n_accepted: 採択ステップ数
        n_rejected: 棄却ステップ数（誤差超過・正値性違反）
        config: 積分設定
        species_names: 種ラベル
    """

    times: NDArray[np.float64]
    states: NDArray[np.float64]
    energy: NDArray[np.float64]
    disagreement_max: NDArray[np.float64]
    min_concentration: NDArray[np.float64]
    derivative_norm: NDArray[np.float64]
    n_species: int
    termination_reason: str = "t_end"
    n_accepted: int = 0
    n_rejected: int = 0
    config: IntegratorConfig | None = None
    species_names: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        self.times = np.asarray(self.times, dtype=np.float64).reshape(-1)
        n = self.times.size
        if n == 0:
            raise ValidationError("Trajectory は1サンプル以上必要です")
        self.states = np.asarray(self.states, dtype=np.float64).reshape(n, -1)
        for name in ("energy", "disagreement_max", "min_concentration", "derivative_norm"):
            series = np.asarray(getattr(self, name), dtype=np.float64).reshape(-1)
            if series.size != n:
                raise DimensionMismatchError(f"{name} の長さ {series.size} がサンプル数 {n} と一致しません")
            setattr(self, name, series)
        if self.states.shape[1] % self.n_species != 0:
            raise DimensionMismatchError(f"状態の長さ {self.states.shape[1]} が種数 {self.n_species} の倍数ではありません")
        if np.any(np.diff(self.times) <= 0):
            raise ValidationError("サンプル時刻は狭義単調増加である必要があります")
        if np.any(self.states <= 0):
            raise ValidationError("保存された状態に0以下の成分があります")
        if self.termination_reason not in TERMINATION_REASONS:
            raise ValidationError(f"未知の終了理由です: {self.termination_reason!r}")
        self.species_names = tuple(self.species_names) or tuple(f"S{i + 1}" for i in range(self.n_species))

    @property
    def n_samples(self) -> int:
        return int(self.times.size)

    @property
    def n_compartments(self) -> int:
        return int(self.states.shape[1] // self.n_species)

    @property
    def initial_state(self) -> NDArray[np.float64]:
        return self.states[0]

    @property
    def final_state(self) -> NDArray[np.float64]:
        return self.states[-1]

    def blocks(self, index: int = -1) -> NDArray[np.float64]:
        """サンプル index の状態を (N, m) ブロックで返す。"""
        return self.states[index].reshape(self.n_compartments, self.n_species)
