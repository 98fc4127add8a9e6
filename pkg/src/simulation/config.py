"""時間積分の設定。"""

from dataclasses import asdict, dataclass
from typing import Any

from src.errors import ValidationError

METHODS = ("rk45", "semi-implicit")
POSITIVITY_POLICIES = ("reject-and-halve",)


@dataclass(frozen=True)
class IntegratorConfig:
    """時間積分の設定。

    Attributes:
        method: "rk45"（Dormand–Prince 5(4)）または "semi-implicit"（拡散陰的IMEX）
        rtol: 相対許容誤差
        atol: 絶対許容誤差
        h_init: 初期ステップ幅
        h_min: ステップ幅の下限（下回るとStepSizeUnderflowError）
        h_max: ステップ幅の上限。semi-implicit では h_max/2^k に量子化する
        t_end: 積分終了時刻
        max_steps: 試行ステップ数（採択+棄却）の上限
        positivity: 正値性ポリシー
        stop_on_steady: 定常（CONSENSUS / NONUNIFORM_STEADY）到達で打ち切るか
        eps_consensus: コンセンサス判定の不一致しきい値
        eps_stationary: 定常判定の（区間平均）変化率·τ のしきい値
        characteristic_time: 定常判定の代表時間 τ
    """

    method: str = "rk45"
    rtol: float = 1e-8
    atol: float = 1e-10
    h_init: float = 1e-3
    h_min: float = 1e-12
    h_max: float = 1.0
    t_end: float = 50.0
    max_steps: int = 100_000
    positivity: str = "reject-and-halve"
    stop_on_steady: bool = True
    eps_consensus: float = 1e-6
    eps_stationary: float = 1e-6
    characteristic_time: float = 1.0

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValidationError(f"method は {METHODS} のいずれかである必要があります: {self.method!r}")
        if self.positivity not in POSITIVITY_POLICIES:
            raise ValidationError(f"未対応の正値性ポリシーです: {self.positivity!r}")
        for name in ("rtol", "atol", "eps_consensus", "eps_stationary", "characteristic_time", "t_end"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} は正である必要があります: {getattr(self, name)}")
        if not (0 < self.h_min <= self.h_init <= self.h_max):
            raise ValidationError(
                f"0 < h_min ≤ h_init ≤ h_max を満たす必要があります: "
                f"h_min={self.h_min}, h_init={self.h_init}, h_max={self.h_max}"
            )
        if self.max_steps < 1:
            raise ValidationError(f"max_steps は1以上である必要があります: {self.max_steps}")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)
