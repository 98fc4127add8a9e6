"""コンパートメントモデルの適応時間積分。

2つの積分法を提供する:
    - rk45: Dormand–Prince 5(4) 埋め込み対（FSAL、Hairer型RMS誤差ノルム）
    - semi-implicit: 拡散部 L X を陰的、反応項と境界入力を陽的に扱うIMEX Euler。
      ステップ倍化による誤差推定とRichardson外挿（2次）を行い、
      ステップ幅を h_max/2^k に量子化して (I - hL) のLU分解を再利用する

正値性ポリシー（reject-and-halve）:
    ステージ評価または結果に0以下の成分が現れたステップは棄却し、h を半分にする。
"""

from abc import ABC, abstractmethod
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
import scipy.sparse
import scipy.sparse.linalg
from loguru import logger
from numpy.typing import ArrayLike, NDArray

from src.compartmental.system import (
    CompartmentalSystem,
    closed_rhs,
    diffusion_stiffness,
    open_rhs,
    reaction_field_all,
    total_energy,
)
from src.crn.kinetics import require_positive
from src.errors import DimensionMismatchError, DomainError, MaxStepsExceededError, StepSizeUnderflowError
from src.simulation.config import IntegratorConfig
from src.simulation.monitors import ConvergenceStatus, classify, disagreement_spread, stationarity_rate
from src.simulation.trajectory import Trajectory

Forcing = Callable[[float], ArrayLike]
RHS = Callable[[float, NDArray[np.float64]], NDArray[np.float64]]

# ステップ幅制御の係数
_SAFETY = 0.9
_FAC_MIN = 0.2
_FAC_MAX = 5.0

# Dormand–Prince 5(4) の負の実軸上の安定域の長さ（近似）
_DP_STABILITY = 3.3
# 安定性だけで必要になる推定ステップ数がこれを超えたら警告する
_STIFF_STEP_WARNING = 1000

# Dormand–Prince 5(4) 係数
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])


def error_norm(
    error: NDArray[np.float64],
    y0: NDArray[np.float64],
    y1: NDArray[np.float64],
    rtol: float,
    atol: float,
) -> float:
    """Hairer型のスケール付きRMS誤差ノルムを返す（1以下で採択）。"""
    scale = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean((error / scale) ** 2)))


@dataclass
class StepResult:
    """1ステップの試行結果。

    Attributes:
        state: 新しい状態
        error: スケール付き誤差ノルム
        derivative: 新しい状態での右辺（得られない場合はNone）
    """

    state: NDArray[np.float64]
    error: float
    derivative: NDArray[np.float64] | None = None


class Stepper(ABC):
    """1ステップ積分法の基底クラス。"""

    #: 誤差推定の次数（ステップ幅更新の指数 1/error_order に用いる）
    error_order: int = 1

    @abstractmethod
    def attempt(self, t: float, X: NDArray[np.float64], h: float) -> StepResult:
        """t から h だけ進めた試行結果を返す。

        Raises:
            DomainError: ステージ評価で0以下の成分が現れた場合
        """
        ...

    def accept(self, result: StepResult) -> None:
        """採択されたステップを通知する。"""

    def quantize(self, h: float) -> float:
        """提案ステップ幅を実際に用いる幅に丸める。"""
        return h


class DormandPrince(Stepper):
    """Dormand–Prince 5(4) 埋め込みRunge–Kutta法（FSAL）。"""

    error_order = 5

    def __init__(self, rhs: RHS, config: IntegratorConfig) -> None:
        self._rhs = rhs
        self._config = config
        self._first_stage: NDArray[np.float64] | None = None

    def attempt(self, t: float, X: NDArray[np.float64], h: float) -> StepResult:
        if self._first_stage is None:
            self._first_stage = self._rhs(t, X)
        stages = [self._first_stage]
        for i in range(1, 7):
            increment = sum((a * k for a, k in zip(_DP_A[i], stages, strict=True)), np.zeros_like(X))
            stages.append(self._rhs(t + _DP_C[i] * h, X + h * increment))
        y_new = X + h * sum((b * k for b, k in zip(_DP_B, stages, strict=True)), np.zeros_like(X))
        err_vec = h * sum((e * k for e, k in zip(_DP_E, stages, strict=True)), np.zeros_like(X))
        err = error_norm(err_vec, X, y_new, self._config.rtol, self._config.atol)
        return StepResult(state=y_new, error=err, derivative=stages[6])

    def accept(self, result: StepResult) -> None:
        self._first_stage = result.derivative


class SemiImplicitEuler(Stepper):
    """拡散陰的・反応陽的のIMEX Euler法（ステップ倍化 + Richardson外挿）。

    (I - hL) X_{n+1} = X_n + h N(t_n, X_n)
    L = -(⋆₀⁻¹ ⊗ I) Δ_d diag(1/X*)、N = F(X) + (⋆₀⁻¹ ⊗ I)(tr ⊗ I)ᵀ f̂_b(t)
    """

    error_order = 2

    def __init__(self, sys: CompartmentalSystem, forcing: Forcing | None, config: IntegratorConfig) -> None:
        self._sys = sys
        self._forcing = forcing
        self._config = config
        self._identity = scipy.sparse.identity(sys.layout.size, format="csc")
        self._factorizations: dict[float, scipy.sparse.linalg.SuperLU] = {}

    def quantize(self, h: float) -> float:
        h_max = self._config.h_max
        if h >= h_max:
            return h_max
        k = int(np.ceil(np.log2(h_max / h)))
        return float(h_max / 2.0**k)

    def _solver(self, h: float) -> scipy.sparse.linalg.SuperLU:
        lu = self._factorizations.get(h)
        if lu is None:
            matrix = scipy.sparse.csc_matrix(self._identity - h * self._sys.diffusion_operator)
            lu = scipy.sparse.linalg.splu(matrix)
            self._factorizations[h] = lu
            logger.debug(f"(I - hL) をLU分解: h={h:.6g}, キャッシュ数={len(self._factorizations)}")
        return lu

    def _explicit_part(self, t: float, X: NDArray[np.float64]) -> NDArray[np.float64]:
        term = reaction_field_all(self._sys, X)
        if self._forcing is not None:
            flux = np.asarray(self._forcing(t), dtype=np.float64).reshape(-1)
            term = term + self._sys.inv_star0 * (self._sys.trace_lift @ flux)
        return term

    def _euler(self, t: float, X: NDArray[np.float64], h: float) -> NDArray[np.float64]:
        rhs = X + h * self._explicit_part(t, X)
        return np.asarray(self._solver(h).solve(rhs), dtype=np.float64)

    def attempt(self, t: float, X: NDArray[np.float64], h: float) -> StepResult:
        coarse = self._euler(t, X, h)
        half = self._euler(t, X, 0.5 * h)
        fine = self._euler(t + 0.5 * h, require_positive(half, "X"), 0.5 * h)
        y_new = 2.0 * fine - coarse
        err = error_norm(fine - coarse, X, y_new, self._config.rtol, self._config.atol)
        return StepResult(state=y_new, error=err)


def make_stepper(sys: CompartmentalSystem, rhs: RHS, config: IntegratorConfig, forcing: Forcing | None) -> Stepper:
    """設定に応じた積分法を生成する。"""
    if config.method == "semi-implicit":
        return SemiImplicitEuler(sys, forcing, config)
    return DormandPrince(rhs, config)


class _Recorder:
    """採択状態ごとのモニタ値を蓄積する。"""

    def __init__(self, sys: CompartmentalSystem) -> None:
        self._sys = sys
        self.times: list[float] = []
        self.states: list[NDArray[np.float64]] = []
        self.energy: list[float] = []
        self.spread: list[float] = []
        self.minimum: list[float] = []
        self.derivative_norm: list[float] = []

    def record(self, t: float, X: NDArray[np.float64], derivative: NDArray[np.float64]) -> None:
        if np.any(X <= 0):
            raise DomainError(f"正値でない状態は保存できません: t={t:.6g}")
        ratio = self._sys.layout.to_blocks(X / self._sys.x_star_stacked)
        self.times.append(t)
        self.states.append(X.copy())
        self.energy.append(total_energy(self._sys, X))
        self.spread.append(disagreement_spread(ratio))
        self.minimum.append(float(X.min()))
        self.derivative_norm.append(float(np.max(np.abs(derivative))))


def integrate(
    sys: CompartmentalSystem,
    X0: ArrayLike,
    config: IntegratorConfig | None = None,
    forcing: Forcing | None = None,
) -> Trajectory:
    """コンパートメントモデルを t_end または定常到達まで積分する。

    Args:
        sys: コンパートメントモデル
        X0: 正値の初期状態 (mN)
        config: 積分設定（省略時は既定値）
        forcing: 境界スケジュール t ↦ f̂_b。None なら閉鎖系

    Returns:
        採択された全ステップの Trajectory

    Raises:
        DomainError: X0 に0以下の成分がある場合
        StepSizeUnderflowError: ステップ幅が h_min を下回った場合
        MaxStepsExceededError: 試行ステップ数が max_steps に達した場合
    """
    config = config or IntegratorConfig()
    X = require_positive(X0, "X0").reshape(-1).copy()
    if X.size != sys.layout.size:
        raise DimensionMismatchError(f"X0 の長さ {X.size} が m·N = {sys.layout.size} と一致しません")

    def rhs(t: float, state: NDArray[np.float64]) -> NDArray[np.float64]:
        if forcing is None:
            return closed_rhs(sys, state)
        return open_rhs(sys, state, forcing(t))[0]

    stepper = make_stepper(sys, rhs, config, forcing)
    recorder = _Recorder(sys)
    t = 0.0
    recorder.record(t, X, rhs(t, X))

    logger.info(
        f"積分開始: method={config.method}, t_end={config.t_end}, rtol={config.rtol:g}, "
        f"atol={config.atol:g}, {'開放系' if forcing is not None else '閉鎖系'}"
    )
    if config.method == "rk45":
        _warn_if_stiff(sys, config)

    h = config.h_init
    accepted = 0
    rejected = 0
    after_reject = False
    reason = "t_end"
    end_tol = 1e-12 * max(1.0, abs(config.t_end))

    while True:
        if config.stop_on_steady and _is_steady(recorder, config, forced=forcing is not None):
            reason = "steady"
            break
        if config.t_end - t <= end_tol:
            break
        if accepted + rejected >= config.max_steps:
            raise MaxStepsExceededError(
                f"試行ステップ数が上限 {config.max_steps} に達しました: t={t:.6g}, 採択={accepted}, 棄却={rejected}"
            )
        if h < config.h_min:
            raise StepSizeUnderflowError(t, h, config.h_min)

        h_try = min(stepper.quantize(h), config.t_end - t)
        try:
            result = stepper.attempt(t, X, h_try)
            positive = bool(np.all(result.state > 0) and np.all(np.isfinite(result.state)))
        except DomainError:
            positive = False
        if not positive:
            rejected += 1
            after_reject = True
            h = 0.5 * h_try
            logger.debug(f"正値性違反によりステップを棄却: t={t:.6g}, h={h_try:.3e} → {h:.3e}")
            continue

        if not result.error <= 1.0:
            rejected += 1
            after_reject = True
            factor = _SAFETY * result.error ** (-1.0 / stepper.error_order) if np.isfinite(result.error) else _FAC_MIN
            h = h_try * max(_FAC_MIN, factor)
            continue

        t = config.t_end if config.t_end - (t + h_try) <= end_tol else t + h_try
        X = result.state
        stepper.accept(result)
        accepted += 1
        derivative = result.derivative if result.derivative is not None else rhs(t, X)
        recorder.record(t, X, derivative)

        factor = _FAC_MAX if result.error == 0 else _SAFETY * result.error ** (-1.0 / stepper.error_order)
        factor = min(1.0 if after_reject else _FAC_MAX, max(_FAC_MIN, factor))
        h = min(h_try * factor, config.h_max)
        after_reject = False

    logger.info(
        f"積分終了: t={t:.6g}, 理由={reason}, 採択={accepted}, 棄却={rejected}, "
        f"G_d={recorder.energy[-1]:.6g}, 不一致={recorder.spread[-1]:.3e}"
    )
    return Trajectory(
        times=np.array(recorder.times),
        states=np.array(recorder.states),
        energy=np.array(recorder.energy),
        disagreement_max=np.array(recorder.spread),
        min_concentration=np.array(recorder.minimum),
        derivative_norm=np.array(recorder.derivative_norm),
        n_species=sys.n_species,
        termination_reason=reason,
        n_accepted=accepted,
        n_rejected=rejected,
        config=config,
        species_names=sys.net.species_names,
    )


def _is_steady(recorder: _Recorder, config: IntegratorConfig, forced: bool) -> bool:
    rate = stationarity_rate(
        recorder.times, recorder.states, recorder.derivative_norm, config.characteristic_time
    )
    if forced:
        # 外部入力のある系では瞬時の ‖Ẋ‖∞ もしきい値を下回る必要がある
        rate = max(rate, recorder.derivative_norm[-1])
    status = classify(
        recorder.spread[-1],
        rate,
        config.eps_consensus,
        config.eps_stationary,
        config.characteristic_time,
    )
    return status is not ConvergenceStatus.RUNNING


def _warn_if_stiff(sys: CompartmentalSystem, config: IntegratorConfig) -> None:
    rho = diffusion_stiffness(sys)
    estimate = config.t_end * rho / _DP_STABILITY
    if estimate > _STIFF_STEP_WARNING:
        logger.warning(
            f"拡散部が硬い系です（ρ(L) ≤ {rho:.3g}）。rk45 は安定性の制約だけで約 {estimate:.0f} ステップを要します。"
            f"method=semi-implicit を推奨します"
        )
