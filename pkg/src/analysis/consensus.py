"""空間コンセンサスの数値検証。

閉鎖系を積分し、最終状態が一様かつ平衡集合 E に属すること、
および極限が初期状態の双対体積加重平均 x̂ の適合類における
G の最小化点と一致することを確認する。
"""

from dataclasses import dataclass, field

import numpy as np
from loguru import logger
from numpy.typing import ArrayLike, NDArray

from src.analysis.lyapunov import LyapunovReport, lyapunov_report
from src.analysis.moieties import format_moiety
from src.compartmental.system import CompartmentalSystem, moiety_totals, volume_weighted_mean
from src.crn.equilibrium import compute_limit_point, equilibria_set, membership_residual
from src.errors import NotConvergedError
from src.simulation.config import IntegratorConfig
from src.simulation.integrator import integrate
from src.simulation.monitors import ConvergenceStatus, PersistencyBound, detect_convergence, monitor_persistency
from src.simulation.trajectory import Trajectory


@dataclass
class ConsensusReport:
    """コンセンサス検証レポート。

    Attributes:
        status: 収束判定
        final_time: 最終時刻
        final_disagreement: 最終時刻の不一致
        membership_residual: ‖Sᵀ Ln(x̄_sim/x*)‖∞（x̄_sim は最終状態の双対体積加重平均）
        predicted_limit: x̂ の適合類での G の最小化点
        simulated_limit: x̄_sim
        prediction_error: maxⱼ ‖x^j(t_end) - x̄_pred‖∞
        lyapunov: G_d の単調性レポート
        moiety_drift: モエティラベル → 相対ドリフト |M(t_end) - M(t₀)| / |M(t₀)|
        persistency: 濃度の経験的下界
        alpha: 拡散係数の最小値
        trajectory: 積分結果
    """

    status: ConvergenceStatus
    final_time: float
    final_disagreement: float
    membership_residual: float
    predicted_limit: NDArray[np.float64]
    simulated_limit: NDArray[np.float64]
    prediction_error: float
    lyapunov: LyapunovReport
    moiety_drift: dict[str, float]
    persistency: PersistencyBound
    alpha: float
    trajectory: Trajectory = field(repr=False)

    @property
    def lyapunov_violation(self) -> float:
        return self.lyapunov.max_increase


def _relative_drift(initial: NDArray[np.float64], final: NDArray[np.float64]) -> NDArray[np.float64]:
    scale = np.maximum(np.abs(initial), np.finfo(np.float64).tiny)
    return np.asarray(np.abs(final - initial) / scale, dtype=np.float64)


def verify_consensus(
    sys: CompartmentalSystem,
    X0: ArrayLike,
    config: IntegratorConfig | None = None,
    limit_tol: float = 1e-12,
    limit_max_iter: int = 200,
) -> ConsensusReport:
    """閉鎖系を積分してコンセンサスを検証する。

    Args:
        sys: コンパートメントモデル
        X0: 正値の初期状態
        config: 積分設定
        limit_tol: 極限点計算の許容値
        limit_max_iter: 極限点計算の最大反復回数

    Returns:
        ConsensusReport（status = CONSENSUS）

    Raises:
        NotConvergedError: CONSENSUS に到達しない場合（status と途中レポートを保持）
    """
    if sys.alpha <= 0:
        logger.warning(f"α = 0 のためコンセンサスは保証されません（拡散係数 {sys.diffusion.tolist()}）")

    x0 = np.asarray(X0, dtype=np.float64).reshape(-1)
    traj = integrate(sys, x0, config)
    status = detect_convergence(traj)

    eq = equilibria_set(sys.net, sys.bf.x_star)
    x_hat = volume_weighted_mean(sys, x0)
    predicted = compute_limit_point(x_hat, eq, sys.bf, tol=limit_tol, max_iter=limit_max_iter)

    final = traj.final_state
    simulated = volume_weighted_mean(sys, final)
    prediction_error = float(np.max(np.abs(sys.layout.to_blocks(final) - predicted)))
    drift = _relative_drift(moiety_totals(sys, x0), moiety_totals(sys, final))

    report = ConsensusReport(
        status=status,
        final_time=float(traj.times[-1]),
        final_disagreement=float(traj.disagreement_max[-1]),
        membership_residual=membership_residual(simulated, eq),
        predicted_limit=predicted,
        simulated_limit=simulated,
        prediction_error=prediction_error,
        lyapunov=lyapunov_report(traj, sys),
        moiety_drift={format_moiety(w): float(d) for w, d in zip(sys.moieties, drift, strict=True)},
        persistency=monitor_persistency(traj),
        alpha=sys.alpha,
        trajectory=traj,
    )
    logger.info(
        f"コンセンサス検証: {status.value}, 不一致={report.final_disagreement:.3e}, "
        f"所属残差={report.membership_residual:.3e}, 予測誤差={prediction_error:.3e}"
    )

    if status is not ConvergenceStatus.CONSENSUS:
        raise NotConvergedError(
            f"コンセンサスに到達しませんでした: status={status.value}, t={report.final_time:.6g}, "
            f"不一致={report.final_disagreement:.3e}",
            status,
            report,
        )
    return report
