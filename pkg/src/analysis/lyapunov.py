"""全離散自由エネルギー G_d を用いたLyapunov減少の検証。"""

from dataclasses import dataclass

import numpy as np
from loguru import logger
from scipy.integrate import trapezoid

from src.compartmental.system import CompartmentalSystem, energy_rate
from src.simulation.trajectory import Trajectory

# 積分誤差を吸収するスラックの係数（10·rtol·max(1, G_d(t₀))）
SLACK_FACTOR = 10.0
_DEFAULT_RTOL = 1e-8


@dataclass(frozen=True)
class LyapunovReport:
    """G_d の単調性レポート。

    Attributes:
        max_increase: maxᵢ (G_d(tᵢ₊₁) - G_d(tᵢ))
        total_decrease: G_d(t₀) - G_d(t_end)
        dissipation_integral: -∫ dG_d/dt dt（各サンプルの散逸率の台形積分）
        slack: 許容増加量 10·rtol·max(1, G_d(t₀))
        violated: max_increase が slack を超えたか
    """

    max_increase: float
    total_decrease: float
    dissipation_integral: float
    slack: float
    violated: bool


def lyapunov_report(traj: Trajectory, sys: CompartmentalSystem) -> LyapunovReport:
    """閉鎖系の軌道について G_d の増加・減少量と散逸積分を集計する。"""
    energy = traj.energy
    max_increase = float(np.max(np.diff(energy))) if energy.size > 1 else 0.0
    total_decrease = float(energy[0] - energy[-1])
    rates = np.array([energy_rate(sys, X) for X in traj.states])
    dissipation = float(-trapezoid(rates, traj.times)) if traj.n_samples > 1 else 0.0

    rtol = traj.config.rtol if traj.config is not None else _DEFAULT_RTOL
    slack = SLACK_FACTOR * rtol * max(1.0, float(energy[0]))
    violated = max_increase > slack
    if violated:
        logger.warning(
            f"G_d の増加がスラックを超えました: 最大増加 {max_increase:.3e} > {slack:.3e}（積分設定を見直してください）"
        )
    return LyapunovReport(
        max_increase=max_increase,
        total_decrease=total_decrease,
        dissipation_integral=dissipation,
        slack=slack,
        violated=violated,
    )
