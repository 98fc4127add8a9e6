"""収束判定と正値性（persistency）のモニタ。

定常判定に用いる変化率は、直近の代表時間 τ の区間での平均変化率
‖X(t_n) - X(s)‖∞ / (t_n - s)（s は t_n - τ 以前の最新サンプル時刻）とする。
履歴が τ に満たない間は瞬時の ‖Ẋ‖∞ を用いる。
"""

from bisect import bisect_right
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np
from loguru import logger
from numpy.typing import ArrayLike, NDArray

from src.simulation.trajectory import Trajectory


class ConvergenceStatus(str, Enum):
    """収束判定の結果。"""

    CONSENSUS = "CONSENSUS"
    NONUNIFORM_STEADY = "NONUNIFORM_STEADY"
    RUNNING = "RUNNING"


def disagreement_spread(ratio_blocks: ArrayLike) -> float:
    """不一致 x^j/x* の (N, m) ブロックから maxⱼ,ᵢ |r^j_i - meanⱼ r_i| を返す。"""
    blocks = np.asarray(ratio_blocks, dtype=np.float64)
    return float(np.max(np.abs(blocks - blocks.mean(axis=0))))


def stationarity_rate(
    times: Sequence[float],
    states: Sequence[NDArray[np.float64]],
    derivative_norm: Sequence[float],
    window: float,
) -> float:
    """直近 window の区間での平均変化率を返す。

    Args:
        times: 狭義単調増加のサンプル時刻
        states: 各時刻の状態
        derivative_norm: 各時刻の ‖Ẋ‖∞
        window: 区間幅（代表時間 τ）

    Returns:
        t_n - t_0 ≥ window なら ‖X(t_n) - X(s)‖∞ / (t_n - s)、そうでなければ最新の ‖Ẋ‖∞
    """
    t_last = float(times[-1])
    if t_last - float(times[0]) < window:
        return float(derivative_norm[-1])
    k = bisect_right(times, t_last - window) - 1
    displacement = np.max(np.abs(np.asarray(states[-1]) - np.asarray(states[k])))
    return float(displacement / (t_last - float(times[k])))


def classify(
    spread: float,
    rate: float,
    eps_consensus: float,
    eps_stationary: float,
    characteristic_time: float = 1.0,
) -> ConvergenceStatus:
    """不一致と変化率から収束状態を判定する。"""
    if rate * characteristic_time >= eps_stationary:
        return ConvergenceStatus.RUNNING
    if spread < eps_consensus:
        return ConvergenceStatus.CONSENSUS
    return ConvergenceStatus.NONUNIFORM_STEADY


def detect_convergence(
    traj: Trajectory,
    eps_consensus: float | None = None,
    eps_stationary: float | None = None,
    characteristic_time: float | None = None,
) -> ConvergenceStatus:
    """軌道の最終サンプルで収束状態を判定する。

    しきい値を省略した場合は軌道の積分設定の値を用いる。
    """
    config = traj.config
    eps_c = eps_consensus if eps_consensus is not None else (config.eps_consensus if config else 1e-6)
    eps_s = eps_stationary if eps_stationary is not None else (config.eps_stationary if config else 1e-6)
    tau = characteristic_time if characteristic_time is not None else (config.characteristic_time if config else 1.0)
    return classify(
        float(traj.disagreement_max[-1]),
        stationarity_rate(traj.times, traj.states, traj.derivative_norm, tau),
        eps_c,
        eps_s,
        tau,
    )


@dataclass(frozen=True)
class PersistencyBound:
    """濃度の経験的下界とその位置。

    Attributes:
        value: 全時刻・全成分での最小濃度
        time: 最小を取った時刻
        compartment: コンパートメント番号
        species: 種番号
        species_name: 種ラベル
    """

    value: float
    time: float
    compartment: int
    species: int
    species_name: str


def monitor_persistency(traj: Trajectory) -> PersistencyBound:
    """軌道全体での最小濃度と (時刻, コンパートメント, 種) を返し、ログに記録する。"""
    flat = int(np.argmin(traj.states))
    sample, position = divmod(flat, traj.states.shape[1])
    compartment, species = divmod(position, traj.n_species)
    bound = PersistencyBound(
        value=float(traj.states[sample, position]),
        time=float(traj.times[sample]),
        compartment=compartment,
        species=species,
        species_name=traj.species_names[species],
    )
    logger.info(
        f"濃度の経験的下界: {bound.value:.6g} "
        f"(t={bound.time:.6g}, コンパートメント={compartment}, 種={bound.species_name})"
    )
    return bound
