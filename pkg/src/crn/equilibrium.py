"""熱力学平衡の導出、平衡反応定数、平衡集合の判定と極限点計算。

入力は通常の速度定数 (k_fwd, k_bwd) とし、以下を導出する:
    1. Sᵀ Ln x* = Ln(k_fwd/k_bwd) の最小ノルム最小二乗解 → x*
    2. κ_j = k_fwd_j exp(Z_srcⱼᵀ Ln x*) = k_bwd_j exp(Z_prodⱼᵀ Ln x*)
    3. 初期値 x0 の適合類 x0 + im(S) 上での G の最小化 → 極限点 x̄
"""

import numpy as np
import scipy.linalg
from loguru import logger
from numpy.typing import ArrayLike, NDArray

from src.analysis.moieties import conserved_moieties
from src.crn.kinetics import gibbs_free_energy, require_positive
from src.crn.network import BalancedForm, EquilibriaSet, ReactionNetwork, stoichiometric_matrix
from src.errors import DimensionMismatchError, NoConvergenceError, NotDetailedBalancedError

# 詳細釣り合いの相対許容誤差
DETAILED_BALANCE_RTOL = 1e-10
# Armijo条件の係数
_ARMIJO_C = 1e-4


def find_thermodynamic_equilibrium(net: ReactionNetwork, tol: float = 1e-10) -> NDArray[np.float64]:
    """速度定数から熱力学平衡 x* を求める。

    Sᵀ Ln x* = Ln(k_fwd/k_bwd) を最小二乗で解き、ker(Sᵀ) ≠ 0 の場合は
    最小ノルムの Ln x* を選ぶため結果は決定的。

    Args:
        net: 反応ネットワーク
        tol: 残差 ‖Sᵀ Ln x* - Ln(k_fwd/k_bwd)‖∞ の許容値

    Returns:
        正値の熱力学平衡 x*

    Raises:
        NotDetailedBalancedError: 残差が tol を超える場合（Wegscheider条件違反）
    """
    if net.n_reactions == 0:
        return np.ones(net.n_species)

    St = stoichiometric_matrix(net).T.astype(np.float64)
    log_keq = np.log(net.k_fwd / net.k_bwd)
    log_x, _, rank, _ = scipy.linalg.lstsq(St, log_keq)
    residual = float(np.max(np.abs(St @ log_x - log_keq)))
    if residual > tol:
        raise NotDetailedBalancedError(
            f"速度定数が詳細釣り合い条件を満たしません: 残差 {residual:.3e} > tol {tol:.1e} "
            f"(Ln(k_fwd/k_bwd) が im(Sᵀ) に含まれない)"
        )
    logger.debug(f"熱力学平衡を導出: rank(S)={rank}, 残差={residual:.3e}")
    return np.exp(log_x)


def balanced_rate_constants(
    net: ReactionNetwork,
    x_star: ArrayLike,
    rtol: float = DETAILED_BALANCE_RTOL,
) -> NDArray[np.float64]:
    """平衡反応定数 κ(x*) を返す。

    正反応側 k_fwd exp(Z_srcᵀ Ln x*) と逆反応側 k_bwd exp(Z_prodᵀ Ln x*) の
    一致を相対誤差 rtol で検証する。

    Raises:
        NotDetailedBalancedError: いずれかの反応で両者が一致しない場合
        DomainError: x* に0以下の成分がある場合
    """
    xs = require_positive(x_star, "x_star").reshape(-1)
    if xs.size != net.n_species:
        raise DimensionMismatchError(f"x* の次元 {xs.size} が種数 {net.n_species} と一致しません")
    log_xs = np.log(xs)
    forward = net.k_fwd * np.exp(log_xs @ net.Z[:, net.source_complexes])
    backward = net.k_bwd * np.exp(log_xs @ net.Z[:, net.product_complexes])
    mismatch = np.abs(forward - backward) > rtol * np.maximum(forward, backward)
    if np.any(mismatch):
        j = int(np.flatnonzero(mismatch)[0])
        raise NotDetailedBalancedError(
            f"x* は反応 {net.reaction_names[j]} で詳細釣り合いを満たしません: "
            f"正反応 {forward[j]:.6g} ≠ 逆反応 {backward[j]:.6g}"
        )
    return np.asarray(forward, dtype=np.float64)


def balance(net: ReactionNetwork, x_star: ArrayLike | None = None, tol: float = 1e-10) -> BalancedForm:
    """与えられた x*（省略時は導出）から BalancedForm を構築する。"""
    xs = find_thermodynamic_equilibrium(net, tol) if x_star is None else require_positive(x_star, "x_star")
    return BalancedForm(x_star=xs, kappa=balanced_rate_constants(net, xs))


def equilibria_set(net: ReactionNetwork, x_star: ArrayLike) -> EquilibriaSet:
    """x* を基準とする平衡集合 E を構築する。"""
    S = stoichiometric_matrix(net)
    return EquilibriaSet(
        S=S,
        x_star=require_positive(x_star, "x_star").reshape(-1),
        kernel_basis=conserved_moieties(S),
    )


def membership_residual(x_cand: ArrayLike, eq: EquilibriaSet) -> float:
    """平衡集合への所属残差 ‖Sᵀ(Ln x - Ln x*)‖∞ を返す。"""
    xv = require_positive(x_cand, "x_cand").reshape(-1)
    if xv.size != eq.x_star.size:
        raise DimensionMismatchError(f"状態の次元 {xv.size} が種数 {eq.x_star.size} と一致しません")
    if eq.S.shape[1] == 0:
        return 0.0
    return float(np.max(np.abs(eq.S.T @ (np.log(xv) - np.log(eq.x_star)))))


def is_equilibrium(x_cand: ArrayLike, eq: EquilibriaSet, tol: float = 1e-10) -> bool:
    """x_cand が熱力学平衡集合 E に属するかを判定する。

    Raises:
        DomainError: x_cand に0以下の成分がある場合
    """
    return membership_residual(x_cand, eq) <= tol


def compute_limit_point(
    x0: ArrayLike,
    eq: EquilibriaSet,
    bf: BalancedForm | None = None,
    tol: float = 1e-12,
    max_iter: int = 200,
) -> NDArray[np.float64]:
    """x0 の適合類 {x0 + Sξ} ∩ 正象限 上で G を最小化する平衡点 x̄ を返す。

    im(S) の正規直交基底 V による縮約座標 ξ 上で減衰Newton法を用い、
    正値性を保つようにバックトラックする。x0 が既に平衡なら x0 をそのまま返す。

    Args:
        x0: 正値の初期濃度
        eq: 平衡集合
        bf: 平衡形式（指定時は x* の整合を確認）
        tol: 停留条件 ‖Sᵀ Ln(x̄/x*)‖∞ の許容値
        max_iter: 最大反復回数

    Raises:
        NoConvergenceError: max_iter 回で収束しない場合
    """
    x = require_positive(x0, "x0").reshape(-1).copy()
    x_star = eq.x_star
    if bf is not None and not np.array_equal(bf.x_star, x_star):
        raise DimensionMismatchError("BalancedForm と EquilibriaSet の x* が一致しません")
    if x.size != x_star.size:
        raise DimensionMismatchError(f"x0 の次元 {x.size} が種数 {x_star.size} と一致しません")

    S = eq.S.astype(np.float64)
    residual = membership_residual(x, eq)
    if residual <= tol or S.shape[1] == 0:
        return x

    V = scipy.linalg.orth(S)
    for iteration in range(max_iter):
        log_ratio = np.log(x / x_star)
        grad = V.T @ log_ratio
        hessian = V.T @ (V / x[:, np.newaxis])
        step_xi = -np.linalg.solve(hessian, grad)
        direction = V @ step_xi
        slope = float(grad @ step_xi)
        energy = gibbs_free_energy(x, x_star)
        grad_norm = float(np.max(np.abs(grad)))

        step = 1.0
        while step > 1e-16:
            candidate = x + step * direction
            if np.all(candidate > 0):
                sufficient = gibbs_free_energy(candidate, x_star) <= energy + _ARMIJO_C * step * slope
                smaller_grad = float(np.max(np.abs(V.T @ np.log(candidate / x_star)))) < grad_norm
                if sufficient or smaller_grad:
                    break
            step *= 0.5
        else:
            break

        x = candidate
        residual = membership_residual(x, eq)
        logger.debug(f"極限点Newton反復 {iteration + 1}: step={step:.3g}, 残差={residual:.3e}")
        if residual <= tol:
            return x

    raise NoConvergenceError(f"極限点の計算が {max_iter} 回の反復で収束しませんでした", residual)
