"""平衡質量作用反応速度とGibbs自由エネルギー。

平衡形式の反応ベクトル場:

    ẋ = -Z B K(x*) Bᵀ Exp(Zᵀ Ln(x/x*))

Gibbs自由エネルギー（Lyapunov関数）:

    G(x) = xᵀ Ln(x/x*) + (x* - x)ᵀ 1_m

ブロック版（行 = コンパートメント）の計算核は compartmental からも共用し、
N=1 のときに単一コンパートメント版と同一の演算経路になるようにしている。
"""

import numpy as np
from numpy.typing import ArrayLike, NDArray

from src.crn.network import BalancedForm, ReactionNetwork, stoichiometric_matrix
from src.errors import DimensionMismatchError, DomainError


def require_positive(x: ArrayLike, name: str = "x") -> NDArray[np.float64]:
    """全成分が正の有限値であることを確認し、float配列で返す。

    Raises:
        DomainError: 0以下または非有限の成分がある場合
    """
    arr = np.asarray(x, dtype=np.float64)
    bad = ~(np.isfinite(arr) & (arr > 0))
    if np.any(bad):
        idx = np.flatnonzero(bad.reshape(-1))[:5].tolist()
        raise DomainError(f"{name} は正値である必要があります（違反成分: {idx}）")
    return arr


def _check_species_dim(x: NDArray[np.float64], m: int) -> None:
    if x.shape[-1] != m:
        raise DimensionMismatchError(f"状態の次元 {x.shape[-1]} が種数 {m} と一致しません")


def balanced_field_blocks(
    net: ReactionNetwork,
    kappa: NDArray[np.float64],
    log_ratio: NDArray[np.float64],
) -> NDArray[np.float64]:
    """Ln(x/x*) を行ごとに並べた (N, m) 配列から、各行の反応ベクトル場を返す。"""
    complex_activity = np.exp(log_ratio @ net.Z)
    weighted = (complex_activity @ net.B) * kappa
    return -((weighted @ net.B.T) @ net.Z.T)


def reaction_vector_field(bf: BalancedForm, net: ReactionNetwork, x: ArrayLike) -> NDArray[np.float64]:
    """平衡形式の反応ベクトル場 -Z B K(x*) Bᵀ Exp(Zᵀ Ln(x/x*)) を評価する。

    Raises:
        DomainError: x に0以下の成分がある場合
    """
    xv = require_positive(x).reshape(-1)
    _check_species_dim(xv, net.n_species)
    log_ratio = np.log(xv / bf.x_star)
    return balanced_field_blocks(net, bf.kappa, log_ratio[np.newaxis, :])[0]


def reaction_fluxes(bf: BalancedForm, net: ReactionNetwork, x: ArrayLike) -> NDArray[np.float64]:
    """各反応の正味流束（正反応 - 逆反応）を返す。ẋ = S · fluxes となる。"""
    xv = require_positive(x).reshape(-1)
    _check_species_dim(xv, net.n_species)
    activity = np.exp(np.log(xv / bf.x_star) @ net.Z)
    return np.asarray(-(activity @ net.B) * bf.kappa, dtype=np.float64)


def mass_action_vector_field(net: ReactionNetwork, x: ArrayLike) -> NDArray[np.float64]:
    """通常の可逆質量作用則 Σⱼ Sⱼ (k_fwd Π x^Z_src - k_bwd Π x^Z_prod) を評価する。"""
    xv = require_positive(x).reshape(-1)
    _check_species_dim(xv, net.n_species)
    if net.n_reactions == 0:
        return np.zeros(net.n_species)
    Z_src = net.Z[:, net.source_complexes]
    Z_prod = net.Z[:, net.product_complexes]
    forward = net.k_fwd * np.prod(xv[:, np.newaxis] ** Z_src, axis=0)
    backward = net.k_bwd * np.prod(xv[:, np.newaxis] ** Z_prod, axis=0)
    return np.asarray(stoichiometric_matrix(net) @ (forward - backward), dtype=np.float64)


def gibbs_free_energy(x: ArrayLike, x_star: ArrayLike) -> float:
    """Gibbs自由エネルギー G(x) = xᵀ Ln(x/x*) + (x* - x)ᵀ 1 を返す（非負、x = x* でのみ0）。

    Raises:
        DomainError: x に0以下の成分がある場合
    """
    xv = require_positive(x).reshape(-1)
    xs = require_positive(x_star, "x_star").reshape(-1)
    _check_species_dim(xv, xs.size)
    return float(xv @ np.log(xv / xs) + np.sum(xs - xv))


def gibbs_gradient(x: ArrayLike, x_star: ArrayLike) -> NDArray[np.float64]:
    """G の勾配 Ln(x/x*)（エフォート変数）を返す。"""
    xv = require_positive(x).reshape(-1)
    xs = require_positive(x_star, "x_star").reshape(-1)
    _check_species_dim(xv, xs.size)
    return np.log(xv / xs)
